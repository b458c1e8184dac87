#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <swsearch/seqio.hpp>

#include "support/random_instances.hpp"

using namespace swsearch;

namespace {

std::vector<Residue> codes(std::string_view s)
{
    return make_sequence("x", s).residues;
}

} // namespace

TEST(Alphabet, HasTwentyFourSymbols)
{
    EXPECT_EQ(alphabet::size, 24u);
    EXPECT_EQ(alphabet::symbols.size(), 24u);
    for (std::size_t k = 0; k < alphabet::size; ++k)
        EXPECT_EQ(alphabet::encode(alphabet::symbols[k]), k);
}

TEST(Alphabet, LowercaseFoldsAndUnknownBecomesX)
{
    EXPECT_EQ(alphabet::encode('a'), alphabet::encode('A'));
    EXPECT_EQ(alphabet::encode('w'), alphabet::encode('W'));
    EXPECT_EQ(alphabet::encode('J'), alphabet::unknown);
    EXPECT_EQ(alphabet::encode('1'), alphabet::unknown);
    EXPECT_EQ(alphabet::decode(alphabet::unknown), 'X');
    EXPECT_TRUE(alphabet::contains('b'));
    EXPECT_FALSE(alphabet::contains('J'));
}

TEST(ParseFasta, SingleRecord)
{
    auto recs = parse_fasta(">s1\nACD\n");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].id, "s1");
    EXPECT_EQ(recs[0].residues, codes("ACD"));
}

TEST(ParseFasta, MultiLineBodiesConcatenate)
{
    auto recs = parse_fasta(">s1\nAC\nDE\n>s2\nWW\n");
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].to_string(), "ACDE");
    EXPECT_EQ(recs[1].to_string(), "WW");
}

TEST(ParseFasta, UppercasesAndMapsUnknownToX)
{
    auto recs = parse_fasta(">s1\naJc\n");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].residues, codes("AXC"));
}

TEST(ParseFasta, EmptyInputGivesNoRecords)
{
    EXPECT_TRUE(parse_fasta("").empty());
    EXPECT_TRUE(parse_fasta("\n\n").empty());
}

TEST(ParseFasta, ResiduesBeforeHeaderAreRejected)
{
    EXPECT_THROW(parse_fasta("ACD\n>s1\nA\n"), ParseError);
    try {
        parse_fasta("\nACD\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(ParseFasta, HeaderSplitsIdAndDescription)
{
    auto recs = parse_fasta(">sp|P1|X  some protein  \r\nAC\r\n");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].id, "sp|P1|X");
    EXPECT_EQ(recs[0].description, "some protein");
    EXPECT_EQ(recs[0].to_string(), "AC");
}

TEST(ParseFasta, GapsAndWhitespaceAreStripped)
{
    auto recs = parse_fasta(">s\nA-C. D\tE\n");
    EXPECT_EQ(recs[0].to_string(), "ACDE");
}

TEST(ParseFasta, EmptyRecordIsKept)
{
    auto recs = parse_fasta(">a\n>b\nK\n");
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].length(), 0u);
    EXPECT_EQ(recs[1].to_string(), "K");
}

TEST(ParseFasta, MissingFileNamesPath)
{
    try {
        read_fasta_file("/nonexistent/q.fasta");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/q.fasta"), std::string::npos);
    }
}

TEST(ParseFasta, RoundTripPreservesResiduesAndOrder)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Sequence> recs;
        const int count = std::uniform_int_distribution<int>(0, 8)(rng);
        for (int k = 0; k < count; ++k)
            recs.push_back(swsearch::testing::random_sequence(rng, 0, 150, "r" + std::to_string(k), alphabet::size));
        std::ostringstream out;
        write_fasta(out, recs, 1 + trial % 70);
        auto back = parse_fasta(out.str());
        ASSERT_EQ(back.size(), recs.size());
        for (std::size_t k = 0; k < recs.size(); ++k) {
            EXPECT_EQ(back[k].id, recs[k].id);
            EXPECT_EQ(back[k].residues, recs[k].residues);
        }
    }
}

TEST(SequenceDatabase, Totals)
{
    SequenceDatabase db({make_sequence("a", "AAAAA"), make_sequence("b", "CC"), make_sequence("c", "")}, "db");
    EXPECT_EQ(db.name(), "db");
    EXPECT_EQ(db.size(), 3u);
    EXPECT_EQ(db.total_residues(), 7u);
    EXPECT_EQ(db.max_length(), 5u);
    EXPECT_EQ(db.length_order(), (std::vector<std::size_t>{2, 1, 0}));

    SequenceDatabase empty;
    EXPECT_EQ(empty.total_residues(), 0u);
    EXPECT_EQ(empty.max_length(), 0u);
}

TEST(SequenceDatabase, LengthOrderIsStable)
{
    SequenceDatabase db({make_sequence("a", "AA"), make_sequence("b", "C"), make_sequence("c", "DD"),
                         make_sequence("d", "E")});
    EXPECT_EQ(db.length_order(), (std::vector<std::size_t>{1, 3, 0, 2}));
}

TEST(ScoreMatrix, Blosum62Entries)
{
    auto m = load_score_matrix("BLOSUM62");
    auto r = [](char c) { return alphabet::encode(c); };
    EXPECT_EQ(m(r('A'), r('A')), 4);
    EXPECT_EQ(m(r('W'), r('W')), 11);
    EXPECT_EQ(m(r('A'), r('W')), -3);
    EXPECT_EQ(m(r('B'), r('N')), 3);
    EXPECT_EQ(m(r('Z'), r('Q')), 3);
    EXPECT_EQ(m(r('*'), r('*')), 1);
    EXPECT_EQ(m(r('A'), r('*')), -4);
    EXPECT_EQ(m.max_entry(), 11);
    EXPECT_EQ(m.name(), "BLOSUM62");
}

TEST(ScoreMatrix, Blosum62IsSymmetricWithPositiveStandardDiagonal)
{
    auto m = load_score_matrix("blosum62");
    EXPECT_TRUE(m.is_symmetric());
    for (char c : std::string_view("ARNDCQEGHILKMFPSTWYV"))
        EXPECT_GT(m(alphabet::encode(c), alphabet::encode(c)), 0) << c;
}

TEST(ScoreMatrix, ShippedFileMatchesBuiltin)
{
    auto file = load_score_matrix(std::string(SWSEARCH_DATA_DIR) + "/matrices/BLOSUM62");
    auto builtin = load_score_matrix("BLOSUM62");
    EXPECT_EQ(file.table(), builtin.table());
}

TEST(ScoreMatrix, UnknownNameIsRejected)
{
    EXPECT_THROW(load_score_matrix("BLOSUM999"), UnknownMatrixError);
}

TEST(ScoreMatrix, MissingSymbolsDefaultToX)
{
    auto m = parse_score_matrix("# tiny\n   A  C  X\nA  5 -1 -2\nC -1  9 -3\nX -2 -3 -1\n", "tiny");
    auto r = [](char c) { return alphabet::encode(c); };
    EXPECT_EQ(m(r('A'), r('A')), 5);
    EXPECT_EQ(m(r('C'), r('A')), -1);
    EXPECT_EQ(m(r('W'), r('A')), -2);
    EXPECT_EQ(m(r('W'), r('W')), -1);
    EXPECT_EQ(m(r('C'), r('W')), -3);
    EXPECT_TRUE(m.is_symmetric());
}

TEST(ScoreMatrix, MalformedFilesAreRejected)
{
    EXPECT_THROW(parse_score_matrix("   A  C\nA  1  0\n"), ParseError);          // not square
    EXPECT_THROW(parse_score_matrix("   A  C\nA  1\nC  0  1\n"), ParseError);    // short row
    EXPECT_THROW(parse_score_matrix("   A  C\nA  1  q\nC  0  1\n"), ParseError); // not a number
    EXPECT_THROW(parse_score_matrix("   A  C\nA  1  2\nC  0  1\n"), ParseError); // asymmetric
    EXPECT_THROW(parse_score_matrix("   A  C\nA  1  0\nC  0  1\n"), ParseError); // no X to fall back on
    EXPECT_THROW(parse_score_matrix("# only comments\n"), ParseError);
}

TEST(ScoreMatrix, LoadsFromFile)
{
    auto path = std::filesystem::temp_directory_path() / "swsearch_seqio_matrix.txt";
    {
        std::ofstream f(path);
        f << "   A  X\nA  2 -1\nX -1 -1\n";
    }
    auto m = load_score_matrix(path.string());
    EXPECT_EQ(m(alphabet::encode('A'), alphabet::encode('A')), 2);
    EXPECT_EQ(m.name(), path.filename().string());
    std::filesystem::remove(path);
}

TEST(ScoringScheme, GapConventionIsValidated)
{
    ScoringScheme s{load_score_matrix("BLOSUM62"), 10, 2};
    EXPECT_NO_THROW(s.validate());
    s.gap_extend = 11;
    EXPECT_THROW(s.validate(), ConfigError);
    s.gap_open = 0;
    s.gap_extend = -1;
    EXPECT_THROW(s.validate(), ConfigError);
    s.gap_extend = 0;
    EXPECT_NO_THROW(s.validate());
}
