#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <swsearch/blosum62.hpp>
#include <swsearch/error.hpp>

namespace swsearch {

/// Residue code: index into the 24-symbol protein alphabet.
using Residue = std::uint8_t;

namespace alphabet {

inline constexpr std::size_t size = 24;
inline constexpr std::string_view symbols = "ARNDCQEGHILKMFPSTWYVBZX*";
inline constexpr Residue unknown = 22; // X

namespace detail {

constexpr std::array<Residue, 256> make_lookup()
{
    std::array<Residue, 256> table{};
    table.fill(unknown);
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        auto c = static_cast<unsigned char>(symbols[k]);
        table[c] = static_cast<Residue>(k);
        if (c >= 'A' && c <= 'Z')
            table[c - 'A' + 'a'] = static_cast<Residue>(k);
    }
    return table;
}

inline constexpr auto lookup = make_lookup();

} // namespace detail

/// Maps a character to its residue code. Lowercase is folded to uppercase and
/// anything outside the alphabet becomes X.
constexpr Residue encode(char c) noexcept
{
    return detail::lookup[static_cast<unsigned char>(c)];
}

constexpr char decode(Residue r) noexcept
{
    return r < size ? symbols[r] : 'X';
}

/// True if `c` names a symbol of the alphabet (either case).
constexpr bool contains(char c) noexcept
{
    auto u = static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c);
    return symbols.find(u) != std::string_view::npos;
}

} // namespace alphabet

struct Sequence
{
    std::string id;
    std::string description;
    std::vector<Residue> residues;

    std::size_t length() const noexcept { return residues.size(); }

    std::string to_string() const
    {
        std::string s(residues.size(), 'X');
        std::ranges::transform(residues, s.begin(), alphabet::decode);
        return s;
    }

    bool operator==(const Sequence&) const = default;
};

/// Builds a sequence from a residue string (test and tooling convenience).
inline Sequence make_sequence(std::string id, std::string_view residues)
{
    Sequence seq{std::move(id), {}, {}};
    seq.residues.reserve(residues.size());
    for (char c : residues)
        seq.residues.push_back(alphabet::encode(c));
    return seq;
}

/// Immutable collection of database sequences. The length ordering is
/// computed once here and reused by every search over the database.
class SequenceDatabase
{
public:
    SequenceDatabase() = default;

    explicit SequenceDatabase(std::vector<Sequence> sequences, std::string name = {})
        : name_(std::move(name)), sequences_(std::move(sequences))
    {
        for (const auto& s : sequences_) {
            total_residues_ += s.length();
            max_length_ = std::max(max_length_, s.length());
        }
        by_length_.resize(sequences_.size());
        std::iota(by_length_.begin(), by_length_.end(), std::size_t{0});
        std::ranges::stable_sort(by_length_, {}, [this](std::size_t k) { return sequences_[k].length(); });
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return sequences_.size(); }
    bool empty() const noexcept { return sequences_.empty(); }
    const Sequence& operator[](std::size_t k) const { return sequences_[k]; }
    const std::vector<Sequence>& sequences() const noexcept { return sequences_; }
    std::uint64_t total_residues() const noexcept { return total_residues_; }
    std::size_t max_length() const noexcept { return max_length_; }

    /// Indices sorted by ascending length, ties by ascending index.
    const std::vector<std::size_t>& length_order() const noexcept { return by_length_; }

private:
    std::string name_;
    std::vector<Sequence> sequences_;
    std::vector<std::size_t> by_length_;
    std::uint64_t total_residues_ = 0;
    std::size_t max_length_ = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    auto issp = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && issp(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && issp(s.back()))
        s.remove_suffix(1);
    return s;
}

} // namespace detail

/// Parses FASTA records in file order. Whitespace and the gap characters
/// '-' and '.' are dropped from sequence bodies.
inline std::vector<Sequence> parse_fasta(std::istream& in)
{
    std::vector<Sequence> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r')
            view.remove_suffix(1);
        if (!view.empty() && view.front() == '>') {
            auto header = detail::trim(view.substr(1));
            auto split = header.find_first_of(" \t");
            Sequence seq;
            seq.id = std::string(header.substr(0, split));
            if (split != std::string_view::npos)
                seq.description = std::string(detail::trim(header.substr(split)));
            records.push_back(std::move(seq));
            continue;
        }
        for (char c : view) {
            if (std::isspace(static_cast<unsigned char>(c)) || c == '-' || c == '.')
                continue;
            if (records.empty())
                throw ParseError("FASTA line " + std::to_string(line_no) + ": residue data before the first '>' header");
            records.back().residues.push_back(alphabet::encode(c));
        }
    }
    return records;
}

inline std::vector<Sequence> parse_fasta(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse_fasta(in);
}

inline std::vector<Sequence> read_fasta_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open FASTA file: " + path.string());
    return parse_fasta(in);
}

inline void write_fasta(std::ostream& out, const std::vector<Sequence>& records, std::size_t line_width = 60)
{
    for (const auto& seq : records) {
        out << '>' << seq.id;
        if (!seq.description.empty())
            out << ' ' << seq.description;
        out << '\n';
        auto text = seq.to_string();
        for (std::size_t k = 0; k < text.size(); k += line_width)
            out << std::string_view(text).substr(k, line_width) << '\n';
    }
}

/// 24x24 substitution matrix indexed by residue codes.
class ScoreMatrix
{
public:
    using Table = std::array<std::array<std::int32_t, alphabet::size>, alphabet::size>;

    ScoreMatrix() = default;
    explicit ScoreMatrix(const Table& table, std::string name = {}) : table_(table), name_(std::move(name)) {}

    std::int32_t operator()(Residue a, Residue b) const noexcept { return table_[a][b]; }
    const std::array<std::int32_t, alphabet::size>& row(Residue a) const noexcept { return table_[a]; }
    const Table& table() const noexcept { return table_; }
    const std::string& name() const noexcept { return name_; }

    std::int32_t max_entry() const noexcept
    {
        std::int32_t best = table_[0][0];
        for (const auto& r : table_)
            for (auto v : r)
                best = std::max(best, v);
        return best;
    }

    bool is_symmetric() const noexcept
    {
        for (std::size_t a = 0; a < alphabet::size; ++a)
            for (std::size_t b = 0; b < a; ++b)
                if (table_[a][b] != table_[b][a])
                    return false;
        return true;
    }

private:
    Table table_{};
    std::string name_;
};

/// Substitution matrix plus affine gap penalties. The first gap position
/// costs `gap_open`, every further position `gap_extend`.
struct ScoringScheme
{
    ScoreMatrix matrix;
    std::int32_t gap_open = 10;
    std::int32_t gap_extend = 2;

    void validate() const
    {
        if (gap_extend < 0 || gap_open < gap_extend)
            throw ConfigError("gap penalties must satisfy gap_open >= gap_extend >= 0 (got " +
                              std::to_string(gap_open) + "/" + std::to_string(gap_extend) + ")");
    }
};

/// Parses a matrix in the whitespace-separated NCBI text layout. Symbols of
/// the alphabet missing from the file take the file's X row/column.
inline ScoreMatrix parse_score_matrix(std::istream& in, std::string name = {})
{
    std::vector<char> columns;
    std::vector<std::pair<char, std::vector<std::int32_t>>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = detail::trim(line);
        if (view.empty() || view.front() == '#')
            continue;
        std::istringstream tokens{std::string(view)};
        if (columns.empty()) {
            std::string tok;
            while (tokens >> tok) {
                if (tok.size() != 1)
                    throw ParseError("matrix line " + std::to_string(line_no) + ": bad column symbol '" + tok + "'");
                columns.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0]))));
            }
            continue;
        }
        std::string label;
        tokens >> label;
        if (label.size() != 1)
            throw ParseError("matrix line " + std::to_string(line_no) + ": bad row symbol '" + label + "'");
        std::vector<std::int32_t> values;
        std::string tok;
        while (tokens >> tok) {
            try {
                std::size_t used = 0;
                long v = std::stol(tok, &used);
                if (used != tok.size())
                    throw std::invalid_argument(tok);
                values.push_back(static_cast<std::int32_t>(v));
            } catch (const std::logic_error&) {
                throw ParseError("matrix line " + std::to_string(line_no) + ": not an integer '" + tok + "'");
            }
        }
        if (values.size() != columns.size())
            throw ParseError("matrix line " + std::to_string(line_no) + ": expected " +
                             std::to_string(columns.size()) + " entries, found " + std::to_string(values.size()));
        rows.emplace_back(static_cast<char>(std::toupper(static_cast<unsigned char>(label[0]))), std::move(values));
    }
    if (columns.empty())
        throw ParseError("matrix has no header row");
    if (rows.size() != columns.size())
        throw ParseError("matrix is not square: " + std::to_string(rows.size()) + " rows, " +
                         std::to_string(columns.size()) + " columns");

    // position of each alphabet symbol in the file, or -1
    std::array<int, alphabet::size> col_of{};
    std::array<int, alphabet::size> row_of{};
    col_of.fill(-1);
    row_of.fill(-1);
    for (std::size_t k = 0; k < columns.size(); ++k)
        if (alphabet::contains(columns[k]))
            col_of[alphabet::encode(columns[k])] = static_cast<int>(k);
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (alphabet::contains(rows[k].first))
            row_of[alphabet::encode(rows[k].first)] = static_cast<int>(k);

    bool complete = std::ranges::none_of(col_of, [](int v) { return v < 0; }) &&
                    std::ranges::none_of(row_of, [](int v) { return v < 0; });
    if (!complete && (col_of[alphabet::unknown] < 0 || row_of[alphabet::unknown] < 0))
        throw ParseError("matrix lacks symbols of the alphabet and has no X entry to default them to");
    for (std::size_t a = 0; a < alphabet::size; ++a) {
        if (col_of[a] < 0)
            col_of[a] = col_of[alphabet::unknown];
        if (row_of[a] < 0)
            row_of[a] = row_of[alphabet::unknown];
    }

    ScoreMatrix::Table table{};
    for (std::size_t a = 0; a < alphabet::size; ++a)
        for (std::size_t b = 0; b < alphabet::size; ++b)
            table[a][b] = rows[static_cast<std::size_t>(row_of[a])].second[static_cast<std::size_t>(col_of[b])];

    ScoreMatrix matrix(table, std::move(name));
    if (!matrix.is_symmetric())
        throw ParseError("matrix is not symmetric");
    return matrix;
}

inline ScoreMatrix parse_score_matrix(std::string_view text, std::string name = {})
{
    std::istringstream in{std::string(text)};
    return parse_score_matrix(in, std::move(name));
}

/// Resolves a builtin matrix name (case-insensitive) or a path to a matrix file.
inline ScoreMatrix load_score_matrix(std::string_view source)
{
    std::string upper(source);
    std::ranges::transform(upper, upper.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "BLOSUM62")
        return ScoreMatrix(builtin::blosum62, "BLOSUM62");

    std::filesystem::path path{std::string(source)};
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw UnknownMatrixError("unknown matrix '" + std::string(source) +
                                 "': not a builtin (BLOSUM62) and not a readable file");
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open matrix file: " + path.string());
    return parse_score_matrix(in, path.filename().string());
}

} // namespace swsearch
