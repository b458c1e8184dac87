#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include <swsearch/bench.hpp>

#include "support/random_instances.hpp"

using namespace swsearch;
using swsearch::testing::blosum62_scheme;
using swsearch::testing::random_database;
using swsearch::testing::random_sequence;

namespace {

/// Advances by a fixed step on every call.
struct StepTimer
{
    double now = 0;
    double step;

    double operator()() { return now += step; }
};

BenchReport sample(std::string db, std::string query, std::uint64_t cells = 1000)
{
    StepTimer t{0, 0.5};
    auto r = measure_gcups([&] { return cells; }, 2, std::ref(t));
    r.db_name = std::move(db);
    r.query_id = std::move(query);
    return r;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST(Gcups, DirectFormula)
{
    EXPECT_DOUBLE_EQ(gcups(100'000'000, 1.0), 0.1);
    EXPECT_THROW(gcups(10, 0.0), TimingError);
    EXPECT_THROW(gcups(10, -1.0), TimingError);
}

TEST(MeasureGcups, PerRunSamplesAndMeans)
{
    StepTimer t{0, 1.0};
    auto r = measure_gcups([] { return std::uint64_t{1'000'000'000}; }, 20, std::ref(t));
    EXPECT_EQ(r.repetitions(), 20u);
    EXPECT_EQ(r.run_gcups.size(), 20u);
    EXPECT_EQ(r.total_cells, 1'000'000'000u);
    EXPECT_DOUBLE_EQ(r.mean_elapsed, 1.0);
    EXPECT_DOUBLE_EQ(r.gcups, 1.0);
    EXPECT_DOUBLE_EQ(r.mean_run_gcups, 1.0);
}

TEST(MeasureGcups, MeanOfElapsedDiffersFromMeanOfRates)
{
    // elapsed alternates 1 s and 3 s
    double now = 0;
    int calls = 0;
    auto timer = [&] {
        ++calls;
        if (calls % 2 == 0)
            now += (calls % 4 == 2) ? 1.0 : 3.0;
        return now;
    };
    auto r = measure_gcups([] { return std::uint64_t{3'000'000'000}; }, 2, timer);
    EXPECT_DOUBLE_EQ(r.mean_elapsed, 2.0);
    EXPECT_DOUBLE_EQ(r.gcups, 1.5);
    EXPECT_DOUBLE_EQ(r.mean_run_gcups, (3.0 + 1.0) / 2);
    // total_cells * N / sum(elapsed)
    EXPECT_DOUBLE_EQ(r.gcups, 3.0 * 2 / 4.0);
}

TEST(MeasureGcups, Errors)
{
    EXPECT_THROW(measure_gcups([] { return std::uint64_t{1}; }, 0), ConfigError);
    auto frozen = [] { return 5.0; };
    try {
        measure_gcups([] { return std::uint64_t{1}; }, 1, frozen);
        FAIL();
    } catch (const TimingError& e) {
        EXPECT_NE(std::string(e.what()).find("larger"), std::string::npos);
    }
    StepTimer t{0, 1};
    std::uint64_t n = 0;
    EXPECT_THROW(measure_gcups([&] { return ++n; }, 3, std::ref(t)), SearchError);
}

TEST(BenchSearch, CellsAreQueryTimesResidues)
{
    auto db = SequenceDatabase({make_sequence("a", std::string(400, 'A')), make_sequence("b", std::string(600, 'C'))},
                               "tiny");
    auto q = make_sequence("q", std::string(100, 'W'));
    StepTimer t{0, 0.001};
    auto r = bench_search(q, db, blosum62_scheme(), {}, 1, 3, std::ref(t));
    EXPECT_EQ(r.total_cells, 100'000u);
    EXPECT_EQ(r.repetitions(), 3u);
    EXPECT_EQ(r.query_id, "q");
    EXPECT_EQ(r.db_name, "tiny");
    EXPECT_EQ(r.config.matrix, "BLOSUM62");
    EXPECT_EQ(r.config.threshold, "80%");
    EXPECT_GT(r.gcups, 0);
}

TEST(BenchSearch, CellAccountingIgnoresLanesAndWorkers)
{
    std::mt19937_64 rng(22);
    auto db = random_database(rng, 60, 1, 200);
    auto q = random_sequence(rng, 30, 80);
    for (std::size_t lanes : {1u, 4u, 32u}) {
        for (std::size_t workers : {1u, 2u, 3u}) {
            PartitionConfig c;
            c.lane_width = lanes;
            auto r = bench_search(q, db, blosum62_scheme(), c, workers, 1);
            EXPECT_EQ(r.total_cells, q.length() * db.total_residues());
            EXPECT_EQ(r.config.workers, workers);
            EXPECT_EQ(r.config.lane_width, lanes);
        }
    }
}

TEST(EmitReport, EmptyCsvIsHeaderOnly)
{
    std::ostringstream out;
    emit_report({}, ReportFormat::Csv, out);
    EXPECT_EQ(out.str(), "db_name,query_id,total_cells,repetitions,mean_elapsed_s,gcups,mean_run_gcups,matrix,"
                         "gap_open,gap_extend,threshold,lane_width,workers,run_elapsed_s\n");
}

TEST(EmitReport, OneRowWithConfig)
{
    std::vector<BenchReport> reports{sample("db", "q1")};
    std::ostringstream out;
    emit_report(reports, ReportFormat::Csv, out);
    std::istringstream lines(out.str());
    std::string header, row, extra;
    std::getline(lines, header);
    std::getline(lines, row);
    EXPECT_FALSE(std::getline(lines, extra));
    EXPECT_EQ(row, "db,q1,1000,2,0.5,2e-06,2e-06,BLOSUM62,10,2,80%,32,1,0.5;0.5");
}

TEST(EmitReport, RowsSortedByDatabaseThenQuery)
{
    std::vector<BenchReport> reports{sample("b", "q1"), sample("a", "q2"), sample("a", "q1")};
    std::ostringstream out;
    emit_report(reports, ReportFormat::Csv, out);
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    std::vector<std::string> keys;
    while (std::getline(lines, line))
        keys.push_back(line.substr(0, line.find(',', line.find(',') + 1)));
    EXPECT_EQ(keys, (std::vector<std::string>{"a,q1", "a,q2", "b,q1"}));
}

TEST(EmitReport, JsonFieldsAndOrder)
{
    std::vector<BenchReport> reports{sample("db", "z"), sample("db", "a")};
    std::ostringstream out;
    emit_report(reports, ReportFormat::Json, out);
    auto doc = nlohmann::ordered_json::parse(out.str());
    ASSERT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc[0]["query_id"], "a");
    EXPECT_EQ(doc[0]["total_cells"], 1000);
    EXPECT_EQ(doc[0]["config"]["gap_open"], 10);
    EXPECT_EQ(doc[0]["run_elapsed_s"].size(), 2u);
    EXPECT_EQ(doc[0].begin().key(), "db_name");
}

TEST(EmitReport, FilesAreByteIdenticalAcrossRuns)
{
    std::vector<BenchReport> reports{sample("db", "q1"), sample("db", "q0", 77)};
    auto dir = std::filesystem::temp_directory_path();
    for (auto format : {ReportFormat::Csv, ReportFormat::Json}) {
        auto a = dir / "swsearch_bench_a.out";
        auto b = dir / "swsearch_bench_b.out";
        emit_report(reports, format, a);
        emit_report(reports, format, b);
        EXPECT_EQ(slurp(a), slurp(b));
        EXPECT_FALSE(slurp(a).empty());
        std::filesystem::remove(a);
        std::filesystem::remove(b);
    }
}

TEST(EmitReport, UnwritableDestination)
{
    EXPECT_THROW(emit_report({}, ReportFormat::Csv, std::filesystem::path("/nonexistent/dir/report.csv")), IoError);
}

TEST(EmitReport, CsvQuotesAwkwardFields)
{
    std::vector<BenchReport> reports{sample("my,db", "q\"1")};
    std::ostringstream out;
    emit_report(reports, ReportFormat::Csv, out);
    EXPECT_NE(out.str().find("\"my,db\",\"q\"\"1\""), std::string::npos);
}
