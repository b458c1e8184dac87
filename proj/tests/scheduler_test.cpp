#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <swsearch/scheduler.hpp>

#include "support/random_instances.hpp"

using namespace swsearch;
using swsearch::testing::blosum62_scheme;
using swsearch::testing::random_database;
using swsearch::testing::random_sequence;

namespace {

std::uint64_t load(const SequenceDatabase& db, IndexRange r)
{
    std::uint64_t total = 0;
    for (std::size_t k = r.begin; k < r.end; ++k)
        total += db[k].length();
    return total;
}

SequenceDatabase lengths_db(const std::vector<std::size_t>& lengths)
{
    std::vector<Sequence> seqs;
    for (std::size_t len : lengths)
        seqs.push_back(make_sequence("s" + std::to_string(seqs.size()), std::string(len, 'K')));
    return SequenceDatabase(std::move(seqs), "lengths");
}

std::vector<Sequence> make_queries(std::mt19937_64& rng, std::size_t count)
{
    std::vector<Sequence> qs;
    for (std::size_t k = 0; k < count; ++k)
        qs.push_back(random_sequence(rng, 5, 60, "q" + std::to_string(k)));
    return qs;
}

} // namespace

TEST(PlanDistribution, OneQueryTwoWorkersSplitsTheDatabase)
{
    auto db = lengths_db({10, 10, 10, 10});
    auto plan = plan_distribution(1, 2, db);
    EXPECT_EQ(plan.mode, DistributionMode::DatabaseSplit);
    ASSERT_EQ(plan.workers.size(), 2u);
    EXPECT_EQ(plan.workers[0].db_range, (IndexRange{0, 2}));
    EXPECT_EQ(plan.workers[1].db_range, (IndexRange{2, 4}));
    for (const auto& w : plan.workers)
        EXPECT_EQ(w.queries, (std::vector<std::size_t>{0}));
}

TEST(PlanDistribution, FiveQueriesTwoWorkersRoundRobin)
{
    auto db = lengths_db({10, 20});
    auto plan = plan_distribution(5, 2, db);
    EXPECT_EQ(plan.mode, DistributionMode::QueryDistribution);
    EXPECT_EQ(plan.workers[0].queries, (std::vector<std::size_t>{0, 2, 4}));
    EXPECT_EQ(plan.workers[1].queries, (std::vector<std::size_t>{1, 3}));
    for (const auto& w : plan.workers)
        EXPECT_EQ(w.db_range, whole(db));
}

TEST(PlanDistribution, StrictFewerThanBoundary)
{
    auto db = lengths_db({10, 20, 30});
    EXPECT_EQ(plan_distribution(2, 2, db).mode, DistributionMode::QueryDistribution);
    EXPECT_EQ(plan_distribution(1, 2, db).mode, DistributionMode::DatabaseSplit);
    EXPECT_EQ(plan_distribution(3, 4, db).mode, DistributionMode::DatabaseSplit);
    EXPECT_EQ(plan_distribution(4, 4, db).mode, DistributionMode::QueryDistribution);
    EXPECT_EQ(plan_distribution(0, 1, db).mode, DistributionMode::DatabaseSplit);
}

TEST(PlanDistribution, ZeroWorkersIsAnError)
{
    EXPECT_THROW(plan_distribution(1, 0, lengths_db({1})), ConfigError);
}

TEST(SplitByResidues, MoreWorkersThanSequences)
{
    auto db = lengths_db({5, 7});
    auto ranges = split_by_residues(db, 4);
    ASSERT_EQ(ranges.size(), 4u);
    std::size_t covered = 0;
    for (const auto& r : ranges)
        covered += r.size();
    EXPECT_EQ(covered, 2u);
    EXPECT_EQ(ranges.front().begin, 0u);
    EXPECT_EQ(ranges.back().end, 2u);
}

TEST(SplitByResidues, EmptyDatabase)
{
    auto ranges = split_by_residues(SequenceDatabase{}, 3);
    ASSERT_EQ(ranges.size(), 3u);
    for (const auto& r : ranges)
        EXPECT_EQ(r.size(), 0u);
}

TEST(SplitByResidues, ZeroLengthSequencesSplitByCount)
{
    auto db = lengths_db({0, 0, 0, 0, 0, 0});
    auto ranges = split_by_residues(db, 3);
    for (const auto& r : ranges)
        EXPECT_EQ(r.size(), 2u);
}

TEST(SplitByResidues, BalanceBoundHoldsOnRandomDatabases)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 40)(rng);
        const std::size_t parts = std::uniform_int_distribution<std::size_t>(1, 9)(rng);
        const std::size_t max_len = std::uniform_int_distribution<std::size_t>(1, 500)(rng);
        std::vector<std::size_t> lengths(n);
        for (auto& l : lengths)
            l = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
        auto db = lengths_db(lengths);
        auto ranges = split_by_residues(db, parts);
        ASSERT_EQ(ranges.size(), parts);
        ASSERT_EQ(ranges.front().begin, 0u);
        ASSERT_EQ(ranges.back().end, n);
        std::uint64_t lo = UINT64_MAX, hi = 0;
        for (std::size_t k = 0; k < parts; ++k) {
            if (k > 0) {
                ASSERT_EQ(ranges[k].begin, ranges[k - 1].end);
            }
            ASSERT_LE(ranges[k].begin, ranges[k].end);
            lo = std::min(lo, load(db, ranges[k]));
            hi = std::max(hi, load(db, ranges[k]));
        }
        ASSERT_LE(hi - lo, db.max_length()) << "trial " << trial;
    }
}

TEST(SplitByResidues, WeightsShiftTheLoad)
{
    auto db = lengths_db(std::vector<std::size_t>(100, 10));
    std::vector<double> w{3.0, 1.0};
    auto ranges = split_by_residues(db, 2, w);
    EXPECT_EQ(ranges[0].size(), 75u);
    EXPECT_EQ(ranges[1].size(), 25u);
    std::vector<double> bad{1.0};
    EXPECT_THROW(split_by_residues(db, 2, bad), ConfigError);
    std::vector<double> negative{1.0, -1.0};
    EXPECT_THROW(split_by_residues(db, 2, negative), ConfigError);
    EXPECT_THROW(split_by_residues(db, 0), ConfigError);
}

TEST(SplitByResidues, WeightedSplitCoversEverything)
{
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 300; ++trial) {
        auto db = random_database(rng, std::uniform_int_distribution<std::size_t>(0, 30)(rng), 0, 100);
        const std::size_t parts = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        std::vector<double> w(parts);
        for (auto& x : w)
            x = std::uniform_real_distribution<double>(0.1, 4.0)(rng);
        auto ranges = split_by_residues(db, parts, w);
        ASSERT_EQ(ranges.front().begin, 0u);
        ASSERT_EQ(ranges.back().end, db.size());
        for (std::size_t k = 1; k < parts; ++k)
            ASSERT_EQ(ranges[k].begin, ranges[k - 1].end);
    }
}

TEST(MergePartialResults, EqualsRankingTheConcatenation)
{
    SearchResult a{"q", {{0, 5, 1, 1, {}}, {2, 3, 1, 1, {}}}, 100, 0.5};
    SearchResult b{"q", {{5, 9, 2, 2, {}}, {7, 5, 1, 1, {}}, {9, 1, 1, 1, {}}}, 50, 0.25};
    std::vector<SearchResult> parts{a, b};
    auto m = merge_partial_results(parts, 3);
    EXPECT_EQ(m.query_id, "q");
    EXPECT_EQ(m.total_cells, 150u);
    ASSERT_EQ(m.hits.size(), 3u);
    EXPECT_EQ(m.hits[0].db_index, 5u);
    EXPECT_EQ(m.hits[1].db_index, 0u);
    EXPECT_EQ(m.hits[2].db_index, 7u);
    EXPECT_TRUE(merge_partial_results({}, 3).hits.empty());
}

TEST(ExecutePlan, SingleWorkerEqualsDirectSearch)
{
    std::mt19937_64 rng(19);
    auto db = random_database(rng, 80, 1, 120);
    auto queries = make_queries(rng, 3);
    PartitionConfig config;
    auto plan = plan_distribution(queries.size(), 1, db);
    auto results = execute_plan(plan, queries, db, blosum62_scheme(), config);
    ASSERT_EQ(results.size(), 3u);
    for (std::size_t q = 0; q < queries.size(); ++q)
        EXPECT_TRUE(same_outcome(results[q], search_database(queries[q], db, blosum62_scheme(), config)));
}

TEST(ExecutePlan, WorkerCountDoesNotChangeResults)
{
    std::mt19937_64 rng(20);
    auto db = random_database(rng, 200, 1, 150);
    PartitionConfig config;
    config.top_k = 15;
    for (std::size_t nq : {1u, 2u, 5u}) {
        auto queries = make_queries(rng, nq);
        auto reference = execute_plan(plan_distribution(nq, 1, db), queries, db, blosum62_scheme(), config);
        for (std::size_t workers : {2u, 3u, 4u}) {
            auto plan = plan_distribution(nq, workers, db);
            auto results = execute_plan(plan, queries, db, blosum62_scheme(), config);
            ASSERT_EQ(results.size(), nq);
            for (std::size_t q = 0; q < nq; ++q)
                ASSERT_TRUE(same_outcome(results[q], reference[q])) << nq << " queries, " << workers << " workers";
        }
    }
}

TEST(ExecutePlan, InconsistentPlansAreRejected)
{
    auto db = lengths_db({5, 5});
    std::vector<Sequence> queries{make_sequence("q", "KK")};
    WorkerPlan plan{DistributionMode::QueryDistribution, {{{0, 1}, {0, 2}}}};
    EXPECT_THROW(execute_plan(plan, queries, db, blosum62_scheme(), {}), ConfigError);
    WorkerPlan out_of_range{DistributionMode::QueryDistribution, {{{0}, {0, 3}}}};
    EXPECT_THROW(execute_plan(out_of_range, queries, db, blosum62_scheme(), {}), ConfigError);
    WorkerPlan empty{DistributionMode::QueryDistribution, {}};
    EXPECT_THROW(execute_plan(empty, queries, db, blosum62_scheme(), {}), ConfigError);
}

TEST(ExecutePlan, WorkerFailureNamesWorkerAndAssignment)
{
    auto db = lengths_db({5, 5, 5, 5});
    std::vector<Sequence> queries{make_sequence("good", "KK"), make_sequence("empty", "")};
    auto plan = plan_distribution(2, 2, db);
    try {
        execute_plan(plan, queries, db, blosum62_scheme(), {});
        FAIL();
    } catch (const SearchError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("worker 1"), std::string::npos) << msg;
        EXPECT_NE(msg.find("empty"), std::string::npos) << msg;
    }

    std::vector<Sequence> one{make_sequence("empty", "")};
    try {
        execute_plan(plan_distribution(1, 2, db), one, db, blosum62_scheme(), {});
        FAIL();
    } catch (const SearchError& e) {
        EXPECT_NE(std::string(e.what()).find("database range"), std::string::npos);
    }
}
