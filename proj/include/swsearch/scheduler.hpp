#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <swsearch/dbsearch.hpp>
#include <swsearch/error.hpp>
#include <swsearch/seqio.hpp>

namespace swsearch {

enum class DistributionMode
{
    DatabaseSplit,     ///< fewer queries than workers: every worker takes a slice of the database
    QueryDistribution, ///< otherwise: queries dealt to workers, each against the whole database
};

inline const char* to_string(DistributionMode mode)
{
    return mode == DistributionMode::DatabaseSplit ? "database-split" : "query-distribution";
}

struct WorkerAssignment
{
    std::vector<std::size_t> queries;
    IndexRange db_range;

    bool operator==(const WorkerAssignment&) const = default;
};

struct WorkerPlan
{
    DistributionMode mode = DistributionMode::QueryDistribution;
    std::vector<WorkerAssignment> workers;
};

namespace detail {

/// Cut positions c_0 = 0 <= c_1 <= ... <= c_parts = N such that part k holds
/// between window_lo(k) and window_lo(k) + M residues, where M is the
/// longest sequence. Reachable cut positions after k parts always form a
/// contiguous index interval because no sequence is longer than a window is
/// wide, so feasibility for a given floor L is a handful of binary searches.
class ResidueSplitter
{
public:
    ResidueSplitter(const SequenceDatabase& db, std::vector<double> weights)
        : weights_(std::move(weights)), prefix_(db.size() + 1, 0), longest_(db.max_length())
    {
        for (std::size_t k = 0; k < db.size(); ++k)
            prefix_[k + 1] = prefix_[k] + db[k].length();
    }

    std::optional<std::vector<std::size_t>> solve() const
    {
        const std::uint64_t total = prefix_.back();
        const double weight_sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
        auto hi = static_cast<std::uint64_t>(static_cast<double>(total) / weight_sum);
        std::uint64_t lo = 0;
        if (!feasible_floor(0))
            return std::nullopt;
        while (lo < hi) {
            std::uint64_t mid = lo + (hi - lo + 1) / 2;
            if (feasible_floor(mid))
                lo = mid;
            else
                hi = mid - 1;
        }
        return cuts_for(lo);
    }

private:
    struct Span
    {
        std::size_t lo, hi;
    };

    std::uint64_t window_lo(std::size_t part, std::uint64_t floor) const
    {
        return static_cast<std::uint64_t>(std::floor(weights_[part] * static_cast<double>(floor)));
    }

    std::size_t first_at_least(std::uint64_t value) const
    {
        return static_cast<std::size_t>(std::ranges::lower_bound(prefix_, value) - prefix_.begin());
    }

    // index of the last prefix <= value, or npos when none
    std::ptrdiff_t last_at_most(std::uint64_t value) const
    {
        return (std::ranges::upper_bound(prefix_, value) - prefix_.begin()) - 1;
    }

    std::vector<std::optional<Span>> reach(std::uint64_t floor) const
    {
        const std::uint64_t total = prefix_.back();
        std::vector<std::optional<Span>> sets{Span{0, 0}};
        for (std::size_t part = 0; part < weights_.size(); ++part) {
            const Span prev = *sets.back();
            const std::uint64_t lo = window_lo(part, floor);
            if (lo > total) {
                sets.emplace_back();
                return sets;
            }
            const std::ptrdiff_t top = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(prev.hi),
                                                                last_at_most(total - lo));
            if (top < static_cast<std::ptrdiff_t>(prev.lo)) {
                sets.emplace_back();
                return sets;
            }
            const auto last = static_cast<std::size_t>(top);
            sets.push_back(Span{first_at_least(prefix_[prev.lo] + lo),
                                static_cast<std::size_t>(last_at_most(prefix_[last] + lo + longest_))});
        }
        return sets;
    }

    bool feasible_floor(std::uint64_t floor) const
    {
        auto sets = reach(floor);
        return sets.back().has_value() && sets.back()->lo <= prefix_.size() - 1;
    }

    std::optional<std::vector<std::size_t>> cuts_for(std::uint64_t floor) const
    {
        const auto sets = reach(floor);
        const std::size_t n = prefix_.size() - 1;
        if (!sets.back() || sets.back()->lo > n || sets.back()->hi < n)
            return std::nullopt;
        std::vector<std::size_t> cuts(weights_.size() + 1, 0);
        cuts.back() = n;
        for (std::size_t part = weights_.size(); part-- > 0;) {
            const Span span = *sets[part];
            const std::uint64_t end_value = prefix_[cuts[part + 1]];
            const std::uint64_t lo = window_lo(part, floor);
            const std::uint64_t hi = lo + longest_;
            const std::uint64_t want = end_value >= hi ? end_value - hi : 0;
            std::size_t c = std::max(span.lo, first_at_least(want));
            if (c > span.hi || c > cuts[part + 1] || end_value - prefix_[c] < lo)
                return std::nullopt;
            cuts[part] = c;
        }
        if (cuts.front() != 0)
            return std::nullopt;
        return cuts;
    }

    std::vector<double> weights_;
    std::vector<std::uint64_t> prefix_;
    std::uint64_t longest_;
};

/// Cuts at the residue fractions given by the weights.
inline std::vector<std::size_t> proportional_cuts(const SequenceDatabase& db, std::span<const double> weights)
{
    const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    const auto total = static_cast<double>(db.total_residues());
    std::vector<std::size_t> cuts{0};
    double target = 0;
    std::uint64_t running = 0;
    std::size_t k = 0;
    for (std::size_t part = 0; part + 1 < weights.size(); ++part) {
        target += total * weights[part] / weight_sum;
        while (k < db.size() && static_cast<double>(running) < target)
            running += db[k++].length();
        cuts.push_back(k);
    }
    cuts.push_back(db.size());
    return cuts;
}

} // namespace detail

/// Splits the database into `parts` contiguous index ranges balanced by
/// residue count. With uniform weights the heaviest range exceeds the
/// lightest by at most the longest sequence.
inline std::vector<IndexRange> split_by_residues(const SequenceDatabase& db, std::size_t parts,
                                                 std::span<const double> weights = {})
{
    if (parts == 0)
        throw ConfigError("cannot split a database into zero parts");
    std::vector<double> w(weights.begin(), weights.end());
    if (w.empty())
        w.assign(parts, 1.0);
    if (w.size() != parts)
        throw ConfigError("expected " + std::to_string(parts) + " worker weights, got " + std::to_string(w.size()));
    if (std::ranges::any_of(w, [](double x) { return !(x > 0) || !std::isfinite(x); }))
        throw ConfigError("worker weights must be positive");
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(parts);
    for (auto& x : w)
        x /= mean;

    std::vector<std::size_t> cuts;
    if (db.total_residues() == 0) {
        for (std::size_t part = 0; part <= parts; ++part)
            cuts.push_back(db.size() * part / parts);
    } else if (auto solved = detail::ResidueSplitter(db, w).solve()) {
        cuts = std::move(*solved);
    } else {
        cuts = detail::proportional_cuts(db, w);
    }

    std::vector<IndexRange> ranges;
    for (std::size_t part = 0; part < parts; ++part)
        ranges.push_back({cuts[part], cuts[part + 1]});
    return ranges;
}

/// Picks the multi-worker strategy. Fewer queries than workers splits the
/// database among workers; otherwise queries are dealt round-robin and every
/// worker sees the whole database. Weights only shape database slices.
inline WorkerPlan plan_distribution(std::size_t num_queries, std::size_t num_workers, const SequenceDatabase& db,
                                    std::span<const double> weights = {})
{
    if (num_workers == 0)
        throw ConfigError("at least one worker is required");
    WorkerPlan plan;
    plan.workers.resize(num_workers);
    if (num_queries < num_workers) {
        plan.mode = DistributionMode::DatabaseSplit;
        auto ranges = split_by_residues(db, num_workers, weights);
        std::vector<std::size_t> all(num_queries);
        std::iota(all.begin(), all.end(), std::size_t{0});
        for (std::size_t w = 0; w < num_workers; ++w)
            plan.workers[w] = {all, ranges[w]};
    } else {
        plan.mode = DistributionMode::QueryDistribution;
        for (std::size_t w = 0; w < num_workers; ++w)
            plan.workers[w].db_range = whole(db);
        for (std::size_t q = 0; q < num_queries; ++q)
            plan.workers[q % num_workers].queries.push_back(q);
    }
    return plan;
}

/// Globally ranked union of per-slice results for one query.
inline SearchResult merge_partial_results(std::span<const SearchResult> parts, std::size_t top_k)
{
    SearchResult merged;
    if (parts.empty())
        return merged;
    merged.query_id = parts.front().query_id;
    std::vector<ScoredIndex> scores;
    std::vector<const RankedHit*> by_index;
    for (const auto& part : parts) {
        merged.total_cells += part.total_cells;
        merged.elapsed_seconds = std::max(merged.elapsed_seconds, part.elapsed_seconds);
        for (const auto& hit : part.hits) {
            scores.push_back({hit.db_index, hit.score});
            by_index.push_back(&hit);
        }
    }
    for (const auto& top : rank_hits(scores, top_k)) {
        auto it = std::ranges::find_if(by_index, [&](const RankedHit* h) { return h->db_index == top.db_index; });
        merged.hits.push_back(**it);
    }
    return merged;
}

namespace detail {

inline std::string describe(std::size_t worker, const WorkerAssignment& a, std::string_view query_id)
{
    return "worker " + std::to_string(worker) + " (query '" + std::string(query_id) + "', database range [" +
           std::to_string(a.db_range.begin) + ", " + std::to_string(a.db_range.end) + "))";
}

inline void check_plan(const WorkerPlan& plan, std::size_t num_queries, const SequenceDatabase& db)
{
    if (plan.workers.empty())
        throw ConfigError("plan has no workers");
    std::vector<int> seen(num_queries, 0);
    for (const auto& w : plan.workers) {
        if (w.db_range.begin > w.db_range.end || w.db_range.end > db.size())
            throw ConfigError("plan range exceeds the database");
        for (std::size_t q : w.queries) {
            if (q >= num_queries)
                throw ConfigError("plan names query " + std::to_string(q) + " of " + std::to_string(num_queries));
            ++seen[q];
        }
    }
    const auto expected = plan.mode == DistributionMode::DatabaseSplit ? static_cast<int>(plan.workers.size()) : 1;
    if (std::ranges::any_of(seen, [&](int c) { return c != expected; }))
        throw ConfigError("plan does not cover every query the way its mode requires");
}

} // namespace detail

/// Runs a plan on one thread per worker. Database-split plans synchronize at
/// the end of each query and merge; results are returned in query order and
/// match a single-worker run exactly.
inline std::vector<SearchResult> execute_plan(const WorkerPlan& plan, std::span<const Sequence> queries,
                                              const SequenceDatabase& db, const ScoringScheme& scheme,
                                              const PartitionConfig& config)
{
    detail::check_plan(plan, queries.size(), db);
    std::vector<SearchResult> results(queries.size());
    const std::size_t workers = plan.workers.size();

    if (plan.mode == DistributionMode::QueryDistribution) {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::string> failed_on(workers);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    const auto& a = plan.workers[w];
                    for (std::size_t q : a.queries) {
                        try {
                            results[q] = search_database(queries[q], db, scheme, config, a.db_range);
                        } catch (...) {
                            errors[w] = std::current_exception();
                            failed_on[w] = detail::describe(w, a, queries[q].id);
                            return;
                        }
                    }
                });
            }
        }
        for (std::size_t w = 0; w < workers; ++w) {
            if (!errors[w])
                continue;
            try {
                std::rethrow_exception(errors[w]);
            } catch (const std::exception& e) {
                throw SearchError(failed_on[w] + " failed: " + e.what());
            }
        }
        return results;
    }

    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto start = std::chrono::steady_clock::now();
        std::vector<SearchResult> partial(workers);
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        partial[w] = search_database(queries[q], db, scheme, config, plan.workers[w].db_range);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (std::size_t w = 0; w < workers; ++w) {
            if (!errors[w])
                continue;
            try {
                std::rethrow_exception(errors[w]);
            } catch (const std::exception& e) {
                throw SearchError(detail::describe(w, plan.workers[w], queries[q].id) + " failed: " + e.what());
            }
        }
        results[q] = merge_partial_results(partial, config.top_k);
        results[q].elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return results;
}

} // namespace swsearch
