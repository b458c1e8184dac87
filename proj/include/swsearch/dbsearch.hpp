#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <swsearch/align_core.hpp>
#include <swsearch/error.hpp>
#include <swsearch/parallel_schemes.hpp>
#include <swsearch/seqio.hpp>

namespace swsearch {

/// Sequences of at most `length` residues go to the short (batched) kernel.
struct FixedLength
{
    std::size_t length = 0;

    bool operator==(const FixedLength&) const = default;
};

/// Threshold taken as a nearest-rank percentile of the database lengths.
struct LengthPercentile
{
    double percent = 80.0;

    bool operator==(const LengthPercentile&) const = default;
};

using LengthThreshold = std::variant<FixedLength, LengthPercentile>;

/// "120" is a fixed length, "80%" a percentile.
inline LengthThreshold parse_threshold(std::string_view text)
{
    if (!text.empty() && text.back() == '%') {
        text.remove_suffix(1);
        double value = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || value < 0 || value > 100)
            throw ConfigError("bad percentile threshold '" + std::string(text) + "%'");
        return LengthPercentile{value};
    }
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("bad length threshold '" + std::string(text) + "'");
    return FixedLength{value};
}

inline std::string to_string(const LengthThreshold& threshold)
{
    if (const auto* fixed = std::get_if<FixedLength>(&threshold))
        return std::to_string(fixed->length);
    double p = std::get<LengthPercentile>(threshold).percent;
    auto text = std::to_string(p);
    text.erase(text.find_last_not_of('0') + 1);
    if (text.back() == '.')
        text.pop_back();
    return text + "%";
}

struct PartitionConfig
{
    LengthThreshold threshold = LengthPercentile{80.0};
    std::size_t lane_width = default_lane_width;
    std::size_t top_k = 10;
    std::size_t wavefront_workers = 1;
    std::uint64_t traceback_budget = default_traceback_budget;

    void validate() const
    {
        if (lane_width == 0)
            throw ConfigError("lane width must be at least 1");
        if (wavefront_workers == 0)
            throw ConfigError("wavefront workers must be at least 1");
    }
};

/// Half-open range of database indices.
struct IndexRange
{
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool contains(std::size_t k) const noexcept { return k >= begin && k < end; }
    bool operator==(const IndexRange&) const = default;
};

inline IndexRange whole(const SequenceDatabase& db)
{
    return {0, db.size()};
}

/// Resolves the threshold to a residue count. Percentiles use the
/// nearest-rank rule; 0% puts everything into the long set.
inline std::size_t resolve_threshold(const SequenceDatabase& db, const LengthThreshold& threshold)
{
    if (const auto* fixed = std::get_if<FixedLength>(&threshold))
        return fixed->length;
    const double p = std::get<LengthPercentile>(threshold).percent;
    if (db.empty() || p <= 0)
        return 0;
    const auto& order = db.length_order();
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(order.size())));
    rank = std::clamp<std::size_t>(rank, 1, order.size());
    return db[order[rank - 1]].length();
}

struct Partition
{
    std::size_t threshold = 0;
    std::vector<std::size_t> short_set; ///< ascending length
    std::vector<std::size_t> long_set;  ///< descending length
};

/// Splits `range` of the database by length. Uses the database's length
/// order, so no sorting happens here.
inline Partition partition_database(const SequenceDatabase& db, const PartitionConfig& config, IndexRange range)
{
    Partition out;
    out.threshold = resolve_threshold(db, config.threshold);
    for (std::size_t k : db.length_order()) {
        if (!range.contains(k))
            continue;
        if (db[k].length() <= out.threshold)
            out.short_set.push_back(k);
        else
            out.long_set.push_back(k);
    }
    std::ranges::reverse(out.long_set);
    return out;
}

inline Partition partition_database(const SequenceDatabase& db, const PartitionConfig& config)
{
    return partition_database(db, config, whole(db));
}

struct ScoredIndex
{
    std::size_t db_index = 0;
    Score score = 0;

    bool operator==(const ScoredIndex&) const = default;
};

/// Top k by score descending, ties by index ascending.
inline std::vector<ScoredIndex> rank_hits(std::span<const ScoredIndex> scores, std::size_t k)
{
    std::vector<ScoredIndex> ranked(scores.begin(), scores.end());
    k = std::min(k, ranked.size());
    auto order = [](const ScoredIndex& a, const ScoredIndex& b) {
        return a.score != b.score ? a.score > b.score : a.db_index < b.db_index;
    };
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(), order);
    ranked.resize(k);
    return ranked;
}

struct RankedHit
{
    std::size_t db_index = 0;
    Score score = 0;
    std::size_t end_i = 0;
    std::size_t end_j = 0;
    std::optional<AlignmentPath> path; ///< absent when the traceback exceeded its memory budget

    bool operator==(const RankedHit&) const = default;
};

struct SearchResult
{
    std::string query_id;
    std::vector<RankedHit> hits;
    std::uint64_t total_cells = 0;
    double elapsed_seconds = 0;
};

/// Equality of everything except the timing.
inline bool same_outcome(const SearchResult& a, const SearchResult& b)
{
    return a.query_id == b.query_id && a.hits == b.hits && a.total_cells == b.total_cells;
}

namespace detail {

[[noreturn]] inline void rethrow_for_db(const OverflowError& e, const SequenceDatabase& db, std::size_t k)
{
    throw OverflowError("database sequence " + std::to_string(k) + " ('" + db[k].id + "'): " + e.what(), k);
}

} // namespace detail

/// Scores every sequence of `range` against the query: the short set through
/// the lane-batched kernel, the long set through the wavefront kernel. Only
/// the top_k hits get a traceback.
inline SearchResult search_database(const Sequence& query, const SequenceDatabase& db, const ScoringScheme& scheme,
                                    const PartitionConfig& config, IndexRange range)
{
    config.validate();
    scheme.validate();
    if (query.length() == 0)
        throw ConfigError("query '" + query.id + "' is empty");
    if (range.end > db.size() || range.begin > range.end)
        throw ConfigError("index range exceeds the database");

    const auto start = std::chrono::steady_clock::now();
    SearchResult result;
    result.query_id = query.id;

    const Partition parts = partition_database(db, config, range);
    std::vector<ScoredIndex> scored;
    std::vector<AlignmentScore> by_offset(range.size());
    scored.reserve(range.size());

    BatchStats batch;
    std::vector<AlignmentScore> short_scores;
    try {
        short_scores = score_batch(query, db, parts.short_set, scheme, config.lane_width, &batch);
    } catch (const OverflowError& e) {
        std::size_t k = e.index() ? parts.short_set[*e.index()] : parts.short_set.front();
        detail::rethrow_for_db(e, db, k);
    }
    result.total_cells += batch.cell_updates;
    for (std::size_t pos = 0; pos < parts.short_set.size(); ++pos)
        by_offset[parts.short_set[pos] - range.begin] = short_scores[pos];

    for (std::size_t k : parts.long_set) {
        try {
            by_offset[k - range.begin] = score_wavefront(query, db[k], scheme, config.wavefront_workers);
        } catch (const OverflowError& e) {
            detail::rethrow_for_db(e, db, k);
        }
        result.total_cells += static_cast<std::uint64_t>(query.length()) * db[k].length();
    }

    for (std::size_t off = 0; off < by_offset.size(); ++off)
        scored.push_back({range.begin + off, by_offset[off].score});

    for (const auto& top : rank_hits(scored, config.top_k)) {
        const auto& s = by_offset[top.db_index - range.begin];
        RankedHit hit{top.db_index, top.score, s.end_i, s.end_j, std::nullopt};
        try {
            hit.path = align_traceback(query, db[top.db_index], scheme, config.traceback_budget).path;
        } catch (const ResourceError&) {
        }
        result.hits.push_back(std::move(hit));
    }

    result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

inline SearchResult search_database(const Sequence& query, const SequenceDatabase& db, const ScoringScheme& scheme,
                                    const PartitionConfig& config)
{
    return search_database(query, db, scheme, config, whole(db));
}

} // namespace swsearch
