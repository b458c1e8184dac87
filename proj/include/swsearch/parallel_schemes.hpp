#pragma once

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include <swsearch/align_core.hpp>
#include <swsearch/error.hpp>
#include <swsearch/seqio.hpp>

namespace swsearch {

/// Cells (i, j) with i + j == d, 1 <= i <= m, 1 <= j <= n.
struct DiagonalExtent
{
    std::size_t first_i = 1;
    std::size_t last_i = 0;

    std::size_t size() const noexcept { return last_i >= first_i ? last_i - first_i + 1 : 0; }
};

constexpr DiagonalExtent anti_diagonal(std::size_t m, std::size_t n, std::size_t d) noexcept
{
    DiagonalExtent ext;
    ext.first_i = d > n + 1 ? d - n : 1;
    ext.last_i = std::min(m, d >= 1 ? d - 1 : 0);
    return ext;
}

struct WavefrontStats
{
    std::uint64_t cell_updates = 0;
    std::vector<std::size_t> diagonal_sizes;
};

namespace detail {

inline bool better_end(std::int64_t h, std::size_t i, std::size_t j, const AlignmentScore& best) noexcept
{
    if (h != best.score)
        return h > best.score;
    return h > 0 && (i < best.end_i || (i == best.end_i && j < best.end_j));
}

/// Three H diagonals and two E/F diagonals, indexed by query position i.
template <bool Checked>
class WavefrontKernel
{
public:
    WavefrontKernel(const Sequence& query, const Sequence& target, const ScoringScheme& scheme)
        : query_(query), target_(target), scheme_(scheme)
    {
        const std::size_t rows = query.length() + 1;
        for (auto& v : h_)
            v.assign(rows, 0);
        for (auto& v : e_)
            v.assign(rows, 0);
        for (auto& v : f_)
            v.assign(rows, 0);
    }

    /// Computes cells [i_lo, i_hi) of diagonal d.
    void run(std::size_t d, std::size_t i_lo, std::size_t i_hi, AlignmentScore& best)
    {
        auto& h_cur = h_[d % 3];
        const auto& h_prev = h_[(d - 1) % 3];
        const auto& h_prev2 = h_[(d - 2) % 3];
        auto& e_cur = e_[d % 2];
        const auto& e_prev = e_[(d - 1) % 2];
        auto& f_cur = f_[d % 2];
        const auto& f_prev = f_[(d - 1) % 2];
        const Score go = scheme_.gap_open;
        const Score ge = scheme_.gap_extend;

        for (std::size_t i = i_lo; i < i_hi; ++i) {
            const std::size_t j = d - i;
            CellState left, up;
            Score diag = 0;
            if (j > 1)
                left = {h_prev[i], e_prev[i], 0};
            if (i > 1)
                up = {h_prev[i - 1], 0, f_prev[i - 1]};
            if (i > 1 && j > 1)
                diag = h_prev2[i - 1];
            const Score sm = scheme_.matrix(query_.residues[i - 1], target_.residues[j - 1]);

            CellState cell;
            if constexpr (Checked) {
                std::int64_t e = std::max<std::int64_t>(std::int64_t{left.e} - ge, std::int64_t{left.h} - go);
                std::int64_t f = std::max<std::int64_t>(std::int64_t{up.f} - ge, std::int64_t{up.h} - go);
                std::int64_t h = std::int64_t{diag} + sm;
                if (h > score_max)
                    throw_overflow(i, j);
                h = std::max({h, e, f, std::int64_t{0}});
                cell = {static_cast<Score>(h), static_cast<Score>(e), static_cast<Score>(f)};
            } else {
                cell = cell_update(left, up, diag, sm, go, ge, 0).cell;
            }
            h_cur[i] = cell.h;
            e_cur[i] = cell.e;
            f_cur[i] = cell.f;
            if (better_end(cell.h, i, j, best))
                best = {cell.h, i, j};
        }
    }

private:
    const Sequence& query_;
    const Sequence& target_;
    const ScoringScheme& scheme_;
    std::vector<Score> h_[3];
    std::vector<Score> e_[2];
    std::vector<Score> f_[2];
};

template <bool Checked>
AlignmentScore run_wavefront(const Sequence& query, const Sequence& target, const ScoringScheme& scheme,
                             std::size_t workers)
{
    const std::size_t m = query.length();
    const std::size_t n = target.length();
    WavefrontKernel<Checked> kernel(query, target, scheme);

    if (workers == 1) {
        AlignmentScore best;
        for (std::size_t d = 2; d <= m + n; ++d) {
            auto ext = anti_diagonal(m, n, d);
            kernel.run(d, ext.first_i, ext.last_i + 1, best);
        }
        return best;
    }

    std::vector<AlignmentScore> bests(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::atomic<bool> failed{false};
    std::barrier<> sync(static_cast<std::ptrdiff_t>(workers));

    auto body = [&](std::size_t w) {
        for (std::size_t d = 2; d <= m + n; ++d) {
            if (!failed.load(std::memory_order_relaxed)) {
                auto ext = anti_diagonal(m, n, d);
                const std::size_t len = ext.size();
                const std::size_t lo = ext.first_i + len * w / workers;
                const std::size_t hi = ext.first_i + len * (w + 1) / workers;
                try {
                    kernel.run(d, lo, hi, bests[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
            sync.arrive_and_wait();
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w)
            pool.emplace_back(body, w);
        body(0);
    }

    for (const auto& err : errors)
        if (err)
            std::rethrow_exception(err);
    AlignmentScore best;
    for (const auto& b : bests)
        if (better_end(b.score, b.end_i, b.end_j, best))
            best = b;
    return best;
}

} // namespace detail

/// Intra-task scheme: one matrix swept by anti-diagonals, the cells of each
/// diagonal split among `workers` threads with a barrier between diagonals.
inline AlignmentScore score_wavefront(const Sequence& query, const Sequence& target, const ScoringScheme& scheme,
                                      std::size_t workers, WavefrontStats* stats = nullptr)
{
    if (workers == 0)
        throw ConfigError("wavefront needs at least one worker");
    const std::size_t m = query.length();
    const std::size_t n = target.length();
    if (m == 0 || n == 0)
        return {};
    if (stats) {
        for (std::size_t d = 2; d <= m + n; ++d) {
            auto size = anti_diagonal(m, n, d).size();
            stats->diagonal_sizes.push_back(size);
            stats->cell_updates += size;
        }
    }
    return detail::fits_32bit(m, n, scheme) ? detail::run_wavefront<false>(query, target, scheme, workers)
                                            : detail::run_wavefront<true>(query, target, scheme, workers);
}

inline constexpr std::size_t default_lane_width = 32;

struct BatchStats
{
    std::uint64_t cell_updates = 0;
    std::uint64_t lane_steps = 0; ///< batch steps, each advancing every active lane by one target residue
    std::size_t refills = 0;      ///< targets loaded into a lane
};

namespace detail {

/// Lane-major storage: one matrix column per lane, lanes interleaved so the
/// inner loop runs across lanes.
template <bool Checked, class TargetAt>
void run_lanes(const Sequence& query, std::size_t count, TargetAt&& target_at, const ScoringScheme& scheme,
               std::size_t width, std::vector<AlignmentScore>& results, BatchStats* stats)
{
    using Acc = std::conditional_t<Checked, std::int64_t, Score>;
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    const std::size_t m = query.length();
    const Acc go = scheme.gap_open;
    const Acc ge = scheme.gap_extend;

    std::vector<Score> H((m + 1) * width, 0), E((m + 1) * width, 0);
    std::vector<Score> profile(alphabet::size * width, 0);
    std::vector<Acc> diag(width), h_up(width), f(width), col_max(width);
    std::vector<std::size_t> col_arg(width);
    std::vector<std::size_t> lane_target(width, none), lane_pos(width, 0);
    std::vector<AlignmentScore> lane_best(width);
    std::size_t next = 0;
    std::size_t active = 0;

    auto refill = [&](std::size_t lane) {
        lane_target[lane] = none;
        while (next < count) {
            const std::size_t k = next++;
            if (target_at(k).length() == 0) {
                results[k] = {};
                continue;
            }
            lane_target[lane] = k;
            lane_pos[lane] = 0;
            lane_best[lane] = {};
            for (std::size_t i = 0; i <= m; ++i) {
                H[i * width + lane] = 0;
                E[i * width + lane] = 0;
            }
            ++active;
            if (stats)
                ++stats->refills;
            return;
        }
    };

    for (std::size_t lane = 0; lane < width; ++lane)
        refill(lane);

    while (active > 0) {
        for (std::size_t lane = 0; lane < width; ++lane) {
            const bool on = lane_target[lane] != none;
            const Residue r = on ? target_at(lane_target[lane]).residues[lane_pos[lane]] : Residue{0};
            for (std::size_t c = 0; c < alphabet::size; ++c)
                profile[c * width + lane] = on ? scheme.matrix(static_cast<Residue>(c), r) : 0;
            diag[lane] = 0;
            h_up[lane] = 0;
            f[lane] = 0;
            col_max[lane] = 0;
            col_arg[lane] = 0;
        }

        for (std::size_t i = 1; i <= m; ++i) {
            const Score* sm = &profile[query.residues[i - 1] * width];
            Score* h_col = &H[i * width];
            Score* e_col = &E[i * width];
            for (std::size_t lane = 0; lane < width; ++lane) {
                Acc e = std::max<Acc>(Acc{e_col[lane]} - ge, Acc{h_col[lane]} - go);
                Acc fv = std::max<Acc>(f[lane] - ge, h_up[lane] - go);
                Acc h = diag[lane] + sm[lane];
                if constexpr (Checked) {
                    if (h > score_max)
                        throw OverflowError("alignment score exceeds the 32-bit range in lane " +
                                                std::to_string(lane) + " at query position " + std::to_string(i),
                                            lane_target[lane]);
                }
                h = std::max(h, e);
                h = std::max(h, fv);
                h = std::max(h, Acc{0});
                diag[lane] = h_col[lane];
                h_col[lane] = static_cast<Score>(h);
                e_col[lane] = static_cast<Score>(e);
                f[lane] = fv;
                h_up[lane] = h;
                if (h > col_max[lane]) {
                    col_max[lane] = h;
                    col_arg[lane] = i;
                }
            }
        }

        if (stats) {
            stats->cell_updates += static_cast<std::uint64_t>(m) * active;
            ++stats->lane_steps;
        }
        for (std::size_t lane = 0; lane < width; ++lane) {
            const std::size_t k = lane_target[lane];
            if (k == none)
                continue;
            const std::size_t j = ++lane_pos[lane];
            if (better_end(col_max[lane], col_arg[lane], j, lane_best[lane]))
                lane_best[lane] = {static_cast<Score>(col_max[lane]), col_arg[lane], j};
            if (j == target_at(k).length()) {
                results[k] = lane_best[lane];
                --active;
                refill(lane);
            }
        }
    }
}

template <class TargetAt>
std::vector<AlignmentScore> score_lanes(const Sequence& query, std::size_t count, TargetAt&& target_at,
                                        const ScoringScheme& scheme, std::size_t lane_width, BatchStats* stats)
{
    if (lane_width == 0)
        throw ConfigError("lane width must be at least 1");
    std::vector<AlignmentScore> results(count);
    if (count == 0 || query.length() == 0)
        return results;
    std::size_t longest = 0;
    for (std::size_t k = 0; k < count; ++k)
        longest = std::max(longest, target_at(k).length());
    if (longest == 0)
        return results;
    const std::size_t width = std::min(lane_width, count);
    if (fits_32bit(query.length(), longest, scheme))
        run_lanes<false>(query, count, target_at, scheme, width, results, stats);
    else
        run_lanes<true>(query, count, target_at, scheme, width, results, stats);
    return results;
}

} // namespace detail

/// Inter-task scheme: up to `lane_width` targets are scored side by side,
/// each lane on its own matrix. A lane whose target ends is refilled with the
/// next unassigned target. Results come back in input order; an overflow
/// reports the offending target position through OverflowError::index().
inline std::vector<AlignmentScore> score_batch(const Sequence& query, std::span<const Sequence> targets,
                                               const ScoringScheme& scheme,
                                               std::size_t lane_width = default_lane_width,
                                               BatchStats* stats = nullptr)
{
    return detail::score_lanes(
        query, targets.size(), [&](std::size_t k) -> const Sequence& { return targets[k]; }, scheme, lane_width,
        stats);
}

/// Same as above over a subset of a database, in the order of `indices`.
inline std::vector<AlignmentScore> score_batch(const Sequence& query, const SequenceDatabase& db,
                                               std::span<const std::size_t> indices, const ScoringScheme& scheme,
                                               std::size_t lane_width = default_lane_width,
                                               BatchStats* stats = nullptr)
{
    return detail::score_lanes(
        query, indices.size(), [&](std::size_t k) -> const Sequence& { return db[indices[k]]; }, scheme,
        lane_width, stats);
}

} // namespace swsearch
