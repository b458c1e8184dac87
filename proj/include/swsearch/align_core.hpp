#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <swsearch/error.hpp>
#include <swsearch/seqio.hpp>

namespace swsearch {

using Score = std::int32_t;

/// H, E and F of one similarity-matrix cell. H never drops below zero,
/// E and F may.
struct CellState
{
    Score h = 0;
    Score e = 0;
    Score f = 0;

    bool operator==(const CellState&) const = default;
};

/// Optimal local score and the cell where it was reached. Ties resolve to
/// the smallest query index, then the smallest target index.
struct AlignmentScore
{
    Score score = 0;
    std::size_t end_i = 0;
    std::size_t end_j = 0;

    bool operator==(const AlignmentScore&) const = default;
};

enum class AlignOp : std::uint8_t
{
    Match,     ///< query residue against target residue (match or mismatch)
    QueryGap,  ///< target residue against a gap in the query
    TargetGap, ///< query residue against a gap in the target
};

/// Alignment as a list of steps starting at 1-based (start_i, start_j).
struct AlignmentPath
{
    std::size_t start_i = 0;
    std::size_t start_j = 0;
    std::vector<AlignOp> ops;

    bool operator==(const AlignmentPath&) const = default;
};

struct Alignment
{
    AlignmentScore score;
    AlignmentPath path;

    bool operator==(const Alignment&) const = default;
};

struct CellUpdate
{
    CellState cell;
    Score best = 0;
};

/// One cell of the Gotoh recurrence in the order the GPU kernels issue it:
/// two subtract/max pairs for E and F, the diagonal add, three max, then the
/// running optimum.
constexpr CellUpdate cell_update(const CellState& left, const CellState& up, Score diag_h, Score sm,
                                 Score gap_open, Score gap_extend, Score running_best) noexcept
{
    Score e1 = left.e - gap_extend;
    Score e2 = left.h - gap_open;
    Score e = std::max(e1, e2);
    Score f1 = up.f - gap_extend;
    Score f2 = up.h - gap_open;
    Score f = std::max(f1, f2);
    Score h = diag_h + sm;
    h = std::max(h, e);
    h = std::max(h, f);
    h = std::max(h, Score{0});
    return {{h, e, f}, std::max(h, running_best)};
}

constexpr CellUpdate cell_update(const CellState& left, const CellState& up, Score diag_h, Score sm,
                                 const ScoringScheme& scheme, Score running_best) noexcept
{
    return cell_update(left, up, diag_h, sm, scheme.gap_open, scheme.gap_extend, running_best);
}

namespace detail {

inline constexpr std::int64_t score_max = std::numeric_limits<Score>::max();

/// True when no cell of an m x n matrix can leave the 32-bit range, which
/// lets kernels skip per-cell overflow checks. H is bounded by
/// min(m, n) * max(SM) and E, F by -(Go + Ge) from below.
inline bool fits_32bit(std::size_t m, std::size_t n, const ScoringScheme& scheme)
{
    std::int64_t top = std::max<std::int64_t>(scheme.matrix.max_entry(), 0);
    auto shortest = static_cast<std::int64_t>(std::min(m, n));
    if (top > 0 && shortest > score_max / top)
        return false;
    return std::int64_t{scheme.gap_open} + scheme.gap_extend <= score_max;
}

[[noreturn]] inline void throw_overflow(std::size_t i, std::size_t j)
{
    throw OverflowError("alignment score exceeds the 32-bit range at cell (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
}

/// Row sweep over an (outer x inner) matrix keeping one row of H and of the
/// gap score that runs along the outer axis. With `Transposed` the outer
/// axis is the target, so storage stays O(min(m, n)).
template <bool Checked, bool Transposed>
AlignmentScore sweep(std::span<const Residue> outer, std::span<const Residue> inner, const ScoringScheme& scheme)
{
    using Acc = std::conditional_t<Checked, std::int64_t, Score>;
    const Acc go = scheme.gap_open;
    const Acc ge = scheme.gap_extend;

    std::vector<Score> h_row(inner.size() + 1, 0);
    std::vector<Score> g_row(inner.size() + 1, 0);
    std::array<Score, alphabet::size> column{};
    AlignmentScore best;

    for (std::size_t a = 1; a <= outer.size(); ++a) {
        const Residue oa = outer[a - 1];
        const Score* sm_of;
        if constexpr (Transposed) {
            for (std::size_t r = 0; r < alphabet::size; ++r)
                column[r] = scheme.matrix(static_cast<Residue>(r), oa);
            sm_of = column.data();
        } else {
            sm_of = scheme.matrix.row(oa).data();
        }

        Acc diag = 0;
        Acc h_left = 0;
        Acc g_run = 0;
        for (std::size_t b = 1; b <= inner.size(); ++b) {
            g_run = std::max<Acc>(g_run - ge, h_left - go);
            Acc g_out = std::max<Acc>(Acc{g_row[b]} - ge, Acc{h_row[b]} - go);
            Acc h = diag + sm_of[inner[b - 1]];
            if constexpr (Checked) {
                if (h > score_max) {
                    if constexpr (Transposed)
                        throw_overflow(b, a);
                    else
                        throw_overflow(a, b);
                }
            }
            h = std::max(h, g_run);
            h = std::max(h, g_out);
            h = std::max(h, Acc{0});
            diag = h_row[b];
            h_row[b] = static_cast<Score>(h);
            g_row[b] = static_cast<Score>(g_out);
            h_left = h;

            if (h >= best.score) {
                const std::size_t i = Transposed ? b : a;
                const std::size_t j = Transposed ? a : b;
                if (h > best.score || (h > 0 && i < best.end_i))
                    best = {static_cast<Score>(h), i, j};
            }
        }
    }
    return best;
}

} // namespace detail

/// Best local score in linear space. Throws OverflowError if any score would
/// leave the 32-bit range.
inline AlignmentScore score_linear(const Sequence& query, const Sequence& target, const ScoringScheme& scheme,
                                   std::uint64_t* cell_updates = nullptr)
{
    const std::size_t m = query.length();
    const std::size_t n = target.length();
    if (cell_updates)
        *cell_updates += static_cast<std::uint64_t>(m) * n;
    if (m == 0 || n == 0)
        return {};
    const bool safe = detail::fits_32bit(m, n, scheme);
    if (m <= n) {
        return safe ? detail::sweep<false, true>(target.residues, query.residues, scheme)
                    : detail::sweep<true, true>(target.residues, query.residues, scheme);
    }
    return safe ? detail::sweep<false, false>(query.residues, target.residues, scheme)
                : detail::sweep<true, false>(query.residues, target.residues, scheme);
}

/// Bytes needed to hold H, E and F for an m x n problem.
inline std::uint64_t traceback_bytes(std::size_t m, std::size_t n)
{
    auto cells = static_cast<unsigned __int128>(m + 1) * (n + 1);
    auto bytes = cells * 3 * sizeof(Score);
    if (bytes > std::numeric_limits<std::uint64_t>::max())
        return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(bytes);
}

inline constexpr std::uint64_t default_traceback_budget = std::uint64_t{1} << 30;

/// Full-matrix alignment with traceback. On ties the walk prefers the
/// diagonal, then a gap in the target, then a gap in the query; inside a gap
/// it prefers closing (opening, seen forward) over extending.
inline Alignment align_traceback(const Sequence& query, const Sequence& target, const ScoringScheme& scheme,
                                 std::uint64_t memory_budget = default_traceback_budget)
{
    const std::size_t m = query.length();
    const std::size_t n = target.length();
    if (traceback_bytes(m, n) > memory_budget)
        throw ResourceError("traceback of a " + std::to_string(m) + " x " + std::to_string(n) +
                            " matrix needs " + std::to_string(traceback_bytes(m, n)) +
                            " bytes, over the budget of " + std::to_string(memory_budget) +
                            "; use score-only mode");

    const std::size_t cols = n + 1;
    std::vector<Score> H((m + 1) * cols, 0), E((m + 1) * cols, 0), F((m + 1) * cols, 0);
    auto at = [cols](std::size_t i, std::size_t j) { return i * cols + j; };
    const std::int64_t go = scheme.gap_open;
    const std::int64_t ge = scheme.gap_extend;

    AlignmentScore best;
    for (std::size_t i = 1; i <= m; ++i) {
        const auto& row = scheme.matrix.row(query.residues[i - 1]);
        for (std::size_t j = 1; j <= n; ++j) {
            std::int64_t e = std::max<std::int64_t>(E[at(i, j - 1)] - ge, H[at(i, j - 1)] - go);
            std::int64_t f = std::max<std::int64_t>(F[at(i - 1, j)] - ge, H[at(i - 1, j)] - go);
            std::int64_t h = std::int64_t{H[at(i - 1, j - 1)]} + row[target.residues[j - 1]];
            if (h > detail::score_max)
                detail::throw_overflow(i, j);
            h = std::max({h, e, f, std::int64_t{0}});
            H[at(i, j)] = static_cast<Score>(h);
            E[at(i, j)] = static_cast<Score>(e);
            F[at(i, j)] = static_cast<Score>(f);
            if (h > best.score)
                best = {static_cast<Score>(h), i, j};
        }
    }

    Alignment result{best, {}};
    if (best.score == 0)
        return result;

    enum class State { H, E, F } state = State::H;
    std::size_t i = best.end_i;
    std::size_t j = best.end_j;
    std::vector<AlignOp> reversed;
    while (true) {
        if (state == State::H) {
            const Score h = H[at(i, j)];
            if (h == 0)
                break;
            if (i > 0 && j > 0 &&
                std::int64_t{h} == std::int64_t{H[at(i - 1, j - 1)]} +
                                       scheme.matrix(query.residues[i - 1], target.residues[j - 1])) {
                reversed.push_back(AlignOp::Match);
                --i;
                --j;
            } else if (h == F[at(i, j)]) {
                state = State::F;
            } else if (h == E[at(i, j)]) {
                state = State::E;
            } else {
                throw Error("traceback lost its way at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        } else if (state == State::F) {
            reversed.push_back(AlignOp::TargetGap);
            if (std::int64_t{F[at(i, j)]} != std::int64_t{H[at(i - 1, j)]} - go)
                state = State::F;
            else
                state = State::H;
            --i;
        } else {
            reversed.push_back(AlignOp::QueryGap);
            if (std::int64_t{E[at(i, j)]} != std::int64_t{H[at(i, j - 1)]} - go)
                state = State::E;
            else
                state = State::H;
            --j;
        }
    }
    result.path.start_i = i + 1;
    result.path.start_j = j + 1;
    result.path.ops.assign(reversed.rbegin(), reversed.rend());
    return result;
}

/// Outcome of re-scoring a path step by step.
struct PathReplay
{
    std::int64_t score = 0;
    std::int64_t min_prefix = 0; ///< lowest running score seen along the path
    std::size_t end_i = 0;
    std::size_t end_j = 0;
};

/// Re-scores `path` with the affine model: each match step adds SM, the first
/// step of a gap run costs gap_open and every further step gap_extend.
inline PathReplay replay_path(const Sequence& query, const Sequence& target, const ScoringScheme& scheme,
                              const AlignmentPath& path)
{
    PathReplay out;
    if (path.ops.empty())
        return out;
    if (path.start_i == 0 || path.start_j == 0)
        throw ConfigError("alignment path starts outside the matrix");
    std::size_t i = path.start_i - 1;
    std::size_t j = path.start_j - 1;
    std::int64_t running = 0;
    out.min_prefix = std::numeric_limits<std::int64_t>::max();
    for (std::size_t k = 0; k < path.ops.size(); ++k) {
        const AlignOp op = path.ops[k];
        const bool extends = k > 0 && path.ops[k - 1] == op;
        switch (op) {
        case AlignOp::Match:
            if (i >= query.length() || j >= target.length())
                throw ConfigError("alignment path runs past the sequence ends");
            running += scheme.matrix(query.residues[i], target.residues[j]);
            ++i;
            ++j;
            break;
        case AlignOp::TargetGap:
            if (i >= query.length())
                throw ConfigError("alignment path runs past the query end");
            running -= extends ? scheme.gap_extend : scheme.gap_open;
            ++i;
            break;
        case AlignOp::QueryGap:
            if (j >= target.length())
                throw ConfigError("alignment path runs past the target end");
            running -= extends ? scheme.gap_extend : scheme.gap_open;
            ++j;
            break;
        }
        out.min_prefix = std::min(out.min_prefix, running);
    }
    out.score = running;
    out.end_i = i;
    out.end_j = j;
    return out;
}

/// Compact CIGAR-style rendering with the target as reference: M for match
/// steps, I for query residues against a gap, D for target residues against
/// a gap.
inline std::string to_cigar(const AlignmentPath& path)
{
    std::string out;
    std::size_t k = 0;
    while (k < path.ops.size()) {
        std::size_t run = k;
        while (run < path.ops.size() && path.ops[run] == path.ops[k])
            ++run;
        out += std::to_string(run - k);
        out += path.ops[k] == AlignOp::Match ? 'M' : path.ops[k] == AlignOp::TargetGap ? 'I' : 'D';
        k = run;
    }
    return out;
}

} // namespace swsearch
