#pragma once

// Divide-and-conquer quantization T^f(mu, n).
//
// The support is bisected recursively at the split point f of the law
// restricted to the current cell: children are {x <= f} and {x > f}. After
// n levels every leaf cell contributes one atom, placed at f of the leaf law
// and weighted by the leaf mass, giving at most 2^n atoms. A child of
// (numerically) zero mass stops the recursion for its parent, which then
// becomes a single atom at f of the surviving child.
//
// The same recursion runs on discrete measures, where a cell is an index
// range into the sorted atom array. With the mean rule this is the
// compression primitive used after each arithmetic operation.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcq/conditional.hpp"
#include "dcq/discrete_measure.hpp"
#include "dcq/distribution.hpp"
#include "dcq/error.hpp"
#include "dcq/numeric.hpp"
#include "dcq/split_rule.hpp"

namespace dcq {

inline constexpr int kMaxDepth = 30;

/// Sub-interval of the support with cached endpoint probabilities.
struct Cell {
    double lo = -kInf;
    double hi = kInf;
    TailProbabilities at_lo{0.0, 1.0};
    TailProbabilities at_hi{1.0, 0.0};
    int depth_remaining = 0;

    [[nodiscard]] double mass() const noexcept { return mass_between(at_lo, at_hi); }
    [[nodiscard]] Interval interval() const noexcept { return {lo, hi}; }
};

struct Quantization {
    DiscreteMeasure measure;
    /// Leaf partition, cells[i] is the cell of measure[i].
    std::vector<Cell> cells;
};

namespace detail {

inline void check_depth(int n)
{
    if (n < 0) throw InvalidArgument("depth must be nonnegative");
    if (n > kMaxDepth) throw DepthTooLarge("depth " + std::to_string(n) + " exceeds " + std::to_string(kMaxDepth));
}

struct PendingNode {
    Cell cell;
    bool leaf = false;
    double atom = 0.0;
};

} // namespace detail

namespace detail {

template <bool KeepCells>
Quantization quantize_impl(const Distribution& d, SplitRule rule, int n)
{
    check_depth(n);
    auto s = d.support();
    if (!std::isfinite(d.mean())) throw NonFiniteMean(d.name() + " has no finite mean");

    std::vector<PendingNode> level;
    std::vector<PendingNode> next;
    const std::size_t expected = std::size_t{1} << std::min(n, 20);
    level.reserve(expected);
    next.reserve(expected);
    level.push_back({Cell{s.lo, s.hi, {0.0, 1.0}, {1.0, 0.0}, n}, false, 0.0});

    for (int depth = n; depth > 0; --depth) {
        next.clear();
        for (const auto& node : level) {
            if (node.leaf) {
                next.push_back(node);
                continue;
            }
            const Cell& c = node.cell;
            double x = split(rule, d, c.interval(), c.at_lo, c.at_hi);
            TailProbabilities at_x = tail_probabilities(d, x);
            Cell left{c.lo, x, c.at_lo, at_x, depth - 1};
            Cell right{x, c.hi, at_x, c.at_hi, depth - 1};
            bool left_empty = !(left.mass() > kMassTolerance);
            bool right_empty = !(right.mass() > kMassTolerance);
            if (left_empty && right_empty) {
                next.push_back({c, true, x});
            } else if (left_empty || right_empty) {
                const Cell& alive = left_empty ? right : left;
                next.push_back({c, true, split(rule, d, alive.interval(), alive.at_lo, alive.at_hi)});
            } else {
                next.push_back({left, false, 0.0});
                next.push_back({right, false, 0.0});
            }
        }
        level.swap(next);
    }

    std::vector<Atom> atoms;
    std::vector<Cell> cells;
    atoms.reserve(level.size());
    if constexpr (KeepCells) cells.reserve(level.size());
    for (auto& node : level) {
        double x = node.leaf ? node.atom : split(rule, d, node.cell.interval(), node.cell.at_lo, node.cell.at_hi);
        double w = node.cell.mass();
        if (!(w > 0.0)) continue;
        if (!atoms.empty() && positions_coincide(atoms.back().position, x, DiscreteMeasure::kMergeTolerance)) {
            double total = atoms.back().weight + w;
            atoms.back().position = (atoms.back().position * atoms.back().weight + x * w) / total;
            atoms.back().weight = total;
            if constexpr (KeepCells) {
                cells.back().hi = node.cell.hi;
                cells.back().at_hi = node.cell.at_hi;
            }
            continue;
        }
        atoms.push_back({x, w});
        if constexpr (KeepCells) cells.push_back(node.cell);
    }
    return {DiscreteMeasure(std::move(atoms)), std::move(cells)};
}

} // namespace detail

/// T^f(d, n) together with its leaf partition.
inline Quantization quantize_with_cells(const Distribution& d, SplitRule rule, int n)
{
    return detail::quantize_impl<true>(d, rule, n);
}

/// T^f(d, n): at most 2^n atoms.
inline DiscreteMeasure quantize(const Distribution& d, SplitRule rule, int n)
{
    return detail::quantize_impl<false>(d, rule, n).measure;
}

namespace detail {

// Split point of the atoms [first, last) of a sorted atom array.
inline double discrete_split(SplitRule rule, std::span<const Atom> atoms, std::size_t first, std::size_t last,
                             double cell_weight)
{
    switch (rule) {
    case SplitRule::Mean: {
        CompensatedSum wx;
        for (std::size_t k = first; k < last; ++k) wx += atoms[k].weight * atoms[k].position;
        return std::clamp(wx.value() / cell_weight, atoms[first].position, atoms[last - 1].position);
    }
    case SplitRule::Median: {
        // Piecewise-linear CDF through (x_k, cumulative weight up to k).
        double target = 0.5 * cell_weight;
        CompensatedSum cum;
        cum += atoms[first].weight;
        if (target <= cum.value()) return atoms[first].position;
        for (std::size_t k = first + 1; k < last; ++k) {
            double before = cum.value();
            cum += atoms[k].weight;
            if (target <= cum.value()) {
                double frac = (target - before) / atoms[k].weight;
                double x0 = atoms[k - 1].position;
                double x1 = atoms[k].position;
                return std::clamp(x0 + frac * (x1 - x0), x0, x1);
            }
        }
        return atoms[last - 1].position;
    }
    case SplitRule::GeometricMean: {
        CompensatedSum wlog;
        for (std::size_t k = first; k < last; ++k) {
            if (atoms[k].position < 0.0) throw NegativeSupport("geometric mean split needs nonnegative atoms");
            wlog += atoms[k].weight * std::log(atoms[k].position);
        }
        return std::clamp(std::exp(wlog.value() / cell_weight), atoms[first].position, atoms[last - 1].position);
    }
    }
    throw UnsupportedRule("unknown split rule");
}

inline double range_weight(std::span<const Atom> atoms, std::size_t first, std::size_t last)
{
    CompensatedSum w;
    for (std::size_t k = first; k < last; ++k) w += atoms[k].weight;
    return w.value();
}

} // namespace detail

/// The quantizer applied to a discrete measure. Cells are index ranges into
/// the atom array, so each level costs O(#atoms) and the whole call
/// O(#atoms * n). A cell holding a single atom is emitted unchanged; with
/// the mean rule the output therefore equals m whenever n >= #atoms - 1.
inline DiscreteMeasure quantize_discrete(const DiscreteMeasure& m, SplitRule rule, int n)
{
    detail::check_depth(n);
    auto atoms = m.atoms();

    struct Range {
        std::size_t first;
        std::size_t last;
        bool leaf;
        double atom;
        double weight;
    };
    std::vector<Range> level{{0, atoms.size(), false, 0.0, 1.0}};
    level.front().weight = detail::range_weight(atoms, 0, atoms.size());

    auto child_split = [&](std::size_t first, std::size_t last, double weight) {
        return detail::discrete_split(rule, atoms, first, last, weight);
    };

    for (int depth = n; depth > 0; --depth) {
        std::vector<Range> next;
        next.reserve(level.size() * 2);
        bool active = false;
        for (const auto& r : level) {
            if (r.leaf) {
                next.push_back(r);
                continue;
            }
            if (r.last - r.first == 1) {
                next.push_back({r.first, r.last, true, atoms[r.first].position, atoms[r.first].weight});
                continue;
            }
            double x = child_split(r.first, r.last, r.weight);
            auto begin = atoms.begin() + static_cast<std::ptrdiff_t>(r.first);
            auto end = atoms.begin() + static_cast<std::ptrdiff_t>(r.last);
            auto cut = std::upper_bound(begin, end, x, [](double v, const Atom& a) { return v < a.position; });
            std::size_t mid = static_cast<std::size_t>(cut - atoms.begin());
            if (mid == r.first || mid == r.last) {
                // One side is empty: the surviving child is the whole cell.
                next.push_back({r.first, r.last, true, x, r.weight});
                continue;
            }
            double wl = detail::range_weight(atoms, r.first, mid);
            double wr = detail::range_weight(atoms, mid, r.last);
            next.push_back({r.first, mid, false, 0.0, wl});
            next.push_back({mid, r.last, false, 0.0, wr});
            active = true;
        }
        level = std::move(next);
        if (!active) break;
    }

    std::vector<Atom> out;
    out.reserve(level.size());
    for (const auto& r : level) {
        if (r.leaf) {
            out.push_back({r.atom, r.weight});
        } else if (r.last - r.first == 1) {
            out.push_back(atoms[r.first]);
        } else {
            out.push_back({child_split(r.first, r.last, r.weight), r.weight});
        }
    }
    return DiscreteMeasure(DiscreteMeasure::merge_sorted(out));
}

} // namespace dcq
