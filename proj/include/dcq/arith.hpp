#pragma once

// Arithmetic on independent discrete random variables. A binary operation
// produces the N1 * N2 product atoms, which are then compressed back to a
// fixed size before the next operation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcq/discrete_measure.hpp"
#include "dcq/distribution.hpp"
#include "dcq/error.hpp"
#include "dcq/metrics.hpp"
#include "dcq/numeric.hpp"
#include "dcq/quantizer.hpp"
#include "dcq/split_rule.hpp"

namespace dcq {

enum class ArithOp { Add, Sub, Mul };

inline std::string_view to_string(ArithOp op)
{
    switch (op) {
    case ArithOp::Add: return "add";
    case ArithOp::Sub: return "sub";
    case ArithOp::Mul: return "mul";
    }
    return "?";
}

inline ArithOp parse_arith_op(std::string_view text)
{
    if (text == "add") return ArithOp::Add;
    if (text == "sub") return ArithOp::Sub;
    if (text == "mul") return ArithOp::Mul;
    throw InvalidArgument("unknown operation '" + std::string(text) + "'");
}

inline double apply(ArithOp op, double x, double y) noexcept
{
    switch (op) {
    case ArithOp::Add: return x + y;
    case ArithOp::Sub: return x - y;
    case ArithOp::Mul: return x * y;
    }
    return x;
}

/// Hard limit on the number of product atoms materialized at once.
inline constexpr std::size_t kMaxProductAtoms = 50'000'000;

/// Law of op(X, Y) for independent X ~ m1, Y ~ m2. Equal positions are
/// merged; ties are resolved in row-major order so the result does not
/// depend on thread scheduling.
inline DiscreteMeasure convolve(const DiscreteMeasure& m1, const DiscreteMeasure& m2, ArithOp op)
{
    const std::size_t n1 = m1.size();
    const std::size_t n2 = m2.size();
    if (n2 != 0 && n1 > kMaxProductAtoms / n2) {
        throw MemoryGuard("convolution would create " + std::to_string(n1) + " x " + std::to_string(n2) + " atoms");
    }
    std::vector<Atom> prod(n1 * n2);
    auto a = m1.atoms();
    auto b = m2.atoms();
    auto row = [&](std::size_t i) {
        for (std::size_t j = 0; j < n2; ++j) prod[i * n2 + j] = {apply(op, a[i].position, b[j].position), a[i].weight * b[j].weight};
    };
    if (n1 * n2 >= (1u << 16)) {
        parallel_for(n1, row);
    } else {
        for (std::size_t i = 0; i < n1; ++i) row(i);
    }
    std::stable_sort(prod.begin(), prod.end(), [](const Atom& x, const Atom& y) { return x.position < y.position; });
    return DiscreteMeasure(DiscreteMeasure::merge_sorted(prod));
}

/// Fixed-size recompression through the discrete quantizer.
inline DiscreteMeasure compress(const DiscreteMeasure& m, SplitRule rule, int n)
{
    return quantize_discrete(m, rule, n);
}

/// Discrete analogue of the asymptotically optimal quantizer. The measure is
/// read as a piecewise-linear CDF: the segment between neighbouring atoms
/// carries half of each endpoint's weight, spread uniformly. Positions are
/// the quantiles (2i - 1) / (2N) of the normalized square root of that
/// density, and every original atom moves to its nearest position.
inline DiscreteMeasure compress_asymptotic(const DiscreteMeasure& m, int count)
{
    if (count < 1) throw InvalidArgument("atom count must be at least 1");
    auto atoms = m.atoms();
    const std::size_t k = atoms.size();
    const std::size_t n = static_cast<std::size_t>(count);
    if (k <= n) return m;

    std::vector<double> cum(k, 0.0);
    for (std::size_t i = 1; i < k; ++i) {
        double width = atoms[i].position - atoms[i - 1].position;
        double mass = 0.5 * (atoms[i - 1].weight + atoms[i].weight);
        cum[i] = cum[i - 1] + std::sqrt(mass * width);
    }
    const double total = cum[k - 1];

    std::vector<double> x(n);
    std::size_t seg = 1;
    for (std::size_t i = 0; i < n; ++i) {
        double t = total * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n));
        while (seg + 1 < k && cum[seg] < t) ++seg;
        double x0 = atoms[seg - 1].position;
        double x1 = atoms[seg].position;
        double span = cum[seg] - cum[seg - 1];
        double frac = span > 0.0 ? (t - cum[seg - 1]) / span : 0.5;
        x[i] = std::clamp(x0 + frac * (x1 - x0), x0, x1);
    }

    std::vector<Atom> out;
    out.reserve(n);
    std::size_t cell = 0;
    CompensatedSum w;
    for (std::size_t j = 0; j < k; ++j) {
        while (cell + 1 < n && atoms[j].position > 0.5 * (x[cell] + x[cell + 1])) {
            if (w.value() > 0.0) out.push_back({x[cell], w.value()});
            w = CompensatedSum{};
            ++cell;
        }
        w += atoms[j].weight;
    }
    if (w.value() > 0.0) out.push_back({x[cell], w.value()});
    return DiscreteMeasure(DiscreteMeasure::merge_sorted(out));
}

using Compressor = std::function<DiscreteMeasure(const DiscreteMeasure&)>;

/// Strict left fold: nu_1 = C(m_0 op m_1), nu_{i+1} = C(nu_i op m_{i+1}).
/// The result depends on the order of the operands.
inline DiscreteMeasure fold(std::span<const DiscreteMeasure> ms, ArithOp op, const Compressor& compressor)
{
    if (ms.size() < 2) throw InvalidArgument("fold needs at least two operands");
    DiscreteMeasure acc = compressor(convolve(ms[0], ms[1], op));
    for (std::size_t i = 2; i < ms.size(); ++i) acc = compressor(convolve(acc, ms[i], op));
    return acc;
}

inline DiscreteMeasure fold(std::span<const DiscreteMeasure> ms, ArithOp op, SplitRule rule, int n)
{
    return fold(ms, op, [&](const DiscreteMeasure& m) { return compress(m, rule, n); });
}

/// Ground truth for op applied to independent operands: a closed-form law
/// or a high-resolution discrete product.
struct Reference {
    std::string kind;
    DistributionPtr exact;
    std::optional<DiscreteMeasure> discrete;

    [[nodiscard]] double w1_to(const DiscreteMeasure& m) const
    {
        if (exact) return w1_continuous_discrete(*exact, m);
        return w1_discrete(*discrete, m);
    }
    [[nodiscard]] double mean() const { return exact ? exact->mean() : discrete->mean(); }
};

/// Builds references for growing operand lists one operand at a time.
/// Sums of Gaussians and sums of equal-rate exponentials stay in closed
/// form. Everything else is a fold of depth-grid_n quantizations with
/// merging only; when the next product would exceed `working_atoms`, the
/// accumulator is first mean-split compressed to the largest depth that
/// fits.
class ReferenceFold {
public:
    ReferenceFold(ArithOp op, int grid_n, std::size_t working_atoms = std::size_t{1} << 23)
        : op_(op), grid_n_(grid_n), working_atoms_(working_atoms)
    {
        detail::check_depth(grid_n);
    }

    void push(const DistributionPtr& d)
    {
        operands_.push_back(d);
        track_closed_form(*d, operands_.size() == 1);
        if (closed_form_ || operands_.size() == 1) return;
        if (!acc_) {
            acc_ = quantize(*operands_.front(), SplitRule::Mean, grid_n_);
            for (std::size_t i = 1; i + 1 < operands_.size(); ++i) absorb(*operands_[i]);
        }
        absorb(*d);
    }

    [[nodiscard]] int count() const noexcept { return static_cast<int>(operands_.size()); }

    [[nodiscard]] Reference current() const
    {
        if (operands_.empty()) throw InvalidArgument("reference fold is empty");
        if (operands_.size() == 1) return {"operand", operands_.front(), std::nullopt};
        if (closed_form_ && gaussian_) {
            return {"gaussian_closed_form", std::make_shared<Gaussian>(mu_sum_, std::sqrt(var_sum_)), std::nullopt};
        }
        if (closed_form_) return {"erlang_closed_form", std::make_shared<Erlang>(count(), rate_), std::nullopt};
        return {compressed_ ? "discrete_fold_compressed" : "discrete_fold", nullptr, *acc_};
    }

private:
    void absorb(const Distribution& d)
    {
        DiscreteMeasure next = quantize(d, SplitRule::Mean, grid_n_);
        if (next.size() * 2 > kMaxProductAtoms) {
            throw MemoryGuard("reference operand alone has " + std::to_string(next.size()) + " atoms");
        }
        if (acc_->size() * next.size() > working_atoms_) {
            std::size_t room = std::max<std::size_t>(1, working_atoms_ / next.size());
            int depth = 0;
            while ((std::size_t{2} << depth) <= room && depth < kMaxDepth) ++depth;
            acc_ = quantize_discrete(*acc_, SplitRule::Mean, depth);
            compressed_ = true;
        }
        acc_ = convolve(*acc_, next, op_);
    }

    void track_closed_form(const Distribution& d, bool first)
    {
        if (op_ != ArithOp::Add && !first) {
            closed_form_ = false;
            return;
        }
        if (const auto* g = dynamic_cast<const Gaussian*>(&d)) {
            if (first) gaussian_ = true;
            closed_form_ = closed_form_ && gaussian_;
            mu_sum_ += g->mu();
            var_sum_ += g->sigma() * g->sigma();
        } else if (const auto* e = dynamic_cast<const Exponential*>(&d)) {
            if (first) rate_ = e->rate();
            closed_form_ = closed_form_ && !gaussian_ && e->rate() == rate_;
        } else {
            closed_form_ = false;
        }
    }

    ArithOp op_;
    int grid_n_;
    std::size_t working_atoms_;
    std::vector<DistributionPtr> operands_;
    std::optional<DiscreteMeasure> acc_;
    bool closed_form_ = true;
    bool gaussian_ = false;
    bool compressed_ = false;
    double mu_sum_ = 0.0;
    double var_sum_ = 0.0;
    double rate_ = 0.0;
};

/// Reference law of op over the operands in list order.
inline Reference reference_pushforward(std::span<const DistributionPtr> ds, ArithOp op, int grid_n)
{
    if (ds.size() < 2) throw InvalidArgument("reference_pushforward needs at least two operands");
    ReferenceFold ref(op, grid_n);
    for (const auto& d : ds) ref.push(d);
    return ref.current();
}

} // namespace dcq
