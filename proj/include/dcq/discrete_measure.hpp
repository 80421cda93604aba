#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dcq/error.hpp"
#include "dcq/numeric.hpp"

namespace dcq {

struct Atom {
    double position = 0.0;
    double weight = 0.0;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finitely supported probability measure: atoms sorted by strictly
/// increasing position, positive weights summing to one (within 1e-12).
class DiscreteMeasure {
public:
    static constexpr double kWeightSumTolerance = 1e-12;
    static constexpr double kMergeTolerance = 1e-12;

    explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) { validate(); }

    static DiscreteMeasure delta(double x) { return DiscreteMeasure({Atom{x, 1.0}}); }

    /// Sorts atoms, drops zero weights and merges positions that coincide
    /// within the relative merge tolerance. Merged atoms sit at the
    /// weight-averaged position so the mean is unchanged.
    static DiscreteMeasure from_unsorted(std::vector<Atom> atoms, double merge_tol = kMergeTolerance)
    {
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& a, const Atom& b) { return a.position < b.position; });
        return DiscreteMeasure(merge_sorted(atoms, merge_tol));
    }

    /// Merge step of from_unsorted for input that is already sorted.
    /// Zero-weight atoms are dropped.
    static std::vector<Atom> merge_sorted(std::span<const Atom> sorted, double merge_tol = kMergeTolerance)
    {
        std::vector<Atom> out;
        out.reserve(sorted.size());
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i + 1;
            while (j < sorted.size() && positions_coincide(sorted[i].position, sorted[j].position, merge_tol)) ++j;
            if (j == i + 1) {
                if (sorted[i].weight > 0.0) out.push_back(sorted[i]);
            } else {
                CompensatedSum w;
                CompensatedSum wx;
                for (std::size_t k = i; k < j; ++k) {
                    w += sorted[k].weight;
                    wx += sorted[k].weight * sorted[k].position;
                }
                double weight = w.value();
                if (weight > 0.0) {
                    double pos = wx.value() / weight;
                    pos = std::clamp(pos, sorted[i].position, sorted[j - 1].position);
                    out.push_back({pos, weight});
                }
            }
            i = j;
        }
        return out;
    }

    [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
    [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
    [[nodiscard]] const Atom& operator[](std::size_t i) const { return atoms_[i]; }
    [[nodiscard]] double min() const noexcept { return atoms_.front().position; }
    [[nodiscard]] double max() const noexcept { return atoms_.back().position; }
    [[nodiscard]] double span() const noexcept { return max() - min(); }

    [[nodiscard]] double mean() const noexcept
    {
        CompensatedSum s;
        for (const auto& a : atoms_) s += a.weight * a.position;
        return s.value();
    }

    [[nodiscard]] double total_weight() const noexcept
    {
        CompensatedSum s;
        for (const auto& a : atoms_) s += a.weight;
        return s.value();
    }

    /// Mass of (-inf, x].
    [[nodiscard]] double cdf(double x) const noexcept
    {
        CompensatedSum s;
        for (const auto& a : atoms_) {
            if (a.position > x) break;
            s += a.weight;
        }
        return s.value();
    }

    [[nodiscard]] std::vector<double> positions() const
    {
        std::vector<double> out;
        out.reserve(atoms_.size());
        for (const auto& a : atoms_) out.push_back(a.position);
        return out;
    }

    [[nodiscard]] std::vector<double> weights() const
    {
        std::vector<double> out;
        out.reserve(atoms_.size());
        for (const auto& a : atoms_) out.push_back(a.weight);
        return out;
    }

    friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

private:
    void validate() const
    {
        if (atoms_.empty()) throw InvalidMeasure("discrete measure needs at least one atom");
        CompensatedSum total;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto& a = atoms_[i];
            if (!std::isfinite(a.position)) throw InvalidMeasure("atom position is not finite");
            if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
                std::ostringstream msg;
                msg << "atom " << i << " has non-positive weight " << a.weight;
                throw InvalidMeasure(msg.str());
            }
            if (i > 0 && !(atoms_[i - 1].position < a.position)) {
                throw InvalidMeasure("atom positions must be strictly increasing");
            }
            total += a.weight;
        }
        if (std::abs(total.value() - 1.0) > kWeightSumTolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "atom weights sum to " << total.value() << ", expected 1";
            throw InvalidMeasure(msg.str());
        }
    }

    std::vector<Atom> atoms_;
};

} // namespace dcq
