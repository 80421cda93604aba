// Quantizes Exp(1) with the mean and median splits and prints the error
// next to its upper and lower envelopes.

#include <cmath>
#include <cstdio>

#include "dcq/dcq.hpp"

int main()
{
    dcq::Exponential d(1.0);
    std::printf("%3s %6s  %-8s %14s %14s %14s %10s\n", "n", "atoms", "rule", "tail_lower", "w1", "upper", "2^n w1");
    for (int n = 0; n <= 12; n += 2) {
        for (auto rule : {dcq::SplitRule::Mean, dcq::SplitRule::Median}) {
            auto m = dcq::quantize(d, rule, n);
            double w1 = dcq::quantization_error(d, rule, n).value;
            auto b = dcq::theorem48_bound(d, rule, n);
            std::printf("%3d %6zu  %-8s %14.8g %14.8g %14.8g %10.6f\n", n, m.size(),
                        std::string(dcq::to_string(rule)).c_str(), b.tail_lower, w1, b.thm48_upper,
                        std::ldexp(w1, n));
        }
    }
    auto q = dcq::quantize(d, dcq::SplitRule::Mean, 2);
    std::printf("\nmean split, n = 2:\n");
    for (const auto& a : q.atoms()) std::printf("  x = %.12f  w = %.12f\n", a.position, a.weight);
    std::printf("  mean of atoms %.15f\n", q.mean());
}
