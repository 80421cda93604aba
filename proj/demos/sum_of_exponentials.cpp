// Adds k independent Exp(1) variables with 64-atom representations,
// compressing after each addition, and compares against the exact Erlang law.

#include <cstdio>
#include <memory>
#include <vector>

#include "dcq/dcq.hpp"

int main()
{
    const int n = 6;
    auto d = std::make_shared<dcq::Exponential>(1.0);
    auto mean_split = dcq::quantize(*d, dcq::SplitRule::Mean, n);
    auto median_split = dcq::quantize(*d, dcq::SplitRule::Median, n);
    auto asympt = dcq::asymptotically_optimal_quantizer(*d, 1 << n);

    auto acc_mean = mean_split;
    auto acc_median = median_split;
    auto acc_asympt = asympt;
    std::printf("%3s %14s %14s %14s\n", "k", "mean", "median", "asympt");
    for (int k = 1; k <= 10; ++k) {
        if (k > 1) {
            acc_mean = dcq::compress(dcq::convolve(acc_mean, mean_split, dcq::ArithOp::Add), dcq::SplitRule::Mean, n);
            acc_median =
                dcq::compress(dcq::convolve(acc_median, median_split, dcq::ArithOp::Add), dcq::SplitRule::Median, n);
            acc_asympt = dcq::compress_asymptotic(dcq::convolve(acc_asympt, asympt, dcq::ArithOp::Add), 1 << n);
        }
        dcq::Erlang exact(k, 1.0);
        std::printf("%3d %14.8g %14.8g %14.8g\n", k, dcq::w1_continuous_discrete(exact, acc_mean),
                    dcq::w1_continuous_discrete(exact, acc_median), dcq::w1_continuous_discrete(exact, acc_asympt));
    }
}
