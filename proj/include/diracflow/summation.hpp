#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace diracflow {

// Neumaier-compensated accumulator. Deterministic for a fixed input order;
// all geometric-side reductions use it in canonical order so reruns are
// bit-identical.
class NeumaierSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        abs_sum_ += std::abs(x);
        ++count_;
    }

    double value() const { return sum_ + comp_; }
    double abs_sum() const { return abs_sum_; }
    std::size_t count() const { return count_; }

    // Worst-case rounding bound for the compensated sum plus the rounding of
    // the individual terms (each term assumed accurate to a few ulp).
    double error_bound() const {
        constexpr double eps = std::numeric_limits<double>::epsilon();
        return 4.0 * eps * abs_sum_;
    }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
    double abs_sum_ = 0.0;
    std::size_t count_ = 0;
};

}  // namespace diracflow
