#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace diracflow {

// sinc(t) = sin(t)/t with sinc(0) = 1, and its derivatives up to order 3.
// Near the origin the closed forms lose up to half the digits to
// cancellation (the t^-2..t^-4 terms), so below |t| = 0.35 we evaluate the
// Taylor series instead; twelve terms are exact to double precision there.
inline std::array<double, 4> sinc_derivs(double t) {
    std::array<double, 4> d{};
    const double at = std::abs(t);
    if (at < 0.35) {
        // sinc^(j)(t) = sum_k (-1)^k (2k)!/(2k-j)! t^(2k-j) / (2k+1)!
        double fact = 1.0;  // (2k+1)!
        for (int k = 0; k <= 12; ++k) {
            if (k > 0) fact *= (2.0 * k) * (2.0 * k + 1.0);
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            double falling = 1.0;  // (2k)(2k-1)...(2k-j+1)
            for (int j = 0; j <= 3; ++j) {
                if (2 * k - j >= 0) {
                    d[static_cast<std::size_t>(j)] +=
                        sign * falling * std::pow(t, 2 * k - j) / fact;
                }
                falling *= (2.0 * k - j);
            }
        }
        return d;
    }
    const double s = std::sin(t);
    const double c = std::cos(t);
    const double it = 1.0 / t;
    const double it2 = it * it;
    const double it3 = it2 * it;
    const double it4 = it2 * it2;
    d[0] = s * it;
    d[1] = c * it - s * it2;
    d[2] = -s * it - 2.0 * c * it2 + 2.0 * s * it3;
    d[3] = -c * it + 3.0 * s * it2 + 6.0 * c * it3 - 6.0 * s * it4;
    return d;
}

inline double sinc(double t) { return sinc_derivs(t)[0]; }

// d-th derivative of sinc^n, d <= 3, via the Faa di Bruno expansion of the
// power. Zero-coefficient terms are skipped so n < d poses no 0^negative
// issue at the sinc zeros.
inline double sinc_pow_deriv(int n, double t, int order) {
    if (n < 1) throw std::invalid_argument("sinc_pow_deriv: n must be >= 1");
    if (order < 0 || order > 3) {
        throw std::invalid_argument("sinc_pow_deriv: order must be in 0..3");
    }
    const auto f = sinc_derivs(t);
    const double nn = static_cast<double>(n);
    auto powf = [&](int m) { return std::pow(f[0], m); };
    switch (order) {
        case 0:
            return powf(n);
        case 1:
            return nn * powf(n - 1) * f[1];
        case 2: {
            double r = nn * powf(n - 1) * f[2];
            if (n >= 2) r += nn * (nn - 1.0) * powf(n - 2) * f[1] * f[1];
            return r;
        }
        default: {
            double r = nn * powf(n - 1) * f[3];
            if (n >= 2) r += 3.0 * nn * (nn - 1.0) * powf(n - 2) * f[1] * f[2];
            if (n >= 3) {
                r += nn * (nn - 1.0) * (nn - 2.0) * powf(n - 3) * f[1] * f[1] * f[1];
            }
            return r;
        }
    }
}

// Global sup bound for |(sinc^n)^(d)|, d <= 4, from |sinc^(j)| <= 1/(j+1)
// (the transform of (1/2)1_[-1,1] differentiates to moments of |x|^j/2).
inline double sinc_pow_global_bound(int n, int order) {
    const double nn = static_cast<double>(n);
    switch (order) {
        case 0:
            return 1.0;
        case 1:
            return nn / 2.0;
        case 2:
            return nn * (nn - 1.0) / 4.0 + nn / 3.0;
        case 3:
            return nn * (nn - 1.0) * (nn - 2.0) / 8.0 +
                   3.0 * nn * (nn - 1.0) / 6.0 + nn / 4.0;
        case 4:
            return nn * (nn - 1.0) * (nn - 2.0) * (nn - 3.0) / 16.0 +
                   6.0 * nn * (nn - 1.0) * (nn - 2.0) / 12.0 +
                   3.0 * nn * (nn - 1.0) / 9.0 +
                   4.0 * nn * (nn - 1.0) / 8.0 + nn / 5.0;
        default:
            throw std::invalid_argument("sinc_pow_global_bound: order must be in 0..4");
    }
}

// Decay envelope |(sinc^n)^(d)(t)| <= C(n,d)/t^n, valid for t >= 1, from
// |sinc| <= 1/t, |sinc'| <= 2/t, |sinc''| <= 5/t, |sinc'''| <= 16/t.
inline double sinc_pow_decay_coeff(int n, int order) {
    const double nn = static_cast<double>(n);
    switch (order) {
        case 0:
            return 1.0;
        case 1:
            return 2.0 * nn;
        case 2:
            return 4.0 * nn * (nn - 1.0) + 5.0 * nn;
        case 3:
            return 8.0 * nn * (nn - 1.0) * (nn - 2.0) +
                   30.0 * nn * (nn - 1.0) + 16.0 * nn;
        default:
            throw std::invalid_argument("sinc_pow_decay_coeff: order must be in 0..3");
    }
}

inline double sinc_pow_decay_bound(int n, int order, double t) {
    if (t < 1.0) throw std::invalid_argument("sinc_pow_decay_bound: needs t >= 1");
    return sinc_pow_decay_coeff(n, order) / std::pow(t, n);
}

// Certified extrema on an interval: dense sampling plus a first-derivative
// bound. The returned value is a rigorous one-sided bound, not just the
// sample extremum.
inline double certified_min(const std::function<double(double)>& f, double lo,
                            double hi, double deriv_bound, int samples = 20000) {
    if (!(hi > lo)) return f(lo);
    const double h = (hi - lo) / samples;
    double m = f(lo);
    for (int i = 1; i <= samples; ++i) {
        m = std::min(m, f(lo + i * h));
    }
    return m - deriv_bound * h / 2.0;
}

inline double certified_sup(const std::function<double(double)>& f, double lo,
                            double hi, double deriv_bound, int samples = 20000) {
    if (!(hi > lo)) return f(lo);
    const double h = (hi - lo) / samples;
    double m = f(lo);
    for (int i = 1; i <= samples; ++i) {
        m = std::max(m, f(lo + i * h));
    }
    return m + deriv_bound * h / 2.0;
}

}  // namespace diracflow
