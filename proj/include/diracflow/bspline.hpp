#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace diracflow {

// Cardinal B-spline B_n supported on [0,n], n-fold convolution of 1_[0,1],
// evaluated with the Cox-de Boor recursion (nonnegative coefficients, no
// cancellation, exact piecewise polynomial up to roundoff).
inline double bspline_value(int n, double u) {
    if (n < 1) throw std::invalid_argument("bspline_value: n must be >= 1");
    if (u <= 0.0 || u >= n) {
        if (n == 1) return (u >= 0.0 && u < 1.0) ? 1.0 : 0.0;
        return 0.0;
    }
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double uj = u - j;
        v[static_cast<std::size_t>(j)] = (uj >= 0.0 && uj < 1.0) ? 1.0 : 0.0;
    }
    for (int m = 2; m <= n; ++m) {
        for (int j = 0; j + m <= n; ++j) {
            const double uj = u - j;
            v[static_cast<std::size_t>(j)] =
                (uj * v[static_cast<std::size_t>(j)] +
                 (m - uj) * v[static_cast<std::size_t>(j) + 1]) /
                (m - 1.0);
        }
    }
    return v[0];
}

// d-th derivative of B_n via B_n^(d)(u) = sum_j (-1)^j C(d,j) B_{n-d}(u-j).
// Needs n > d; one-sided at the (measure zero) knots.
inline double bspline_deriv(int n, double u, int order) {
    if (order == 0) return bspline_value(n, u);
    if (order < 0 || order > 4) {
        throw std::invalid_argument("bspline_deriv: order must be in 0..4");
    }
    if (n <= order) {
        throw std::invalid_argument("bspline_deriv: need base power n > derivative order");
    }
    static const double binom[5][5] = {{1, 0, 0, 0, 0},
                                       {1, 1, 0, 0, 0},
                                       {1, 2, 1, 0, 0},
                                       {1, 3, 3, 1, 0},
                                       {1, 4, 6, 4, 1}};
    double r = 0.0;
    for (int j = 0; j <= order; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        r += sign * binom[order][j] * bspline_value(n - order, u - j);
    }
    return r;
}

// psi_n = ((1/2) 1_[-1,1])^{*n}, the paper-normalized convolution power,
// supported on [-n,n] with unit integral and transform sinc^n.
inline double conv_pow_value(int n, double x) {
    return 0.5 * bspline_value(n, 0.5 * (x + n));
}

inline double conv_pow_deriv(int n, double x, int order) {
    if (order == 0) return conv_pow_value(n, x);
    return bspline_deriv(n, 0.5 * (x + n), order) / std::pow(2.0, order + 1);
}

// (1_[-a,a])^{*m} and derivatives; scaling rule from the unit case.
inline double indicator_conv_pow(int m, double a, double x, int order = 0) {
    const double scale = std::pow(a, m - 1) * std::pow(2.0, m) / std::pow(a, order);
    return scale * conv_pow_deriv(m, x / a, order);
}

}  // namespace diracflow
