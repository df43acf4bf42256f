#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracflow/bspline.hpp"
#include "diracflow/sinc.hpp"
#include "diracflow/trace.hpp"

namespace diracflow {

// Basis of the finite-dimensional test-function space behind the
// multiplicity bounds: even symmetrizations of shifted convolution squares
// of 1_[-a,a],
//   f_i(x) = T(x - d_i) + T(x + d_i),  T = (1_[-a,a])^{*2},
// with transform fhat_i(s) = 2 cos(d_i s) (2a sinc(as))^2. Pairwise products
// f_i * f~_j stay supported in [-R, R] by construction.
struct BoundBasis {
    double half_width = 1.0;      // a
    std::vector<double> shifts;   // d_i >= 0

    int size() const { return static_cast<int>(shifts.size()); }

    // a = R/(2n) with equally spaced shifts filling the support budget.
    static BoundBasis default_for(double cutoff, int n) {
        if (n < 1) throw std::invalid_argument("basis size must be >= 1");
        BoundBasis b;
        b.half_width = n >= 2 ? cutoff / (2.0 * n) : cutoff / 4.0;
        const double dmax = (cutoff - 4.0 * b.half_width) / 2.0;
        for (int i = 0; i < n; ++i) {
            b.shifts.push_back(n >= 2 ? dmax * i / (n - 1.0) : 0.0);
        }
        return b;
    }

    double max_pair_support() const {
        double dmax = 0.0;
        for (double d : shifts) dmax = std::max(dmax, d);
        return 4.0 * half_width + 2.0 * dmax;
    }

    double fhat(std::size_t i, double s) const {
        const double a = half_width;
        const double base = 2.0 * a * sinc(a * s);
        return 2.0 * std::cos(shifts[i] * s) * base * base;
    }

    double fhat_deriv(std::size_t i, double s) const {
        const double a = half_width;
        const double d = shifts[i];
        const double sc = sinc(a * s);
        const double scp = sinc_derivs(a * s)[1];
        return 4.0 * a * a *
               (-d * std::sin(d * s) * sc * sc +
                std::cos(d * s) * 2.0 * sc * scp * a);
    }

    std::vector<double> v_s(double s) const {
        std::vector<double> v(shifts.size());
        for (std::size_t i = 0; i < shifts.size(); ++i) v[i] = fhat(i, s);
        return v;
    }

    // moment bounds: |fhat_i| <= m0, |fhat_i'| <= m1_i = (d_i + 2a) m0
    double m0() const { return 2.0 * (2.0 * half_width) * (2.0 * half_width); }
    double m1(std::size_t i) const { return (shifts[i] + 2.0 * half_width) * m0(); }
    double m1_max() const {
        double m = 0.0;
        for (std::size_t i = 0; i < shifts.size(); ++i) m = std::max(m, m1(i));
        return m;
    }

    // f_i * f~_j as a full two-sided test function: four shifted copies of
    // Q = (1_[-a,a])^{*4} in time, product of the transforms in frequency.
    TraceFn pair_fn(std::size_t i, std::size_t j) const {
        const double a = half_width;
        const double di = shifts[i], dj = shifts[j];
        TraceFn fn;
        fn.id = "pair_a:" + std::to_string(a) + "_i:" + std::to_string(di) +
                "_j:" + std::to_string(dj);
        fn.parity = Parity::even;
        fn.support_radius = 4.0 * a + di + dj;
        auto q = [a](double x, int order) {
            return std::abs(x) >= 4.0 * a ? 0.0 : indicator_conv_pow(4, a, x, order);
        };
        fn.value = [q, di, dj](double x) {
            return q(x - di - dj, 0) + q(x - di + dj, 0) + q(x + di - dj, 0) +
                   q(x + di + dj, 0);
        };
        fn.value0 = fn.value(0.0);
        fn.second_deriv0 = q(-di - dj, 2) + q(-di + dj, 2) + q(di - dj, 2) +
                           q(di + dj, 2);
        const BoundBasis self = *this;
        fn.kernel_deriv = [self, i, j](double s, int order) {
            const double fi = self.fhat(i, s);
            const double fj = self.fhat(j, s);
            if (order == 0) return fi * fj;
            const double fip = self.fhat_deriv(i, s);
            const double fjp = self.fhat_deriv(j, s);
            if (order == 1) return fip * fj + fi * fjp;
            // second derivative by central differences of the exact first
            // derivative; only used in diagnostics, never in certificates
            const double h = 1e-6;
            const double p1 = self.fhat_deriv(i, s + h) * self.fhat(j, s + h) +
                              self.fhat(i, s + h) * self.fhat_deriv(j, s + h);
            const double m1 = self.fhat_deriv(i, s - h) * self.fhat(j, s - h) +
                              self.fhat(i, s - h) * self.fhat_deriv(j, s - h);
            return (p1 - m1) / (2.0 * h);
        };
        fn.kernel_lipschitz = m1(i) * m0() + m0() * m1(j);
        const double ri = shifts[i] + 2.0 * a, rj = shifts[j] + 2.0 * a;
        fn.kernel_deriv2_bound = (ri + rj) * (ri + rj) * m0() * m0();
        return fn;
    }
};

}  // namespace diracflow
