#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace diracflow {

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
inline const std::pair<std::vector<double>, std::vector<double>>&
gauss_legendre(int n) {
    static std::vector<std::pair<std::vector<double>, std::vector<double>>> cache(
        64);
    auto& entry = cache[static_cast<std::size_t>(n)];
    if (!entry.first.empty()) return entry;
    std::vector<double> x(static_cast<std::size_t>(n)),
        w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) {
                double q0 = 1.0, q1 = t;
                for (int k = 2; k <= n; ++k) {
                    const double q2 =
                        ((2.0 * k - 1.0) * t * q1 - (k - 1.0) * q0) / k;
                    q0 = q1;
                    q1 = q2;
                }
                const double d = n * (t * q1 - q0) / (t * t - 1.0);
                x[static_cast<std::size_t>(i)] = t;
                w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * d * d);
                break;
            }
        }
    }
    entry = {std::move(x), std::move(w)};
    return entry;
}

inline double integrate_gl(const std::function<double(double)>& f, double a,
                           double b, int panels = 1, int order = 20) {
    const auto& [x, w] = gauss_legendre(order);
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += w[i] * f(mid + 0.5 * h * x[i]);
        }
        total += 0.5 * h * s;
    }
    return total;
}

}  // namespace diracflow
