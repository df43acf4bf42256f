#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace diracflow {

// Dense symmetric matrix, row-major, for the small (n <= ~16) systems of the
// multiplicity-bound machinery.
struct SymMatrix {
    int n = 0;
    std::vector<double> a;

    explicit SymMatrix(int size = 0)
        : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    double frobenius() const {
        double s = 0.0;
        for (double v : a) s += v * v;
        return std::sqrt(s);
    }
};

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

// Cholesky factor (lower). Empty result when the matrix is not numerically
// positive definite.
inline std::optional<SymMatrix> cholesky(const SymMatrix& m) {
    SymMatrix L(m.n);
    for (int i = 0; i < m.n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m.at(i, j);
            for (int k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
            if (i == j) {
                if (!(s > 0.0)) return std::nullopt;
                L.at(i, i) = std::sqrt(s);
            } else {
                L.at(i, j) = s / L.at(j, j);
            }
        }
    }
    return L;
}

inline std::vector<double> cholesky_solve(const SymMatrix& L,
                                          const std::vector<double>& b) {
    const int n = L.n;
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) s -= L.at(i, k) * y[static_cast<std::size_t>(k)];
        y[static_cast<std::size_t>(i)] = s / L.at(i, i);
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        double s = y[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) s -= L.at(k, i) * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = s / L.at(i, i);
    }
    return x;
}

// Cyclic Jacobi eigenvalues for symmetric matrices. Returns the eigenvalues
// (ascending) and the final off-diagonal Frobenius norm; by Weyl's
// inequality every true eigenvalue is within that norm of a returned one.
inline std::pair<std::vector<double>, double> jacobi_eigenvalues(SymMatrix m) {
    const int n = m.n;
    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) s += 2.0 * m.at(i, j) * m.at(i, j);
        }
        return std::sqrt(s);
    };
    for (int sweep = 0; sweep < 64; ++sweep) {
        if (off_norm() < 1e-14 * (1.0 + m.frobenius())) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = m.at(i, p);
                    const double aiq = m.at(i, q);
                    m.at(i, p) = c * aip - s * aiq;
                    m.at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = m.at(p, i);
                    const double aqi = m.at(q, i);
                    m.at(p, i) = c * api - s * aqi;
                    m.at(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> eigs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eigs[static_cast<std::size_t>(i)] = m.at(i, i);
    std::sort(eigs.begin(), eigs.end());
    return {eigs, off_norm()};
}

// Gaussian elimination with partial pivoting on a general square system;
// used by the independent KKT route in tests and the hyperboloid solves.
inline std::optional<std::vector<double>> gauss_solve(std::vector<std::vector<double>> A,
                                                      std::vector<double> b) {
    const std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        }
        if (A[piv][col] == 0.0) return std::nullopt;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
        if (A[i][i] == 0.0) return std::nullopt;
        x[i] = s / A[i][i];
    }
    return x;
}

}  // namespace diracflow
