#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>

#include "diracflow/bspline.hpp"
#include "diracflow/quadrature.hpp"
#include "diracflow/sinc.hpp"

namespace diracflow {

enum class Parity { even, odd };

// The compactly supported test-function family used on the geometric side:
// convolution powers of (1/2) 1_[-1,1], optionally multiplied by 2cos(nu x)
// and/or by x, with the stretch applied to the whole product last, i.e.
// f(x) = base(x / stretch). Both sides of the Fourier pair are exact:
// the time domain is a piecewise polynomial (times trigonometric factors),
// the frequency domain is built from sinc powers and their derivatives.
struct TestFunction {
    int base_power = 6;                     // n
    std::optional<double> modulation;       // nu, factor 2cos(nu x)
    double stretch = 1.0;                   // lambda
    bool odd_multiplier = false;            // prefactor x

    Parity parity() const { return odd_multiplier ? Parity::odd : Parity::even; }

    double support_radius() const { return stretch * base_power; }

    void validate() const {
        if (base_power < 1) throw std::invalid_argument("test function: base power must be >= 1");
        if (!(stretch > 0.0)) throw std::invalid_argument("test function: stretch must be > 0");
        if (modulation && *modulation < 0.0) {
            throw std::invalid_argument("test function: modulation must be >= 0");
        }
    }

    double value(double x) const { return deriv(x, 0); }

    // d-th time-domain derivative (d <= 4, needs base_power > d for d > 0).
    double deriv(double x, int order) const {
        validate();
        const double y = x / stretch;
        if (std::abs(y) >= base_power) return 0.0;
        // u = psi_n derivatives, then Leibniz with the modulation factor and
        // the x-multiplier.
        double w[5] = {0, 0, 0, 0, 0};
        for (int d = 0; d <= order; ++d) {
            w[d] = conv_pow_deriv(base_power, y, d);
        }
        if (modulation) {
            const double nu = *modulation;
            double m[5];  // derivatives of 2cos(nu y)
            m[0] = 2.0 * std::cos(nu * y);
            m[1] = -2.0 * nu * std::sin(nu * y);
            m[2] = -nu * nu * m[0];
            m[3] = -nu * nu * m[1];
            m[4] = nu * nu * nu * nu * m[0];
            static const double binom[5][5] = {{1, 0, 0, 0, 0},
                                               {1, 1, 0, 0, 0},
                                               {1, 2, 1, 0, 0},
                                               {1, 3, 3, 1, 0},
                                               {1, 4, 6, 4, 1}};
            double prod[5] = {0, 0, 0, 0, 0};
            for (int d = 0; d <= order; ++d) {
                double s = 0.0;
                for (int j = 0; j <= d; ++j) s += binom[d][j] * w[j] * m[d - j];
                prod[d] = s;
            }
            for (int d = 0; d <= order; ++d) w[d] = prod[d];
        }
        if (odd_multiplier) {
            // (y g)^(d) = y g^(d) + d g^(d-1)
            double prod[5] = {0, 0, 0, 0, 0};
            for (int d = 0; d <= order; ++d) {
                prod[d] = y * w[d] + (d > 0 ? d * w[d - 1] : 0.0);
            }
            for (int d = 0; d <= order; ++d) w[d] = prod[d];
        }
        return w[order] / std::pow(stretch, order);
    }

    // Real spectral kernel: H-hat for even parity, -i K-hat for odd parity.
    // kernel_deriv(t, d) is its d-th frequency derivative, d <= 2.
    double kernel_deriv(double t, int order) const {
        validate();
        if (order < 0 || order > 2) {
            throw std::invalid_argument("test function: kernel derivative order must be <= 2");
        }
        const int p = odd_multiplier ? 1 : 0;
        const double u = stretch * t;
        double s;
        if (modulation) {
            const double nu = *modulation;
            s = sinc_pow_deriv(base_power, u + nu, p + order) +
                sinc_pow_deriv(base_power, u - nu, p + order);
        } else {
            s = sinc_pow_deriv(base_power, u, p + order);
        }
        return std::pow(stretch, order + 1) * s;
    }

    double kernel(double t) const { return kernel_deriv(t, 0); }

    std::complex<double> fourier(double t) const {
        const double g = kernel(t);
        return odd_multiplier ? std::complex<double>(0.0, g)
                              : std::complex<double>(g, 0.0);
    }

    std::complex<double> fourier_deriv(double t, int order) const {
        const double g = kernel_deriv(t, order);
        return odd_multiplier ? std::complex<double>(0.0, g)
                              : std::complex<double>(g, 0.0);
    }

    // H''(0), the ingredient of the volume terms. Even parity only.
    double second_deriv_at_zero() const {
        if (parity() == Parity::odd) {
            throw std::domain_error("volume term undefined for odd test functions");
        }
        return deriv(0.0, 2);
    }

    // Structural nonnegativity of the transform: even powers of sinc (and
    // sums of two of them) are pointwise >= 0.
    bool nonneg_fourier() const {
        return parity() == Parity::even && base_power % 2 == 0;
    }

    // Global sup bound on |kernel^(d)|; kernel_deriv_bound(d+1) serves as a
    // Lipschitz constant for kernel_deriv(., d) in certified grid scans.
    double kernel_deriv_bound(int order) const {
        const int p = odd_multiplier ? 1 : 0;
        const double mult = modulation ? 2.0 : 1.0;
        return mult * std::pow(stretch, order + 1) *
               sinc_pow_global_bound(base_power, p + order);
    }

    // Decay envelope |kernel^(d)(t)| <= C / (stretch |t| - nu)^n, valid once
    // that argument is >= 1; falls back to the global bound below that.
    double kernel_decay_bound(double t, int order) const {
        const int p = odd_multiplier ? 1 : 0;
        const double nu = modulation ? *modulation : 0.0;
        const double arg = stretch * std::abs(t) - nu;
        if (arg < 1.0) return kernel_deriv_bound(order);
        const double mult = modulation ? 2.0 : 1.0;
        return mult * std::pow(stretch, order + 1) *
               sinc_pow_decay_coeff(base_power, p + order) /
               std::pow(arg, base_power);
    }

    // Admissibility integral of Prop-type regularity: quadrature of
    // (|K^|^2+|K^'|^2+|K^''|^2)(1+t^2)^delta over [-T,T] plus an explicit
    // decay-envelope tail. Throws when the decay exponent cannot beat delta.
    double regularity_norm(double delta, double truncation = 40.0) const {
        validate();
        if (!(delta > 2.5)) {
            throw std::invalid_argument("regularity norm: delta must exceed 5/2");
        }
        const int n = base_power;
        if (2.0 * n - 2.0 * delta - 1.0 <= 0.0) {
            throw std::runtime_error(
                "regularity norm diverges: kernel decay t^-" + std::to_string(n) +
                " cannot beat (1+t^2)^delta");
        }
        auto integrand = [&](double t) {
            const double g0 = kernel_deriv(t, 0);
            const double g1 = kernel_deriv(t, 1);
            const double g2 = kernel_deriv(t, 2);
            return (g0 * g0 + g1 * g1 + g2 * g2) * std::pow(1.0 + t * t, delta);
        };
        const double nu = modulation ? *modulation : 0.0;
        const double T = std::max(truncation, 2.0 * (nu / stretch) + 2.0);
        const int panels = static_cast<int>(std::ceil(2.0 * T / 0.5));
        const double body = integrate_gl(integrand, -T, T, panels);
        // tail: each |kernel^(d)| <= C_d/(stretch t - nu)^n <= C_d 2^n/(stretch t)^n
        double csq = 0.0;
        for (int d = 0; d <= 2; ++d) {
            const double mult = modulation ? 2.0 : 1.0;
            const int p = odd_multiplier ? 1 : 0;
            const double c = mult * std::pow(stretch, d + 1) *
                             sinc_pow_decay_coeff(n, p + d) * std::pow(2.0, n) /
                             std::pow(stretch, n);
            csq += c * c;
        }
        const double expo = 2.0 * n - 2.0 * delta - 1.0;
        const double tail =
            2.0 * csq * std::pow(2.0, delta) * std::pow(T, -expo) / expo;
        return body + tail;
    }

    // Canonical id used by the CLI and certificates, e.g. "conv7_x",
    // "conv6_mod:3.1", "conv8_x_stretch:1.0625".
    std::string id() const {
        std::string s = "conv" + std::to_string(base_power);
        if (odd_multiplier) s += "_x";
        auto fmt = [](double v) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.15g", v);
            return std::string(buf);
        };
        if (modulation) s += "_mod:" + fmt(*modulation);
        if (stretch != 1.0) s += "_stretch:" + fmt(stretch);
        return s;
    }

    static TestFunction parse(const std::string& id) {
        if (id.rfind("conv", 0) != 0) {
            throw std::invalid_argument("bad test function id: " + id);
        }
        TestFunction tf;
        std::size_t pos = 4;
        std::size_t end = pos;
        while (end < id.size() && std::isdigit(static_cast<unsigned char>(id[end]))) ++end;
        if (end == pos) throw std::invalid_argument("bad test function id: " + id);
        tf.base_power = std::stoi(id.substr(pos, end - pos));
        tf.modulation.reset();
        tf.stretch = 1.0;
        tf.odd_multiplier = false;
        pos = end;
        while (pos < id.size()) {
            if (id[pos] != '_') throw std::invalid_argument("bad test function id: " + id);
            ++pos;
            if (id.compare(pos, 1, "x") == 0 &&
                (pos + 1 == id.size() || id[pos + 1] == '_')) {
                tf.odd_multiplier = true;
                pos += 1;
            } else if (id.compare(pos, 4, "mod:") == 0) {
                std::size_t next = id.find('_', pos);
                tf.modulation = std::stod(id.substr(pos + 4, next - pos - 4));
                pos = (next == std::string::npos) ? id.size() : next;
            } else if (id.compare(pos, 8, "stretch:") == 0) {
                std::size_t next = id.find('_', pos);
                tf.stretch = std::stod(id.substr(pos + 8, next - pos - 8));
                pos = (next == std::string::npos) ? id.size() : next;
            } else {
                throw std::invalid_argument("bad test function id: " + id);
            }
        }
        tf.validate();
        return tf;
    }
};

}  // namespace diracflow
