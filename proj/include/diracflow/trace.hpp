#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracflow/jsonio.hpp"
#include "diracflow/spectrum.hpp"
#include "diracflow/summation.hpp"
#include "diracflow/testfn.hpp"

namespace diracflow {

enum class SideKind { coexact, dirac_even, dirac_odd, dirac_odd_derivative };

inline const char* side_kind_name(SideKind k) {
    switch (k) {
        case SideKind::coexact: return "coexact";
        case SideKind::dirac_even: return "dirac_even";
        case SideKind::dirac_odd: return "dirac_odd";
        default: return "dirac_odd_derivative";
    }
}

inline SideKind side_kind_from_name(const std::string& s) {
    if (s == "coexact") return SideKind::coexact;
    if (s == "dirac_even") return SideKind::dirac_even;
    if (s == "dirac_odd") return SideKind::dirac_odd;
    if (s == "dirac_odd_derivative") return SideKind::dirac_odd_derivative;
    throw std::runtime_error("unknown side kind: " + s);
}

// Generic carrier for a test function with exact evaluators on both sides.
// kernel is the real spectral kernel (H-hat for even parity, -i K-hat for
// odd parity); value is the time-domain function fed to the geodesic sum.
struct TraceFn {
    std::string id;
    Parity parity = Parity::even;
    double support_radius = 0.0;
    std::function<double(double)> value;
    double value0 = 0.0;
    double second_deriv0 = 0.0;
    std::function<double(double, int)> kernel_deriv;  // order 0..2
    double kernel_lipschitz = 0.0;                    // sup |kernel'|
    double kernel_deriv2_bound = 0.0;                 // sup |kernel''|

    double kernel(double t) const { return kernel_deriv(t, 0); }
};

inline TraceFn make_trace_fn(const TestFunction& tf) {
    tf.validate();
    TraceFn fn;
    fn.id = tf.id();
    fn.parity = tf.parity();
    fn.support_radius = tf.support_radius();
    fn.value = [tf](double x) { return tf.value(x); };
    fn.value0 = tf.parity() == Parity::even ? tf.value(0.0) : 0.0;
    fn.second_deriv0 =
        tf.parity() == Parity::even ? tf.second_deriv_at_zero() : 0.0;
    fn.kernel_deriv = [tf](double t, int order) {
        return tf.kernel_deriv(t, order);
    };
    fn.kernel_lipschitz = tf.kernel_deriv_bound(1);
    fn.kernel_deriv2_bound = tf.kernel_deriv_bound(2);
    return fn;
}

// The damped combination G = H - H''/L^2 of an even test function, whose
// transform is H-hat(t) (1 - t^2/L^2). Shares the support of H.
inline TraceFn make_damped_fn(const TestFunction& h, double threshold) {
    if (h.parity() != Parity::even) {
        throw std::invalid_argument("damped combination needs an even function");
    }
    const double L2 = threshold * threshold;
    TraceFn fn;
    fn.id = h.id() + "_damped:" + fmt_real(threshold);
    fn.parity = Parity::even;
    fn.support_radius = h.support_radius();
    fn.value = [h, L2](double x) { return h.value(x) - h.deriv(x, 2) / L2; };
    fn.value0 = h.value(0.0) - h.deriv(0.0, 2) / L2;
    fn.second_deriv0 = h.deriv(0.0, 2) - h.deriv(0.0, 4) / L2;
    fn.kernel_deriv = [h, L2](double t, int order) {
        const double g0 = h.kernel_deriv(t, 0);
        const double g1 = order >= 1 ? h.kernel_deriv(t, 1) : 0.0;
        const double g2 = order >= 2 ? h.kernel_deriv(t, 2) : 0.0;
        switch (order) {
            case 0: return g0 * (1.0 - t * t / L2);
            case 1: return g1 * (1.0 - t * t / L2) - g0 * 2.0 * t / L2;
            default:
                return g2 * (1.0 - t * t / L2) - g1 * 4.0 * t / L2 - g0 * 2.0 / L2;
        }
    };
    fn.kernel_lipschitz = std::numeric_limits<double>::quiet_NaN();
    fn.kernel_deriv2_bound = std::numeric_limits<double>::quiet_NaN();
    return fn;
}

struct ClassKey {
    std::int64_t free_class = 0;
    int torsion_class = 0;
    bool operator<(const ClassKey& o) const {
        return free_class != o.free_class ? free_class < o.free_class
                                          : torsion_class < o.torsion_class;
    }
    bool operator==(const ClassKey& o) const {
        return free_class == o.free_class && torsion_class == o.torsion_class;
    }
};

struct EvalResult {
    double value = 0.0;
    double abs_sum = 0.0;
    double budget = 0.0;  // rigorous rounding allowance, unfavorable side
};

// A trace-formula geometric side as an element of the group ring over
// H_1(Y;Z) = Z x Z/m plus a tau-independent volume term. Evaluation at a
// parameter (tau, torsion character k) applies the algebra homomorphism
// sending a class (n,t) to the angle 2pi(tau n + k t / m).
struct FormalSide {
    SideKind kind = SideKind::dirac_even;
    std::map<ClassKey, double> coefficients;
    double volume_term = 0.0;
    std::string tf_id;
    double cutoff = 0.0;
    std::string checksum;
    int torsion_order = 1;
    int b1 = 1;

    std::int64_t max_abs_free() const {
        std::int64_t m = 0;
        for (const auto& [k, c] : coefficients) {
            m = std::max<std::int64_t>(m, std::llabs(k.free_class));
        }
        return m;
    }

    double coeff_abs_sum() const {
        double s = 0.0;
        for (const auto& [k, c] : coefficients) s += std::abs(c);
        return s;
    }

    // Bound on |d/dtau evaluate| over all (tau, k).
    double tau_lipschitz() const {
        double s = 0.0;
        for (const auto& [k, c] : coefficients) {
            s += std::abs(c) * static_cast<double>(std::llabs(k.free_class));
        }
        return (kind == SideKind::dirac_odd_derivative ? two_pi * two_pi
                                                       : two_pi) *
               s;
    }
};

inline double angular_factor(SideKind kind, const GeodesicRecord& g) {
    switch (kind) {
        case SideKind::coexact:
            return std::cos(g.holonomy);
        case SideKind::dirac_even:
            return std::cos(g.spin_holonomy);
        case SideKind::dirac_odd:
            return std::sin(g.spin_holonomy);
        default:
            // derivative side stores the extra factor n; the -2pi sin(angle)
            // is applied at evaluation time
            return std::sin(g.spin_holonomy) * static_cast<double>(g.free_class);
    }
}

inline FormalSide build_formal_side(const ManifoldData& data, const TraceFn& fn,
                                    SideKind kind) {
    const bool needs_even =
        kind == SideKind::coexact || kind == SideKind::dirac_even;
    if ((fn.parity == Parity::even) != needs_even) {
        throw std::runtime_error(std::string("test function parity does not match ") +
                                 side_kind_name(kind));
    }
    if (fn.support_radius > data.cutoff + 1e-9) {
        throw std::runtime_error(
            "test function support exceeds the spectrum cutoff (sum would be "
            "silently truncated)");
    }

    std::map<ClassKey, NeumaierSum> acc;
    for (const auto& g : data.geodesics) {
        if (g.length >= fn.support_radius) continue;
        const double v = fn.value(g.length);
        if (v == 0.0) continue;
        const double term = geodesic_weight(g) * angular_factor(kind, g) * v;
        acc[ClassKey{g.free_class, g.torsion_class}].add(term);
    }

    FormalSide side;
    side.kind = kind;
    for (const auto& [key, sum] : acc) side.coefficients[key] = sum.value();
    if (kind == SideKind::dirac_even) {
        side.volume_term =
            data.volume / two_pi * (fn.value0 / 4.0 - fn.second_deriv0);
    } else if (kind == SideKind::coexact) {
        side.volume_term = data.volume / two_pi * (fn.value0 - fn.second_deriv0);
    }
    side.tf_id = fn.id;
    side.cutoff = data.cutoff;
    side.checksum = data.checksum;
    side.torsion_order = data.torsion_order;
    side.b1 = data.b1;
    return side;
}

inline EvalResult evaluate(const FormalSide& side, double tau, int character) {
    NeumaierSum acc;
    const double m = static_cast<double>(side.torsion_order);
    const bool deriv_kind = side.kind == SideKind::dirac_odd_derivative;
    for (const auto& [key, c] : side.coefficients) {
        const double angle =
            two_pi * (tau * static_cast<double>(key.free_class) +
                      static_cast<double>(character) * key.torsion_class / m);
        acc.add(deriv_kind ? c * (-two_pi) * std::sin(angle)
                           : c * std::cos(angle));
    }
    acc.add(side.volume_term);
    EvalResult r;
    r.value = acc.value();
    r.abs_sum = acc.abs_sum();
    // terms carry angle arguments of size 2pi(n+1); fold their rounding into
    // the budget together with the compensated-summation bound
    const double nmax = static_cast<double>(side.max_abs_free());
    r.budget = acc.abs_sum() * std::numeric_limits<double>::epsilon() *
               (4.0 * two_pi * (nmax + 1.0) + 6.0);
    return r;
}

inline std::vector<double> evaluate_grid(const FormalSide& side,
                                         const std::vector<double>& taus,
                                         int character) {
    std::vector<double> out;
    out.reserve(taus.size());
    for (double tau : taus) out.push_back(evaluate(side, tau, character).value);
    return out;
}

// Self-test of the formally differentiated side: central difference of the
// odd side against the derivative side, both built from the same data and
// test function.
inline double derivative_consistency(const FormalSide& side_odd,
                                     const FormalSide& side_deriv, double tau,
                                     int character) {
    if (side_odd.tf_id != side_deriv.tf_id ||
        side_odd.checksum != side_deriv.checksum ||
        side_odd.cutoff != side_deriv.cutoff) {
        throw std::runtime_error("derivative consistency: mismatched provenance");
    }
    const double h = 1e-5;
    const double fd = (evaluate(side_odd, tau + h, character).value -
                       evaluate(side_odd, tau - h, character).value) /
                      (2.0 * h);
    return std::abs(fd - evaluate(side_deriv, tau, character).value);
}

inline json formal_side_to_json(const FormalSide& side) {
    json coeffs = json::array();
    for (const auto& [key, c] : side.coefficients) {
        coeffs.push_back(json{{"free", key.free_class},
                              {"torsion", key.torsion_class},
                              {"c", fmt_real(c)}});
    }
    return json{{"kind", side_kind_name(side.kind)},
                {"coefficients", std::move(coeffs)},
                {"volume_term", fmt_real(side.volume_term)},
                {"tf_id", side.tf_id},
                {"cutoff_R", fmt_real(side.cutoff)},
                {"spectrum_checksum", side.checksum},
                {"torsion_order", side.torsion_order},
                {"b1", side.b1}};
}

inline FormalSide formal_side_from_json(const json& j) {
    FormalSide side;
    side.kind = side_kind_from_name(j.at("kind").get<std::string>());
    for (const auto& e : j.at("coefficients")) {
        side.coefficients[ClassKey{e.at("free").get<std::int64_t>(),
                                   e.at("torsion").get<int>()}] =
            parse_real(e.at("c"), "coefficient");
    }
    side.volume_term = parse_real(j.at("volume_term"), "volume_term");
    side.tf_id = j.at("tf_id").get<std::string>();
    side.cutoff = parse_real(j.at("cutoff_R"), "cutoff_R");
    side.checksum = j.at("spectrum_checksum").get<std::string>();
    side.torsion_order = j.at("torsion_order").get<int>();
    side.b1 = j.at("b1").get<int>();
    return side;
}

}  // namespace diracflow
