#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "diracflow/oracle.hpp"
#include "diracflow/spectrum.hpp"
#include "diracflow/trace.hpp"

namespace diracflow {

// Gamma_{H_{p,nu}}(tau, k) <= c0 + c2 nu^2 for every nu >= 1/2, tau, k:
// the quadratic closure that makes tail sums over unit windows summable.
struct GammaQuadBound {
    double c0 = 0.0;
    double c2 = 0.0;
};

// Where geometric sides come from: the spin-refined length spectrum of a
// manifold, or a planted synthetic spectrum whose "geometric side" is its
// spectral side (the oracle mode every certificate is validated against).
class SideSource {
public:
    virtual ~SideSource() = default;

    virtual EvalResult side(const TraceFn& fn, SideKind kind, double tau,
                            int character) = 0;
    // sup over (tau, k) of |d/dtau side|
    virtual double tau_lipschitz(const TraceFn& fn, SideKind kind) = 0;
    virtual GammaQuadBound window_gamma_bound(int window_power) = 0;

    virtual std::string name() const = 0;
    virtual std::string provenance() const = 0;
    virtual int torsion_order() const = 0;
    virtual int b1() const = 0;
    virtual double cutoff() const = 0;
    // bound on |s_j'(tau)| for every eigenvalue branch (2 pi C_Y on real
    // data); throws when unavailable
    virtual double eigen_deriv_bound() const = 0;
};

class GeodesicSideSource final : public SideSource {
public:
    explicit GeodesicSideSource(ManifoldData data, std::string cache_dir = {})
        : data_(std::move(data)), cache_dir_(std::move(cache_dir)) {}

    const ManifoldData& data() const { return data_; }

    EvalResult side(const TraceFn& fn, SideKind kind, double tau,
                    int character) override {
        return evaluate(cached_side(fn, kind), tau, character);
    }

    double tau_lipschitz(const TraceFn& fn, SideKind kind) override {
        return cached_side(fn, kind).tau_lipschitz();
    }

    GammaQuadBound window_gamma_bound(int window_power) override {
        auto it = window_bounds_.find(window_power);
        if (it != window_bounds_.end()) return it->second;
        const TestFunction base{window_power, 0.0, 1.0, false};  // H_{p,0}
        // |H_{p,nu}(x)| <= H_{p,0}(x) and |angular factors| <= 1, so the
        // geodesic part is dominated by the untwisted sum S_Y; the volume
        // term is vol/2pi (H(0)/4 - H''(0)) with -H'' = -s0 + nu^2 v0.
        NeumaierSum sy;
        for (const auto& g : data_.geodesics) {
            if (g.length >= base.support_radius()) continue;
            sy.add(geodesic_weight(g) * base.value(g.length));
        }
        const double v0 = base.value(0.0);
        const double s0 = base.second_deriv_at_zero();
        GammaQuadBound b;
        b.c0 = data_.volume / two_pi * (v0 / 4.0 - s0) + sy.value() +
               sy.error_bound();
        b.c2 = data_.volume / two_pi * v0;
        window_bounds_[window_power] = b;
        return b;
    }

    std::string name() const override { return data_.name; }
    std::string provenance() const override { return data_.checksum; }
    int torsion_order() const override { return data_.torsion_order; }
    int b1() const override { return data_.b1; }
    double cutoff() const override { return data_.cutoff; }

    double eigen_deriv_bound() const override {
        if (!data_.c_y_upper) {
            throw std::runtime_error(
                "no C_Y upper bound available for " + data_.name +
                " (provide c_y_upper in the spectrum file or run `oneform`)");
        }
        return two_pi * *data_.c_y_upper;
    }

    const FormalSide& cached_side(const TraceFn& fn, SideKind kind) {
        const std::string key = fn.id + "|" + side_kind_name(kind);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        if (!cache_dir_.empty()) {
            const auto path = cache_path(key);
            if (std::filesystem::exists(path)) {
                FormalSide side = formal_side_from_json(json::parse(read_file(path)));
                if (side.checksum == data_.checksum) {
                    return cache_.emplace(key, std::move(side)).first->second;
                }
            }
        }
        FormalSide side = build_formal_side(data_, fn, kind);
        if (!cache_dir_.empty()) {
            std::filesystem::create_directories(cache_dir_);
            write_file(cache_path(key), formal_side_to_json(side).dump());
        }
        return cache_.emplace(key, std::move(side)).first->second;
    }

private:
    std::string cache_path(const std::string& key) const {
        std::string safe = key;
        for (char& c : safe) {
            if (c == '|' || c == ':' || c == '/') c = '_';
        }
        return cache_dir_ + "/" + data_.checksum + "_" + safe + ".json";
    }

    ManifoldData data_;
    std::string cache_dir_;
    std::map<std::string, FormalSide> cache_;
    std::map<int, GammaQuadBound> window_bounds_;
};

class OracleSideSource final : public SideSource {
public:
    explicit OracleSideSource(SyntheticSpectrum spectrum)
        : spectrum_(std::move(spectrum)) {
        spectrum_.validate();
    }

    const SyntheticSpectrum& spectrum() const { return spectrum_; }

    EvalResult side(const TraceFn& fn, SideKind kind, double tau,
                    int /*character*/) override {
        NeumaierSum acc;
        for (const auto& a : spectrum_.atoms) {
            const double s = a.value(tau);
            double term = 0.0;
            switch (kind) {
                case SideKind::coexact:
                case SideKind::dirac_even:
                case SideKind::dirac_odd:
                    term = 0.5 * a.multiplicity * fn.kernel(s);
                    break;
                case SideKind::dirac_odd_derivative:
                    term = 0.5 * a.multiplicity * fn.kernel_deriv(s, 1) * a.deriv(tau);
                    break;
            }
            acc.add(term);
        }
        return EvalResult{acc.value(), acc.abs_sum(), acc.error_bound()};
    }

    double tau_lipschitz(const TraceFn& fn, SideKind kind) override {
        if (std::isnan(fn.kernel_lipschitz)) {
            throw std::runtime_error("no kernel Lipschitz bound for " + fn.id);
        }
        // static atoms contribute no tau variation at all
        double lip = 0.0;
        for (const auto& a : spectrum_.atoms) {
            const double d1 = a.deriv_sup();
            if (kind == SideKind::dirac_odd_derivative) {
                lip += 0.5 * a.multiplicity *
                       (fn.kernel_deriv2_bound * d1 * d1 +
                        fn.kernel_lipschitz * second_deriv_bound(a));
            } else {
                lip += 0.5 * a.multiplicity * fn.kernel_lipschitz * d1;
            }
        }
        return lip;
    }

    GammaQuadBound window_gamma_bound(int /*window_power*/) override {
        double mult_total = 0.0;
        for (const auto& a : spectrum_.atoms) mult_total += a.multiplicity;
        // kernel of H_{p,nu} is bounded by 2, so Gamma <= sum of mults
        return GammaQuadBound{mult_total, 0.0};
    }

    std::string name() const override { return spectrum_.name; }
    std::string provenance() const override { return spectrum_.checksum; }
    int torsion_order() const override { return 1; }
    int b1() const override { return 1; }
    double cutoff() const override { return 1e9; }
    double eigen_deriv_bound() const override { return spectrum_.derivative_bound; }

private:
    static double second_deriv_bound(const SyntheticAtom& a) {
        if (a.kind == SyntheticAtom::Kind::trig) {
            return std::abs(a.amp) * two_pi * two_pi * a.freq * a.freq;
        }
        double b = 0.0;
        for (std::size_t i = 2; i < a.coeffs.size(); ++i) {
            b += static_cast<double>(i) * (i - 1.0) * std::abs(a.coeffs[i]);
        }
        return b;
    }

    SyntheticSpectrum spectrum_;
};

}  // namespace diracflow
