#pragma once

// Test-only reference implementations, kept independent of the group-ring
// evaluation path they check.

#include <complex>
#include <random>
#include <vector>

#include "diracflow/oracle.hpp"
#include "diracflow/spectrum.hpp"
#include "diracflow/summation.hpp"
#include "diracflow/trace.hpp"

namespace dftest {

using namespace diracflow;

// Direct per-tau geodesic sum in canonical order: the oracle the formal
// group-ring evaluation must reproduce.
inline EvalResult direct_geometric_side(const ManifoldData& data,
                                        const TraceFn& fn, SideKind kind,
                                        double tau, int character) {
    NeumaierSum acc;
    const double m = static_cast<double>(data.torsion_order);
    for (const auto& g : data.geodesics) {
        if (g.length >= fn.support_radius) continue;
        const double v = fn.value(g.length);
        if (v == 0.0) continue;
        const double w = geodesic_weight(g);
        const double angle =
            two_pi * (tau * static_cast<double>(g.free_class) +
                      static_cast<double>(character) * g.torsion_class / m);
        double term = 0.0;
        switch (kind) {
            case SideKind::coexact:
                term = w * std::cos(g.holonomy) * v * std::cos(angle);
                break;
            case SideKind::dirac_even:
                term = w * std::cos(g.spin_holonomy) * v * std::cos(angle);
                break;
            case SideKind::dirac_odd:
                term = w * std::sin(g.spin_holonomy) * v * std::cos(angle);
                break;
            case SideKind::dirac_odd_derivative:
                term = -two_pi * w * std::sin(g.spin_holonomy) *
                       static_cast<double>(g.free_class) * v * std::sin(angle);
                break;
        }
        acc.add(term);
    }
    double vol_term = 0.0;
    if (kind == SideKind::dirac_even) {
        vol_term = data.volume / two_pi * (fn.value0 / 4.0 - fn.second_deriv0);
    } else if (kind == SideKind::coexact) {
        vol_term = data.volume / two_pi * (fn.value0 - fn.second_deriv0);
    }
    acc.add(vol_term);
    return EvalResult{acc.value(), acc.abs_sum(), acc.error_bound()};
}

// Random spin-refined spectrum with valid invariants (every record is its
// own prime); not a real manifold, only exercises the bookkeeping.
inline ManifoldData random_manifold(std::mt19937_64& rng, std::size_t count,
                                    int torsion_order, double cutoff,
                                    int max_free_class) {
    std::uniform_real_distribution<double> len(0.4, cutoff);
    std::uniform_real_distribution<double> ang(0.0, two_pi);
    std::uniform_int_distribution<int> tor(0, torsion_order - 1);
    std::uniform_int_distribution<int> fre(-max_free_class, max_free_class);

    ManifoldData data;
    data.name = "random";
    data.volume = 3.0;
    data.b1 = 1;
    data.torsion_order = torsion_order;
    data.cutoff = cutoff;
    data.checksum = "test";
    data.geodesics.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        GeodesicRecord g;
        g.length = len(rng);
        g.prime_length = g.length;
        g.spin_holonomy = ang(rng);
        g.holonomy = std::fmod(2.0 * g.spin_holonomy, two_pi);
        g.free_class = fre(rng);
        g.torsion_class = tor(rng);
        data.geodesics.push_back(g);
    }
    sort_canonical(data.geodesics);
    return data;
}

// A planted spectrum with 0, 2 or 4 prescribed transverse crossings of a
// single small trigonometric branch, plus a static background beyond the gap.
struct PlantedTruth {
    SyntheticSpectrum spectrum;
    std::vector<double> crossing_taus;   // sorted
    std::vector<int> crossing_signs;     // alternating, matched to taus
    double gap = 2.5;                    // background satisfies |s| >= gap
    double small_amp = 0.0;              // sup |s_0|
};

inline PlantedTruth planted_spectrum(std::mt19937_64& rng, int crossings) {
    PlantedTruth out;
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // background: static atoms beyond the gap (derivative exactly zero)
    for (int j = 0; j < 24; ++j) {
        const double s = out.gap + 0.05 + 0.47 * j + 0.3 * uni(rng);
        const int mult = 1 + (j % 2);
        out.spectrum.atoms.push_back(SyntheticAtom::constant(s, mult));
        out.spectrum.atoms.push_back(SyntheticAtom::constant(-s - 0.13, mult));
    }

    if (crossings == 0) {
        if (uni(rng) < 0.5) {
            // a small-ish branch bounded away from zero
            SyntheticAtom a;
            a.kind = SyntheticAtom::Kind::trig;
            a.offset = 1.3 + 0.2 * uni(rng);
            a.amp = 0.15;
            a.freq = 1;
            a.phase = two_pi * uni(rng);
            out.spectrum.atoms.push_back(a);
            out.small_amp = a.offset + a.amp;
            out.spectrum.derivative_bound = std::abs(a.amp) * two_pi + 1.0;
        } else {
            out.spectrum.derivative_bound = 1.0;
        }
        out.spectrum.name = "planted0";
        return out;
    }

    const int freq = crossings / 2;  // 2 crossings per cosine period
    // prescribe the first crossing pair inside one period
    const double period = 1.0 / freq;
    const double mid = period * (0.3 + 0.4 * uni(rng));
    const double half_sep = period * (0.08 + 0.10 * uni(rng));
    const double c = std::cos(two_pi * freq * half_sep);
    const double amp = 0.9 + 0.5 * uni(rng);

    SyntheticAtom branch;
    branch.kind = SyntheticAtom::Kind::trig;
    branch.offset = amp * c;
    branch.amp = amp;
    branch.freq = freq;
    branch.phase = -two_pi * freq * mid + M_PI;  // minimum of s_0 at tau = mid
    out.spectrum.atoms.push_back(branch);
    out.small_amp = std::abs(branch.offset) + amp;
    out.spectrum.derivative_bound = amp * two_pi * freq + 1.0;

    // zeros at mid +- half_sep modulo the period; signs - then + around each
    // minimum
    for (int p = 0; p < freq; ++p) {
        const double lo = mid - half_sep + p * period;
        const double hi = mid + half_sep + p * period;
        out.crossing_taus.push_back(std::fmod(lo + 2.0, 1.0));
        out.crossing_signs.push_back(-1);
        out.crossing_taus.push_back(std::fmod(hi + 2.0, 1.0));
        out.crossing_signs.push_back(+1);
    }
    // sort by tau, keeping the paired signs
    std::vector<std::size_t> order(out.crossing_taus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.crossing_taus[a] < out.crossing_taus[b];
    });
    std::vector<double> taus;
    std::vector<int> signs;
    for (std::size_t i : order) {
        taus.push_back(out.crossing_taus[i]);
        signs.push_back(out.crossing_signs[i]);
    }
    out.crossing_taus = taus;
    out.crossing_signs = signs;
    out.spectrum.name = "planted" + std::to_string(crossings);
    return out;
}

}  // namespace dftest
