#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracflow/basis.hpp"
#include "diracflow/certificate.hpp"
#include "diracflow/linalg.hpp"
#include "diracflow/sidesource.hpp"

namespace diracflow {

struct SpincStructure {
    int character = 0;   // k, pairing with torsion classes via e^{2pi i k t/m}
    int torsion_order = 1;

    bool self_conjugate() const { return (2 * character) % torsion_order == 0; }
    int conjugate() const { return (torsion_order - character) % torsion_order; }
};

// "Basis/cutoff rejected": the evaluated matrix failed to be certifiably
// positive definite.
struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The formal n x n matrix of dirac_even (or coexact) geometric sides at the
// pairwise products of the basis. Entries evaluate at any (tau, k); for the
// coexact kind the (b1-1)/2 fhat_i(0) fhat_j(0) spectral correction is moved
// to the geometric side so the Gram interpretation stays exact.
struct FormalMatrix {
    BoundBasis basis;
    SideKind kind = SideKind::dirac_even;
    int n = 0;
    std::vector<std::function<EvalResult(double, int)>> entries;  // n*n
    std::vector<double> entry_lipschitz;                          // n*n
    double lipschitz_frobenius = 0.0;
    std::string source_name;
    std::string provenance;
    double cutoff = 0.0;

    const std::function<EvalResult(double, int)>& entry(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * n + j];
    }
};

// The matrix keeps a reference to the source; it must not outlive it.
inline FormalMatrix build_A(SideSource& source, const BoundBasis& basis,
                            SideKind kind = SideKind::dirac_even) {
    if (kind != SideKind::dirac_even && kind != SideKind::coexact) {
        throw std::invalid_argument("A-matrix kind must be dirac_even or coexact");
    }
    if (basis.max_pair_support() > source.cutoff() + 1e-9) {
        throw std::runtime_error(
            "basis support exceeds the spectrum cutoff: pair products reach " +
            std::to_string(basis.max_pair_support()));
    }
    FormalMatrix M;
    M.basis = basis;
    M.kind = kind;
    M.n = basis.size();
    M.source_name = source.name();
    M.provenance = source.provenance();
    M.cutoff = source.cutoff();
    M.entries.resize(static_cast<std::size_t>(M.n) * M.n);
    M.entry_lipschitz.assign(static_cast<std::size_t>(M.n) * M.n, 0.0);
    const double b1_corr = (source.b1() - 1) / 2.0;
    double fro = 0.0;
    for (int i = 0; i < M.n; ++i) {
        for (int j = i; j < M.n; ++j) {
            const TraceFn fn = basis.pair_fn(static_cast<std::size_t>(i),
                                             static_cast<std::size_t>(j));
            const double corr =
                kind == SideKind::coexact
                    ? b1_corr * basis.fhat(static_cast<std::size_t>(i), 0.0) *
                          basis.fhat(static_cast<std::size_t>(j), 0.0)
                    : 0.0;
            SideSource* src = &source;
            auto entry = [src, fn, kind, corr](double tau, int k) {
                EvalResult r = src->side(fn, kind, tau, k);
                r.value -= corr;
                return r;
            };
            const double lip = source.tau_lipschitz(fn, kind);
            M.entries[static_cast<std::size_t>(i) * M.n + j] = entry;
            M.entries[static_cast<std::size_t>(j) * M.n + i] = entry;
            M.entry_lipschitz[static_cast<std::size_t>(i) * M.n + j] = lip;
            M.entry_lipschitz[static_cast<std::size_t>(j) * M.n + i] = lip;
            fro += (i == j ? 1.0 : 2.0) * lip * lip;
        }
    }
    M.lipschitz_frobenius = std::sqrt(fro);
    return M;
}

struct EvaluatedA {
    SymMatrix A{0};
    double budget_fro = 0.0;
};

inline EvaluatedA evaluate_A(const FormalMatrix& M, double tau, int character) {
    EvaluatedA out;
    out.A = SymMatrix(M.n);
    double b = 0.0;
    for (int i = 0; i < M.n; ++i) {
        for (int j = i; j < M.n; ++j) {
            const EvalResult r = M.entry(i, j)(tau, character);
            out.A.at(i, j) = r.value;
            out.A.at(j, i) = r.value;
            b += (i == j ? 1.0 : 2.0) * r.budget * r.budget;
        }
    }
    out.budget_fro = std::sqrt(b);
    return out;
}

// Certified multiplicity bound J_s = 2 / <v_s, A^{-1} v_s> evaluated through
// a Cholesky solve; `upper` majorizes the true J against the recorded
// rounding budgets, so `upper` >= multiplicity of s is the usable guarantee.
struct JBound {
    double center = 0.0;
    double upper = 0.0;
    double lower = 0.0;
    double q = 0.0;       // <v, A^{-1} v>
    double q_slack = 0.0;
    bool infinite = false;
};

inline JBound j_from_chol(const FormalMatrix& M, const EvaluatedA& eA,
                          const SymMatrix& L, double s) {
    const std::vector<double> v = M.basis.v_s(s);
    JBound out;
    if (norm2(v) < 1e-12 * M.basis.m0()) {
        out.infinite = true;
        out.center = out.upper = out.lower =
            std::numeric_limits<double>::infinity();
        return out;
    }
    const std::vector<double> w = cholesky_solve(L, v);
    out.q = dot(v, w);
    if (!(out.q > 0.0)) {
        throw NotPositiveDefinite("quadratic form is not positive at s=" +
                                  std::to_string(s));
    }
    out.q_slack = 1.5 * eA.budget_fro * dot(w, w) +
                  64.0 * std::numeric_limits<double>::epsilon() * M.n * out.q;
    out.center = 2.0 / out.q;
    out.upper = out.q > out.q_slack
                    ? 2.0 / (out.q - out.q_slack)
                    : std::numeric_limits<double>::infinity();
    out.lower = 2.0 / (out.q + out.q_slack);
    return out;
}

inline JBound j_query(const FormalMatrix& M, double tau, int character, double s) {
    const EvaluatedA eA = evaluate_A(M, tau, character);
    const auto L = cholesky(eA.A);
    if (!L) {
        throw NotPositiveDefinite("A(tau) is not positive definite at tau=" +
                                  std::to_string(tau));
    }
    return j_from_chol(M, eA, *L, s);
}

// ---------------------------------------------------------------------------
// Locus of potential small eigenvalues: adaptive scan of J_0 over the circle.

struct LocusResult {
    std::vector<std::pair<double, double>> intervals;
    std::vector<double> grid;
    std::vector<double> j_values;  // certified upper values at the grid
    Certificate certificate;
};

// Adaptive bisection until J_0 (clipped above at threshold + 2, where only
// the detection of threshold crossings matters) moves less than 0.05 between
// neighbours; intervals of {J >= threshold} are padded one local step.
inline LocusResult small_eig_locus(const FormalMatrix& M, int character,
                                   int initial_steps = 256,
                                   double threshold = 1.0,
                                   int max_depth = 24) {
    const double clip = threshold + 2.0;
    auto j_at = [&](double tau) {
        return j_query(M, tau, character, 0.0).upper;
    };
    std::vector<double> grid;
    std::vector<double> vals;
    for (int i = 0; i <= initial_steps; ++i) {
        const double tau = static_cast<double>(i) / initial_steps;
        grid.push_back(tau);
        vals.push_back(j_at(tau));
    }
    auto clipped = [&](double v) { return std::min(v, clip); };
    for (int depth = 0; depth < max_depth; ++depth) {
        std::vector<double> ngrid, nvals;
        bool refined = false;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            ngrid.push_back(grid[i]);
            nvals.push_back(vals[i]);
            if (i + 1 < grid.size() &&
                std::abs(clipped(vals[i + 1]) - clipped(vals[i])) >= 0.045) {
                const double mid = 0.5 * (grid[i] + grid[i + 1]);
                ngrid.push_back(mid);
                nvals.push_back(j_at(mid));
                refined = true;
            }
        }
        grid.swap(ngrid);
        vals.swap(nvals);
        if (!refined) break;
        if (depth == max_depth - 1) {
            throw std::runtime_error(
                "small_eig_locus: refine grid (modulus of continuity not "
                "certified at maximal depth)");
        }
    }

    LocusResult out;
    out.grid = grid;
    out.j_values = vals;
    double max_step_variation = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        max_step_variation = std::max(
            max_step_variation, std::abs(clipped(vals[i + 1]) - clipped(vals[i])));
    }

    // maximal runs above threshold, padded one local grid step outward
    std::size_t i = 0;
    while (i < grid.size()) {
        if (vals[i] >= threshold) {
            std::size_t j = i;
            while (j + 1 < grid.size() && vals[j + 1] >= threshold) ++j;
            const double lo = i > 0 ? grid[i - 1] : 0.0;
            const double hi = j + 1 < grid.size() ? grid[j + 1] : 1.0;
            if (!out.intervals.empty() && lo <= out.intervals.back().second) {
                out.intervals.back().second = hi;
            } else {
                out.intervals.emplace_back(lo, hi);
            }
            i = j + 1;
        } else {
            ++i;
        }
    }

    Certificate& cert = out.certificate;
    cert.statement = "locus";
    cert.intervals = out.intervals;
    cert.add_constant("threshold", threshold);
    cert.add_constant("grid_points", static_cast<double>(grid.size()));
    cert.add_constant("max_step_variation", max_step_variation);
    cert.require("grid modulus of continuity < 0.05", max_step_variation, 0.05);
    cert.provenance = json{{"source", M.source_name},
                           {"checksum", M.provenance},
                           {"character", character},
                           {"basis_size", M.n},
                           {"cutoff_R", fmt_real(M.cutoff)}};
    cert.settle();
    return out;
}

// ---------------------------------------------------------------------------
// Certified exclusion: no eigenvalue absolute values in [s_lo, s_hi] for any
// tau in [tau_lo, tau_hi]. Grid scan of the quadratic form with rigorous
// derivative margins in both variables.

struct ExclusionResult {
    bool certified = false;
    double worst_margin = 0.0;  // min over nodes of (q_cert - 2/threshold)
    Certificate certificate;
};

namespace detail {

struct ExclusionScan {
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_no_grid_margin = std::numeric_limits<double>::infinity();
    double lambda_min = std::numeric_limits<double>::infinity();
    bool pd_refinable = false;  // PD failed only through the grid margin
};

inline ExclusionScan exclusion_scan(const FormalMatrix& M, int character,
                                    double tau_lo, double tau_hi, double s_lo,
                                    double s_hi, int nt, int ns, double need) {
    const double htau = nt > 0 ? (tau_hi - tau_lo) / nt : 0.0;
    const double hs = (s_hi - s_lo) / ns;
    const double vmax = std::sqrt(static_cast<double>(M.n)) * M.basis.m0();
    const double v1max = std::sqrt(static_cast<double>(M.n)) * M.basis.m1_max();
    ExclusionScan out;
    for (int it = 0; it <= nt; ++it) {
        const double tau = tau_lo + it * htau;
        const EvaluatedA eA = evaluate_A(M, tau, character);
        const auto L = cholesky(eA.A);
        if (!L) {
            throw NotPositiveDefinite("A(tau) not positive definite at tau=" +
                                      std::to_string(tau));
        }
        auto [eigs, off] = jacobi_eigenvalues(eA.A);
        const double lam_raw = eigs.front() - off - eA.budget_fro;
        const double lam = lam_raw - M.lipschitz_frobenius * htau / 2.0;
        if (!(lam > 0.0)) {
            if (lam_raw > 0.0) {
                out.pd_refinable = true;
                return out;
            }
            throw NotPositiveDefinite(
                "cannot certify positive definiteness of A at tau=" +
                std::to_string(tau));
        }
        out.lambda_min = std::min(out.lambda_min, lam);
        const double Lqs = 2.0 * vmax * v1max / lam;
        const double Lqtau = (vmax / lam) * (vmax / lam) * M.lipschitz_frobenius;
        for (int is = 0; is <= ns; ++is) {
            const double s = s_lo + is * hs;
            const JBound jb = j_from_chol(M, eA, *L, s);
            if (jb.infinite) {
                out.worst_margin = -std::numeric_limits<double>::infinity();
                out.worst_no_grid_margin = out.worst_margin;
                continue;
            }
            const double base = jb.q - jb.q_slack - need;
            out.worst_no_grid_margin = std::min(out.worst_no_grid_margin, base);
            out.worst_margin = std::min(
                out.worst_margin, base - Lqs * hs / 2.0 - Lqtau * htau / 2.0);
        }
    }
    return out;
}

}  // namespace detail

// Grid scan with rigorous derivative margins in both variables; refines the
// grids while the failure is attributable to the margins alone.
inline ExclusionResult certified_exclusion(const FormalMatrix& M, int character,
                                           double tau_lo, double tau_hi,
                                           double s_lo, double s_hi,
                                           int tau_steps = 24, int s_steps = 240,
                                           double threshold = 1.0,
                                           int max_refine = 6) {
    int nt = tau_lo < tau_hi ? std::max(1, tau_steps) : 0;
    int ns = std::max(1, s_steps);
    const double need = 2.0 / threshold;
    detail::ExclusionScan scan;
    for (int attempt = 0; attempt <= max_refine; ++attempt) {
        scan = detail::exclusion_scan(M, character, tau_lo, tau_hi, s_lo, s_hi,
                                      nt, ns, need);
        const bool refinable =
            scan.pd_refinable ||
            (scan.worst_margin <= 0.0 && scan.worst_no_grid_margin > 0.0);
        if (!refinable || attempt == max_refine) break;
        if (nt > 0) nt *= 2;
        ns *= 2;
    }
    if (scan.pd_refinable) {
        throw NotPositiveDefinite(
            "cannot certify positive definiteness across the tau interval "
            "after grid refinement");
    }

    ExclusionResult out;
    out.worst_margin = scan.worst_margin;
    Certificate& cert = out.certificate;
    cert.statement = "exclusion";
    cert.intervals = {{tau_lo, tau_hi}};
    cert.add_constant("s_lo", s_lo);
    cert.add_constant("s_hi", s_hi);
    cert.add_constant("threshold", threshold);
    cert.add_constant("tau_steps", nt);
    cert.add_constant("s_steps", ns);
    cert.add_constant("lambda_min_certified", scan.lambda_min);
    cert.add_constant("worst_margin", scan.worst_margin);
    cert.require("q certified above exclusion level", need,
                 need + scan.worst_margin, true);
    cert.provenance = json{{"source", M.source_name},
                           {"checksum", M.provenance},
                           {"character", character},
                           {"basis_size", M.n}};
    cert.settle();
    out.certified = cert.verdict;
    return out;
}

// ---------------------------------------------------------------------------
// Counting certificates from single even test functions.

struct CountBound {
    int count = 0;
    Certificate certificate;
};

// #\{ |s_j(tau)| <= L \} <= floor( 2 Gamma_H / min_{[0,L]} H-hat ), demanding
// a certified-nonnegative transform. The evaluation budget enters the
// numerator on the unfavorable side.
inline CountBound count_upper(SideSource& source, double tau, int character,
                              double threshold, const TestFunction& h) {
    if (!h.nonneg_fourier()) {
        throw std::runtime_error(
            "count_upper: transform of " + h.id() +
            " is not certified nonnegative (need even convolution power)");
    }
    const double lip = h.kernel_deriv_bound(1);
    const double mn = certified_min([&](double t) { return h.kernel(t); }, 0.0,
                                    threshold, lip);
    if (!(mn > 0.0)) {
        throw std::runtime_error(
            "count_upper: threshold outside the certified-minimum range of " +
            h.id());
    }
    const TraceFn fn = make_trace_fn(h);
    const EvalResult gamma = source.side(fn, SideKind::dirac_even, tau, character);
    const double numerator = 2.0 * (gamma.value + gamma.budget);
    const int bound = std::max(0, static_cast<int>(std::floor(numerator / mn)));

    CountBound out;
    out.count = bound;
    Certificate& cert = out.certificate;
    cert.statement = "count_upper";
    cert.intervals = {{tau, tau}};
    cert.add_constant("L", threshold);
    cert.add_constant("gamma", gamma.value);
    cert.add_constant("gamma_budget", gamma.budget);
    cert.add_constant("kernel_min", mn);
    cert.add_constant("count", bound);
    cert.require("floor bound consistent", numerator / mn,
                 static_cast<double>(bound + 1));
    cert.provenance = json{{"source", source.name()},
                           {"checksum", source.provenance()},
                           {"tf", h.id()},
                           {"character", character},
                           {"tau", fmt_real(tau)}};
    cert.settle();
    return out;
}

struct ExistenceBound {
    bool exists = false;
    Certificate certificate;
};

// Damped-combination lower bound: with G = H - H''/L^2, a positive geometric
// side forces an eigenvalue in [-L, L].
inline ExistenceBound count_lower(SideSource& source, double tau, int character,
                                  double threshold, const TestFunction& h) {
    if (!h.nonneg_fourier()) {
        throw std::runtime_error(
            "count_lower: transform of " + h.id() +
            " is not certified nonnegative (need even convolution power)");
    }
    const TraceFn g = make_damped_fn(h, threshold);
    const EvalResult gamma = source.side(g, SideKind::dirac_even, tau, character);

    ExistenceBound out;
    Certificate& cert = out.certificate;
    cert.statement = "count_lower";
    cert.intervals = {{tau, tau}};
    cert.add_constant("L", threshold);
    cert.add_constant("gamma_damped", gamma.value);
    cert.add_constant("gamma_budget", gamma.budget);
    cert.require("damped side positive beyond budget", gamma.budget,
                 gamma.value);
    cert.provenance = json{{"source", source.name()},
                           {"checksum", source.provenance()},
                           {"tf", g.id},
                           {"character", character},
                           {"tau", fmt_real(tau)}};
    cert.settle();
    out.exists = cert.verdict;
    return out;
}

// Local Weyl bound on a window |s| in [center - hw, center + hw], uniform
// over a tau interval. The certified minimum of sinc^power on [0, hw]
// (0.777-style constants) scales the evaluated geometric side.
inline CountBound weyl_window_bound(SideSource& source, double tau_lo,
                                    double tau_hi, int character, double center,
                                    double half_width = 0.5, int power = 6,
                                    int tau_steps = 8) {
    if (!(center >= 0.5)) {
        throw std::invalid_argument("weyl_window_bound: window center must be >= 1/2");
    }
    const TestFunction h{power, center, 1.0, false};
    if (!h.nonneg_fourier()) {
        throw std::runtime_error("weyl_window_bound: power must be even");
    }
    const double lip = sinc_pow_global_bound(power, 1);
    const double mn =
        certified_min([&](double t) { return sinc_pow_deriv(power, t, 0); }, 0.0,
                      half_width, lip);
    if (!(mn > 0.0)) {
        throw std::runtime_error("weyl_window_bound: window too wide to certify");
    }
    const TraceFn fn = make_trace_fn(h);
    double sup_gamma = -std::numeric_limits<double>::infinity();
    const int nt = tau_lo < tau_hi ? tau_steps : 0;
    const double htau = nt > 0 ? (tau_hi - tau_lo) / nt : 0.0;
    const double lip_tau = nt > 0 ? source.tau_lipschitz(fn, SideKind::dirac_even) : 0.0;
    for (int it = 0; it <= nt; ++it) {
        const EvalResult r =
            source.side(fn, SideKind::dirac_even, tau_lo + it * htau, character);
        sup_gamma = std::max(sup_gamma, r.value + r.budget);
    }
    sup_gamma += lip_tau * htau / 2.0;
    const int bound =
        std::max(0, static_cast<int>(std::floor(2.0 * sup_gamma / mn)));

    CountBound out;
    out.count = bound;
    Certificate& cert = out.certificate;
    cert.statement = "window_bound";
    cert.intervals = {{tau_lo, tau_hi}};
    cert.add_constant("window_center", center);
    cert.add_constant("window_half_width", half_width);
    cert.add_constant("kernel_min", mn);
    cert.add_constant("gamma_sup", sup_gamma);
    cert.add_constant("count", bound);
    cert.require("floor bound consistent", 2.0 * sup_gamma / mn,
                 static_cast<double>(bound + 1));
    cert.provenance = json{{"source", source.name()},
                           {"checksum", source.provenance()},
                           {"tf", h.id()},
                           {"character", character}};
    cert.settle();
    return out;
}

// ---------------------------------------------------------------------------
// Tail machinery: sum of envelope maxima times window counts, plus medium
// windows counted individually, plus an analytic remainder.

struct MediumWindow {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;  // certified count of eigenvalues in the window
};

struct TailBound {
    double total = 0.0;
    Certificate certificate;
};

// Sum over |s_i| >= gap (plus certified medium windows below the gap) of
// |kernel^(order)(s_i)|, valid for every tau in [tau_lo, tau_hi]. `gap_cert`
// must be the verdict-true exclusion certificate establishing the gap.
inline TailBound tail_bound(SideSource& source, double tau_lo, double tau_hi,
                            int character, double gap,
                            const TestFunction& envelope_tf, int envelope_order,
                            const Certificate* gap_cert,
                            const std::vector<MediumWindow>& mediums = {},
                            int window_count = 40, int window_power = 6) {
    if (gap_cert == nullptr || !gap_cert->verdict ||
        gap_cert->statement != "exclusion") {
        throw std::runtime_error("tail_bound: the spectral gap is not certified");
    }
    Certificate cert;
    cert.statement = "tail_bound";
    cert.intervals = {{tau_lo, tau_hi}};

    // local Lipschitz constants from the decay envelope keep the sampling
    // margins far below the window suprema themselves
    auto env_lip_at = [&](double lo) {
        return std::min(envelope_tf.kernel_deriv_bound(envelope_order + 1),
                        envelope_tf.kernel_decay_bound(lo, envelope_order + 1));
    };
    auto env = [&](double t) {
        return std::abs(envelope_tf.kernel_deriv(t, envelope_order));
    };

    NeumaierSum total;
    for (const auto& mw : mediums) {
        const double sup = certified_sup(env, mw.lo, mw.hi, env_lip_at(mw.lo), 20000);
        total.add(mw.count * sup);
        cert.add_constant("medium_sup_" + fmt_real(mw.lo), sup);
        cert.add_constant("medium_count_" + fmt_real(mw.lo),
                          static_cast<double>(mw.count));
    }

    const double half_width = 0.5;
    const double mn = certified_min(
        [&](double t) { return sinc_pow_deriv(window_power, t, 0); }, 0.0,
        half_width, sinc_pow_global_bound(window_power, 1));
    for (int w = 0; w < window_count; ++w) {
        const double lo = gap + w;
        const double hi = gap + w + 1.0;
        const double sup = certified_sup(env, lo, hi, env_lip_at(lo), 20000);
        const CountBound cnt =
            weyl_window_bound(source, tau_lo, tau_hi, character, lo + 0.5,
                              half_width, window_power);
        total.add(sup * cnt.count);
    }

    // analytic remainder: decreasing envelope decay times the quadratic
    // window-count closure, summed in closed form
    const GammaQuadBound qb = source.window_gamma_bound(window_power);
    const double lambda = envelope_tf.stretch;
    const double nu =
        envelope_tf.modulation ? *envelope_tf.modulation : 0.0;
    const int n = envelope_tf.base_power;
    const double t0 = gap + window_count;
    const double u0 = lambda * t0 - nu;
    if (!(u0 >= 1.0)) {
        throw std::runtime_error("tail_bound: remainder window starts too low");
    }
    const int p = envelope_tf.odd_multiplier ? 1 : 0;
    const double mult = envelope_tf.modulation ? 2.0 : 1.0;
    const double decay_c = mult * std::pow(lambda, envelope_order + 1) *
                           sinc_pow_decay_coeff(n, p + envelope_order);
    auto count_closure = [&](double nu_w) {
        return (2.0 / mn) * (qb.c0 + qb.c2 * nu_w * nu_w);
    };
    const double first_term =
        decay_c / std::pow(u0, n) * count_closure(t0 + 0.5);
    const double beta = nu / lambda + 0.5;
    const double scale = 2.0 * decay_c / (mn * lambda);
    const double integral =
        scale * ((qb.c0 + qb.c2 * beta * beta) * std::pow(u0, 1.0 - n) / (n - 1.0) +
                 (2.0 * qb.c2 * beta / lambda) * std::pow(u0, 2.0 - n) / (n - 2.0) +
                 (qb.c2 / (lambda * lambda)) * std::pow(u0, 3.0 - n) / (n - 3.0));
    const double remainder = first_term + integral;
    total.add(remainder);

    TailBound out;
    out.total = total.value() + total.error_bound();
    cert.add_constant("gap", gap);
    cert.add_constant("windows", window_count);
    cert.add_constant("remainder", remainder);
    cert.add_constant("total", out.total);
    cert.require("remainder finite", remainder,
                 std::numeric_limits<double>::infinity());
    cert.provenance = json{{"source", source.name()},
                           {"checksum", source.provenance()},
                           {"envelope", envelope_tf.id()},
                           {"envelope_order", envelope_order},
                           {"character", character}};
    cert.settle();
    out.certificate = cert;
    return out;
}

// ---------------------------------------------------------------------------
// Sign of the small eigenvalue at a parameter with a certified gap.

struct SignResult {
    int sign = 0;  // of s_0(tau); 0 when inconclusive
    Certificate certificate;
};

// With exactly one eigenvalue in [-L, L] and the rest beyond the gap,
// kernel(s_0) = 2 Gamma_K - sum_{i != 0} kernel(s_i); the tail bound decides
// the sign of kernel(s_0), and kernel < 0 on (0, pi/stretch) converts that
// into the sign of s_0 itself.
inline SignResult sign_certificate(SideSource& source, double tau, int character,
                                   const TestFunction& k_odd, double small_bound,
                                   double gap, const Certificate* gap_cert,
                                   const Certificate* unique_small_cert,
                                   const std::vector<MediumWindow>& mediums = {},
                                   int window_count = 40, int window_power = 6) {
    if (k_odd.parity() != Parity::odd) {
        throw std::invalid_argument("sign_certificate: need an odd test function");
    }
    if (unique_small_cert == nullptr || !unique_small_cert->verdict) {
        throw std::runtime_error(
            "sign_certificate: unique small eigenvalue not certified");
    }
    const TraceFn fn = make_trace_fn(k_odd);
    const EvalResult gamma = source.side(fn, SideKind::dirac_odd, tau, character);
    const TailBound tail =
        tail_bound(source, tau, tau, character, gap, k_odd, 0, gap_cert, mediums,
                   window_count, window_power);

    SignResult out;
    Certificate& cert = out.certificate;
    cert.statement = "sign";
    cert.intervals = {{tau, tau}};
    cert.add_constant("gamma_odd", gamma.value);
    cert.add_constant("gamma_budget", gamma.budget);
    cert.add_constant("tail", tail.total);
    cert.add_constant("small_bound", small_bound);
    cert.add_constant("gap", gap);
    // sign region of the kernel: stretch * |s_0| below the first sinc zero
    cert.require("small eigenvalue within the kernel sign region",
                 k_odd.stretch * small_bound, M_PI);
    cert.require("tail dominated", tail.total + 2.0 * gamma.budget,
                 2.0 * std::abs(gamma.value));
    cert.provenance = json{{"source", source.name()},
                           {"checksum", source.provenance()},
                           {"tf", k_odd.id()},
                           {"character", character},
                           {"tau", fmt_real(tau)},
                           {"note",
                            "kernel(s) < 0 for s in (0, pi/stretch): sign of "
                            "s_0 is minus the sign of the geometric side"}};
    cert.settle();
    if (cert.verdict) {
        out.sign = gamma.value > 0.0 ? -1 : +1;
        cert.add_constant("sign", out.sign);
    } else {
        out.sign = 0;
        cert.provenance["suggestion"] =
            "tail too large: enlarge the gap or the cutoff R";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transversality of the crossing over a locus interval.

struct TransversalityResult {
    bool certified = false;
    double gamma_deriv_min = 0.0;
    Certificate certificate;
};

// |sum_{j != 0} kernel'(s_j) s_j'| <= tail * deriv_bound < 2 |Gamma~| forces
// s_0' != 0 across the interval. deriv_bound is 2 pi C_Y on manifold data and
// the planted bound in oracle mode.
inline TransversalityResult transversality_certificate(
    SideSource& source, double tau_lo, double tau_hi, int character,
    const TestFunction& k_odd, double gap, const Certificate* gap_cert,
    const Certificate* unique_small_cert,
    const std::vector<MediumWindow>& mediums = {}, int tau_steps = 32,
    int window_count = 40, int window_power = 6,
    std::optional<double> deriv_bound_override = std::nullopt) {
    if (k_odd.parity() != Parity::odd) {
        throw std::invalid_argument("transversality: need an odd test function");
    }
    if (unique_small_cert == nullptr || !unique_small_cert->verdict) {
        throw std::runtime_error(
            "transversality: unique small eigenvalue not certified on the "
            "interval");
    }
    const double deriv_bound = deriv_bound_override
                                   ? *deriv_bound_override
                                   : source.eigen_deriv_bound();
    const TraceFn fn = make_trace_fn(k_odd);

    // certified modulus grid for |Gamma~| over the interval
    const double lip =
        source.tau_lipschitz(fn, SideKind::dirac_odd_derivative);
    const int nt = std::max(1, tau_steps);
    const double h = (tau_hi - tau_lo) / nt;
    double min_abs = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= nt; ++i) {
        const EvalResult r = source.side(fn, SideKind::dirac_odd_derivative,
                                         tau_lo + i * h, character);
        min_abs = std::min(min_abs, std::abs(r.value) - r.budget);
    }
    min_abs -= lip * h / 2.0;

    const TailBound tail =
        tail_bound(source, tau_lo, tau_hi, character, gap, k_odd, 1, gap_cert,
                   mediums, window_count, window_power);

    TransversalityResult out;
    out.gamma_deriv_min = min_abs;
    Certificate& cert = out.certificate;
    cert.statement = "transversality";
    cert.intervals = {{tau_lo, tau_hi}};
    cert.add_constant("gamma_deriv_min_abs", min_abs);
    cert.add_constant("tail_kernel_prime", tail.total);
    cert.add_constant("eigen_deriv_bound", deriv_bound);
    cert.add_constant("lhs_product", tail.total * deriv_bound);
    cert.require("derivative term dominates the error sum",
                 tail.total * deriv_bound, 2.0 * min_abs);
    cert.provenance = json{{"source", source.name()},
                           {"checksum", source.provenance()},
                           {"tf", k_odd.id()},
                           {"character", character},
                           {"tau_steps", nt}};
    cert.settle();
    out.certified = cert.verdict;
    return out;
}

// ---------------------------------------------------------------------------
// Spectral largeness: the coexact Laplacian has no eigenvalue <= threshold.

struct LargenessResult {
    bool certified = false;
    Certificate certificate;
};

inline LargenessResult spectral_largeness(SideSource& source,
                                          const BoundBasis& basis,
                                          double threshold = 2.0,
                                          int s_steps = 400) {
    FormalMatrix M = build_A(source, basis, SideKind::coexact);
    ExclusionResult ex;
    try {
        ex = certified_exclusion(M, 0, 0.0, 0.0, 0.0, std::sqrt(threshold), 0,
                                 s_steps);
    } catch (const NotPositiveDefinite&) {
        LargenessResult out;
        out.certificate.statement = "spectral_largeness";
        out.certificate.add_constant("threshold", threshold);
        out.certificate.require("coexact matrix positive definite", 1.0, 0.0);
        out.certificate.settle();
        return out;
    }
    LargenessResult out;
    Certificate& cert = out.certificate;
    cert = ex.certificate;
    cert.statement = "spectral_largeness";
    cert.add_constant("lambda_threshold", threshold);
    cert.provenance["note"] =
        "J_coexact(s) < 1 certified for s in [0, sqrt(threshold)]";
    out.certified = ex.certified;
    return out;
}

}  // namespace diracflow
