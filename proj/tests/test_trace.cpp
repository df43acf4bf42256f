#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "diracflow/trace.hpp"
#include "support/test_oracles.hpp"

using namespace diracflow;
using dftest::direct_geometric_side;
using dftest::random_manifold;

namespace {

const TestFunction kH6{6, std::nullopt, 1.0, false};
const TestFunction kK7{7, std::nullopt, 1.0, true};

ManifoldData single_geodesic_data(double l, double spin_theta, std::int64_t n,
                                  int t, int m) {
    ManifoldData data;
    data.name = "single";
    data.volume = 3.0;
    data.b1 = 1;
    data.torsion_order = m;
    data.cutoff = 7.0;
    data.checksum = "single";
    GeodesicRecord g;
    g.length = l;
    g.prime_length = l;
    g.spin_holonomy = spin_theta;
    g.holonomy = std::fmod(2.0 * spin_theta, two_pi);
    g.free_class = n;
    g.torsion_class = t;
    data.geodesics = {g};
    return data;
}

}  // namespace

TEST_CASE("build rejects parity and support mismatches") {
    std::mt19937_64 rng(1);
    auto data = random_manifold(rng, 10, 7, 7.0, 3);
    CHECK_THROWS_WITH(
        build_formal_side(data, make_trace_fn(kK7), SideKind::dirac_even),
        Catch::Matchers::ContainsSubstring("parity"));
    CHECK_THROWS_WITH(
        build_formal_side(data, make_trace_fn(kH6), SideKind::dirac_odd),
        Catch::Matchers::ContainsSubstring("parity"));

    auto small = data;
    small.cutoff = 5.0;
    CHECK_THROWS_WITH(
        build_formal_side(small, make_trace_fn(kH6), SideKind::dirac_even),
        Catch::Matchers::ContainsSubstring("support"));
}

TEST_CASE("zero test function leaves only the volume term") {
    std::mt19937_64 rng(2);
    auto data = random_manifold(rng, 25, 7, 7.0, 3);
    TraceFn zero;
    zero.id = "zero";
    zero.parity = Parity::even;
    zero.support_radius = 6.0;
    zero.value = [](double) { return 0.0; };
    zero.value0 = 0.0;
    zero.second_deriv0 = 0.0;
    zero.kernel_deriv = [](double, int) { return 0.0; };

    const auto side = build_formal_side(data, zero, SideKind::dirac_even);
    CHECK(side.coefficients.empty());
    CHECK(side.volume_term == 0.0);
    CHECK(evaluate(side, 0.37, 2).value == 0.0);
}

TEST_CASE("single geodesic class reproduces the hand sum") {
    const double l = 1.7, st = 0.9;
    const std::int64_t n = 2;
    const int t = 3, m = 7;
    auto data = single_geodesic_data(l, st, n, t, m);
    const auto side = build_formal_side(data, make_trace_fn(kH6), SideKind::dirac_even);

    REQUIRE(side.coefficients.size() == 1);
    const double expected_coeff =
        geodesic_weight(data.geodesics[0]) * std::cos(st) * kH6.value(l);
    CHECK(side.coefficients.at(ClassKey{n, t}) ==
          Catch::Approx(expected_coeff).epsilon(1e-14));

    const double tau = 0.23;
    const int k = 4;
    const double vol_term = 3.0 / two_pi * (kH6.value(0.0) / 4.0 -
                                            kH6.second_deriv_at_zero());
    const double expected =
        vol_term + expected_coeff * std::cos(two_pi * (tau * n + double(k) * t / m));
    CHECK(evaluate(side, tau, k).value == Catch::Approx(expected).epsilon(1e-14));

    // tau = 0, k = 0 is the plain untwisted sum
    CHECK(evaluate(side, 0.0, 0).value ==
          Catch::Approx(vol_term + expected_coeff).epsilon(1e-14));
}

TEST_CASE("group-ring evaluation equals the direct per-tau sum") {
    std::mt19937_64 rng(5);
    for (int m : {1, 4, 7}) {
        auto data = random_manifold(rng, 10000, m, 7.0, 5);
        for (SideKind kind : {SideKind::coexact, SideKind::dirac_even,
                              SideKind::dirac_odd, SideKind::dirac_odd_derivative}) {
            const bool even = kind == SideKind::coexact || kind == SideKind::dirac_even;
            const TraceFn fn = make_trace_fn(even ? kH6 : kK7);
            const auto side = build_formal_side(data, fn, kind);
            std::uniform_real_distribution<double> taus(0.0, 1.0);
            std::uniform_int_distribution<int> ks(0, m - 1);
            for (int trial = 0; trial < 10; ++trial) {
                const double tau = taus(rng);
                const int k = ks(rng);
                const auto direct = direct_geometric_side(data, fn, kind, tau, k);
                const auto fast = evaluate(side, tau, k);
                CHECK(std::abs(fast.value - direct.value) <=
                      1e-12 * (1.0 + direct.abs_sum));
            }
        }
    }
}

TEST_CASE("linearity in the test function") {
    std::mt19937_64 rng(6);
    auto data = random_manifold(rng, 2000, 7, 7.0, 4);
    const TestFunction h1{6, std::nullopt, 1.0, false};
    const TestFunction h2{6, 2.0, 1.0, false};
    const double alpha = 0.7, beta = -1.3;

    TraceFn combo;
    combo.id = "combo";
    combo.parity = Parity::even;
    combo.support_radius = 6.0;
    combo.value = [=](double x) {
        return alpha * h1.value(x) + beta * h2.value(x);
    };
    combo.value0 = alpha * h1.value(0.0) + beta * h2.value(0.0);
    combo.second_deriv0 = alpha * h1.second_deriv_at_zero() +
                          beta * h2.second_deriv_at_zero();
    combo.kernel_deriv = [=](double t, int order) {
        return alpha * h1.kernel_deriv(t, order) + beta * h2.kernel_deriv(t, order);
    };

    const auto side_combo = build_formal_side(data, combo, SideKind::dirac_even);
    const auto side1 = build_formal_side(data, make_trace_fn(h1), SideKind::dirac_even);
    const auto side2 = build_formal_side(data, make_trace_fn(h2), SideKind::dirac_even);
    for (double tau : {0.0, 0.17, 0.5, 0.83}) {
        const auto c = evaluate(side_combo, tau, 3);
        const double split = alpha * evaluate(side1, tau, 3).value +
                             beta * evaluate(side2, tau, 3).value;
        CHECK(std::abs(c.value - split) <= 1e-12 * (1.0 + c.abs_sum));
    }
}

TEST_CASE("conjugation symmetry of the even side") {
    std::mt19937_64 rng(8);
    const int m = 7;
    auto data = random_manifold(rng, 3000, m, 7.0, 4);
    const auto side = build_formal_side(data, make_trace_fn(kH6), SideKind::dirac_even);
    for (double tau : {0.1, 0.15465, 0.42}) {
        for (int k : {0, 2, 5}) {
            const double a = evaluate(side, tau, k).value;
            const double b = evaluate(side, 1.0 - tau, (m - k) % m).value;
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
        }
    }
}

TEST_CASE("grid evaluation matches pointwise calls exactly") {
    std::mt19937_64 rng(9);
    auto data = random_manifold(rng, 500, 7, 7.0, 3);
    const auto side = build_formal_side(data, make_trace_fn(kH6), SideKind::dirac_even);

    CHECK(evaluate_grid(side, {0.4}, 1)[0] == evaluate(side, 0.4, 1).value);

    std::vector<double> grid;
    for (int i = 0; i < 1000; ++i) grid.push_back(i / 999.0);
    const auto values = evaluate_grid(side, grid, 2);
    for (std::size_t i = 0; i < grid.size(); i += 97) {
        CHECK(values[i] == evaluate(side, grid[i], 2).value);
    }
}

TEST_CASE("derivative side is the tau-derivative of the odd side") {
    // analytic single-class check
    auto data = single_geodesic_data(1.3, 0.7, 3, 2, 7);
    const TraceFn fn = make_trace_fn(kK7);
    const auto odd = build_formal_side(data, fn, SideKind::dirac_odd);
    const auto der = build_formal_side(data, fn, SideKind::dirac_odd_derivative);

    const double w = geodesic_weight(data.geodesics[0]);
    const double c = w * std::sin(0.7) * kK7.value(1.3);
    const double tau = 0.31;
    const int k = 5;
    const double angle = two_pi * (tau * 3.0 + 5.0 * 2.0 / 7.0);
    CHECK(evaluate(der, tau, k).value ==
          Catch::Approx(-two_pi * 3.0 * c * std::sin(angle)).epsilon(1e-13));
    CHECK(derivative_consistency(odd, der, tau, k) <=
          1e-6 * (1.0 + std::abs(evaluate(der, tau, k).value)));

    // random data
    std::mt19937_64 rng(10);
    auto big = random_manifold(rng, 1000, 7, 7.0, 3);
    const auto odd2 = build_formal_side(big, fn, SideKind::dirac_odd);
    const auto der2 = build_formal_side(big, fn, SideKind::dirac_odd_derivative);
    std::uniform_real_distribution<double> taus(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double t = taus(rng);
        CHECK(derivative_consistency(odd2, der2, t, 1) <=
              1e-6 * (1.0 + std::abs(evaluate(der2, t, 1).value)));
    }

    // at tau = 0 with the trivial character the odd side is even in tau
    CHECK(std::abs(evaluate(der2, 0.0, 0).value) <=
          1e-6 * (1.0 + odd2.coeff_abs_sum()));

    // provenance mismatch is refused
    auto other = build_formal_side(big, fn, SideKind::dirac_odd);
    other.checksum = "other";
    CHECK_THROWS_WITH(derivative_consistency(other, der2, 0.1, 0),
                      Catch::Matchers::ContainsSubstring("provenance"));
}

TEST_CASE("formal sides serialize losslessly") {
    std::mt19937_64 rng(12);
    auto data = random_manifold(rng, 300, 7, 7.0, 3);
    const auto side = build_formal_side(data, make_trace_fn(kK7), SideKind::dirac_odd);
    const auto back = formal_side_from_json(formal_side_to_json(side));
    CHECK(back.kind == side.kind);
    CHECK(back.tf_id == side.tf_id);
    CHECK(back.volume_term == side.volume_term);
    REQUIRE(back.coefficients.size() == side.coefficients.size());
    for (double tau : {0.0, 0.3, 0.77}) {
        CHECK(evaluate(back, tau, 4).value == evaluate(side, tau, 4).value);
    }
}

TEST_CASE("derivative-kind sides ignore the zero free class") {
    auto data = single_geodesic_data(1.1, 0.4, 0, 2, 7);
    const auto der =
        build_formal_side(data, make_trace_fn(kK7), SideKind::dirac_odd_derivative);
    for (double tau : {0.0, 0.2, 0.9}) {
        CHECK(evaluate(der, tau, 3).value == 0.0);
    }
}
