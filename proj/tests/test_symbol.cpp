#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "agmon/symbol.hpp"
#include "test_support.hpp"

using namespace agmon;
using namespace testing_support;

TEST_CASE("two-atom symbol closed forms") {
    const auto k = ti1_kernel();
    const SymbolEvaluator sym(k);
    const Vec x{0.3, 0};
    CHECK(sym.t_tilde0(x, Vec{1, 0}) == doctest::Approx(std::cosh(1.0) - 1.0).epsilon(1e-14));
    CHECK(sym.t_tilde0(x, Vec{1, 0}) == doctest::Approx(0.5430806348152437).epsilon(1e-12));
    CHECK(sym.t_tilde0(x, Vec{0, 0}) == 0.0);
    CHECK(sym.t0(x, Vec{M_PI, 0}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sym.t0(x, Vec{0, 0}) == 0.0);
}

TEST_CASE("gaussian symbol: closed form against plain Simpson") {
    const auto k = ti2_kernel();
    const SymbolEvaluator sym(k);
    const Vec x{0, 0};
    const double tt = sym.t_tilde0(x, Vec{1, 0});
    CHECK(tt == doctest::Approx(std::sqrt(M_PI) * (std::exp(0.25) - 1.0)).epsilon(1e-14));
    CHECK(tt == doctest::Approx(0.503427).epsilon(1e-6));
    const double oracle =
        2.0 * simpson([](double r) { return (std::cosh(r) - 1.0) * std::exp(-r * r); }, 0.0, 10.0);
    CHECK(tt == doctest::Approx(oracle).epsilon(1e-8));
    const double t0v = sym.t0(x, Vec{1, 0});
    CHECK(t0v == doctest::Approx(std::sqrt(M_PI) * (1.0 - std::exp(-0.25))).epsilon(1e-14));
}

TEST_CASE("exponential profile goes through quadrature and respects c_max") {
    KernelSpec k = ti2_kernel();
    k.profile.tail = TailClass::Exponential; // s(r) = e^{-r}, c_max = 1
    const SymbolEvaluator sym(k);
    const Vec x{0, 0};
    const double tt = sym.t_tilde0(x, Vec{0.5, 0});
    const double oracle = 2.0 * simpson(
        [](double r) { return (std::cosh(0.5 * r) - 1.0) * std::exp(-r); }, 0.0, 90.0, 16384);
    CHECK(tt == doctest::Approx(oracle).epsilon(1e-8));
    CHECK_THROWS_AS(sym.t_tilde0(x, Vec{1.0, 0}), hypothesis_error);
    CHECK_THROWS_AS(sym.t_tilde0(x, Vec{1.5, 0}), hypothesis_error);
}

TEST_CASE("restricted symbol on quadrature atoms") {
    const auto k = ti1_kernel();
    const SymbolEvaluator sym(k);
    const auto grid = ti1_grid(0.05);
    const double eps = 0.1;
    const Vec xi{0.8, 0};

    const auto interior = quadrature(k, grid, grid.node_count() / 2, eps);
    CHECK(t_tilde0_sigma(interior, xi, 1) ==
          doctest::Approx(sym.t_tilde0(interior.x, xi)).epsilon(1e-14));

    int nb = -1;
    for (int i = 0; i < grid.node_count(); ++i)
        if (grid.coord(i)[0] > 2.0 - eps - 1e-9) { nb = i; break; }
    const auto edge = quadrature(k, grid, nb, eps);
    // one of two equal atoms exits: exactly half the unrestricted value
    CHECK(t_tilde0_sigma(edge, xi, 1) ==
          doctest::Approx(0.5 * sym.t_tilde0(edge.x, xi)).epsilon(1e-14));
    CHECK(t_tilde0_sigma(edge, xi, 1) <= t_tilde0_grid(edge, xi, 1));
}

TEST_CASE("restricted symbol is monotone under domain shrinkage") {
    const auto k = ti2_kernel();
    const auto big = ti1_grid(0.05);
    const auto small = GridDomain::box(1, Vec{-1, 0}, Vec{1, 0}, 0.05, Vec{0, 0});
    const double eps = 0.1;
    const Vec xi{0.7, 0};
    // same physical point x = 0.75 in both domains
    auto node_at = [](const GridDomain& g, double x) {
        for (int i = 0; i < g.node_count(); ++i)
            if (std::abs(g.coord(i)[0] - x) < 1e-12) return i;
        return -1;
    };
    const int nb = node_at(big, 0.75), ns = node_at(small, 0.75);
    REQUIRE(nb >= 0);
    REQUIRE(ns >= 0);
    const double tb = t_tilde0_sigma(quadrature(k, big, nb, eps), xi, 1);
    const double ts = t_tilde0_sigma(quadrature(k, small, ns, eps), xi, 1);
    CHECK(ts <= tb + 1e-15);
}

TEST_CASE("second-moment matrix") {
    CHECK(second_moment_matrix(ti1_kernel(), Vec{0, 0})[0] == doctest::Approx(0.5).epsilon(1e-14));

    KernelSpec k2;
    k2.dim = 2;
    k2.variant = KernelVariant::Atomic;
    k2.atoms.push_back({Vec{1, 0}, const_fn(0.3), {}});
    k2.atoms.push_back({Vec{-1, 0}, const_fn(0.3), {}});
    k2.atoms.push_back({Vec{0, 1}, const_fn(0.7), {}});
    k2.atoms.push_back({Vec{0, -1}, const_fn(0.7), {}});
    const auto B = second_moment_matrix(k2, Vec{0, 0});
    CHECK(B[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(B[1] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(B[2] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(smallest_eig_B(k2, Vec{0, 0}) == doctest::Approx(0.3).epsilon(1e-14));

    CHECK(second_moment_matrix(ti2_kernel(), Vec{0, 0})[0] ==
          doctest::Approx(std::sqrt(M_PI) / 4.0).epsilon(1e-12));
    CHECK(second_moment_matrix(ti2_kernel(), Vec{0, 0})[0] ==
          doctest::Approx(0.443113).epsilon(1e-6));
}

TEST_CASE("convexity certificate") {
    const SymbolEvaluator s1(ti1_kernel());
    // at xi = 0 the quadratic form is cosh(0) * sum w gamma^2 = 1
    CHECK(convexity_certificate(s1, Vec{0, 0}, 1e-9, 1) == doctest::Approx(1.0).epsilon(1e-12));
    const double alpha = convexity_certificate(s1, Vec{0, 0}, 0.8, 64);
    CHECK(alpha >= 2.0 * 0.5 - 1e-10); // cosh >= 1 keeps D^2 above 2B

    const SymbolEvaluator s2(ti2_kernel());
    CHECK(convexity_certificate(s2, Vec{0, 0}, 1e-9, 1) ==
          doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-10));
    CHECK(convexity_certificate(s2, Vec{0.4, 0}, 0.5, 32) >=
          2.0 * second_moment_matrix(ti2_kernel(), Vec{0, 0})[0] - 1e-9);

    // 2D anisotropic sample
    const SymbolEvaluator s3(ti3_kernel());
    CHECK(convexity_certificate(s3, Vec{0, 0}, 0.6, 64) >= 1.0 - 1e-9);
}

TEST_CASE("quartic expansion of the symbol") {
    const SymbolEvaluator s1(ti1_kernel());
    std::vector<Vec> xis;
    for (int i = 1; i <= 10; ++i) xis.push_back(Vec{0.01 * i, 0});
    const auto rem = quartic_remainder(s1, Vec{0, 0}, xis);
    for (const auto& r : rem) {
        CHECK(r.remainder >= 0.0);
        CHECK(r.ratio == doctest::Approx(1.0 / 24.0).epsilon(0.01));
    }
    CHECK(quartic_remainder(s1, Vec{0, 0}, {Vec{0, 0}})[0].remainder == 0.0);

    const SymbolEvaluator s2(ti2_kernel());
    const auto rem2 = quartic_remainder(s2, Vec{0, 0}, {Vec{0.05, 0}, Vec{0.1, 0}});
    for (const auto& r : rem2)
        CHECK(r.ratio == doctest::Approx(std::sqrt(M_PI) / 32.0).epsilon(0.01));
}

TEST_CASE("evenness, nonnegativity and convexity properties") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(-1.2, 1.2);
    const auto kernels = std::vector<KernelSpec>{ti1_kernel(), ti2_kernel(), ti3_kernel()};
    for (const auto& k : kernels) {
        const SymbolEvaluator sym(k);
        for (int trial = 0; trial < 60; ++trial) {
            Vec x{unif(rng), k.dim == 2 ? unif(rng) : 0.0};
            Vec xi{unif(rng), k.dim == 2 ? unif(rng) : 0.0};
            Vec mxi{-xi[0], -xi[1]};
            const double t = sym.t_tilde0(x, xi);
            CHECK(t >= 0.0);
            CHECK(t == doctest::Approx(sym.t_tilde0(x, mxi)).epsilon(1e-12));
            // segment convexity and the |lambda|-scaling corollary
            Vec eta{unif(rng), k.dim == 2 ? unif(rng) : 0.0};
            const double lam = 0.5 * (unif(rng) / 1.2 + 1.0); // in [0,1]
            Vec mix{lam * xi[0] + (1 - lam) * eta[0], lam * xi[1] + (1 - lam) * eta[1]};
            CHECK(sym.t_tilde0(x, mix) <=
                  lam * t + (1 - lam) * sym.t_tilde0(x, eta) + 1e-11 * (1 + t));
            const double sc = unif(rng) / 1.2; // |sc| <= 1
            Vec sxi{sc * xi[0], sc * xi[1]};
            CHECK(sym.t_tilde0(x, sxi) <= std::abs(sc) * t + 1e-11 * (1 + t));
        }
    }
}
