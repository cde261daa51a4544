#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "agmon/finsler.hpp"
#include "agmon/weights.hpp"
#include "test_support.hpp"

using namespace agmon;
using namespace testing_support;

namespace {

struct Ti1Setup {
    GridDomain grid;
    KernelSpec kernel;
    PotentialSpec pot;
    SymbolEvaluator sym;
    std::vector<double> d;

    explicit Ti1Setup(double h)
        : grid(ti1_grid(h)), kernel(ti1_kernel()), pot(quad_potential(1, 0.5)), sym(kernel) {
        LengthOracle oracle(sym, [this](const Vec& x) { return pot.v0(x); });
        d = distance_field(grid, oracle).d;
    }
};

} // namespace

TEST_CASE("cutoff chi: slope cap, boundary values, C^2 joins") {
    const CutoffChi chi;
    CHECK(chi(0.5) == 0.0);
    CHECK(chi(0.0) == 0.0);
    CHECK(chi(1.0) == 1.0);
    CHECK(chi(5.0) == 1.0);
    const double cap = CutoffChi::slope_cap(); // 2/log 2 = 2.8854
    CHECK(cap == doctest::Approx(2.8853900817779268).epsilon(1e-12));
    double prev = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double r = 1.2 * i / 10000.0;
        const double v = chi(r);
        const double dv = chi.deriv(r);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(dv >= 0.0);
        CHECK(dv <= cap);
        CHECK(v >= prev - 1e-15); // monotone
        prev = v;
    }
    // derivative consistency by central differences
    for (double r : {0.55, 0.62, 0.75, 0.93, 0.99}) {
        const double fd = (chi(r + 1e-6) - chi(r - 1e-6)) / 2e-6;
        CHECK(fd == doctest::Approx(chi.deriv(r)).epsilon(1e-6));
    }
    // second derivative continuous across the breakpoints
    for (double b : {0.5, 0.6, 0.9, 1.0}) {
        const double left = chi.deriv2(b - 1e-9);
        const double right = chi.deriv2(b + 1e-9);
        CHECK(std::abs(left - right) <= 1e-8 + 1e-6 * std::abs(left));
    }
}

TEST_CASE("Phi field formulas and sandwich") {
    const Ti1Setup S(1.0 / 400.0);
    const CutoffChi chi;
    const double B = 6.0;
    double prev_cp = 0.0;
    std::vector<double> hess_bounds;
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto phi = phi_field(S.d, B, eps, chi);
        const double c0 = 0.5 * B * eps * std::log(0.5 * B);
        for (int i = 0; i < S.grid.node_count(); ++i) {
            if (S.d[i] <= 0.5 * B * eps)
                CHECK(phi[i] == doctest::Approx(S.d[i] - c0).epsilon(1e-14));
            if (S.d[i] >= B * eps) {
                // e^{Phi/eps} = e^{d/eps} (d/eps)^{-B/2}, compared in log space
                const double lhs = phi[i] / eps;
                const double rhs = S.d[i] / eps - 0.5 * B * std::log(S.d[i] / eps);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
            }
        }
        const double cp = phi_sandwich_constant(S.d, phi, B, eps);
        if (prev_cp > 0) {
            CHECK(cp <= 2.0 * prev_cp);
            CHECK(cp >= 0.5 * prev_cp);
        }
        prev_cp = cp;

        // finite-difference Hessian bounded uniformly in eps
        const double h = S.grid.spacing();
        double hb = 0.0;
        for (int i = 1; i + 1 < S.grid.node_count(); ++i)
            hb = std::max(hb, std::abs(phi[i + 1] - 2 * phi[i] + phi[i - 1]) / (h * h));
        hess_bounds.push_back(hb);
    }
    const double hmin = *std::min_element(hess_bounds.begin(), hess_bounds.end());
    const double hmax = *std::max_element(hess_bounds.begin(), hess_bounds.end());
    CHECK(hmax <= 4.0 * hmin); // stable over the sweep
}

TEST_CASE("phi_alpha construction") {
    const Ti1Setup S(1.0 / 400.0);
    const CutoffChi chi;
    const double eps = 0.05, B = 2.0, D = 1.6, eta = 0.25;

    SUBCASE("on K the weight equals Phi; far out it equals the mollified ramp") {
        const double alpha = 0.8;
        const auto pa = phi_alpha_field(S.grid, S.d, eps, B, alpha, D, eta, chi, 0.05);
        CHECK(pa.thm24_ok);
        const auto phi = phi_field(S.d, B, eps, chi);
        for (int i = 0; i < S.grid.node_count(); ++i) {
            if (S.d[i] <= D) CHECK(pa.phi_alpha[i] == doctest::Approx(phi[i]).epsilon(1e-14));
            if (S.d[i] >= D + 2 * eta)
                CHECK(pa.phi_alpha[i] ==
                      doctest::Approx((1 - 0.5 * alpha) * pa.d_delta[i]).epsilon(1e-14));
        }
        // off-K sandwich (1-alpha) d <= Phi_alpha <= d
        for (int i = 0; i < S.grid.node_count(); ++i) {
            if (S.d[i] <= D) continue;
            CHECK(pa.phi_alpha[i] <= S.d[i] + 1e-12);
            CHECK(pa.phi_alpha[i] >= (1 - alpha) * S.d[i] - 1e-12);
        }
    }
    SUBCASE("bracket for the Theorem 1.6(a) weight at alpha = 0.2") {
        const auto pa = phi_alpha_field(S.grid, S.d, eps, B, 0.2, D, eta, chi, 0.05);
        for (int i = 0; i < S.grid.node_count(); ++i) {
            CHECK(pa.phi_tilde[i] <= S.d[i] + 1e-12);
            CHECK(pa.phi_tilde[i] >= (1 - 0.2) * S.d[i] - 1e-12);
        }
    }
    SUBCASE("too small alpha names the minimal supported one") {
        try {
            phi_alpha_field(S.grid, S.d, eps, B, 1e-4, D, eta, chi, 0.05);
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("minimal supported alpha") != std::string::npos);
        }
    }
    SUBCASE("strict mode rejects eps above eps_alpha") {
        CHECK_THROWS_AS(
            phi_alpha_field(S.grid, S.d, 0.1, 6.0, 0.3, D, eta, chi, 0.05, true),
            config_error);
    }
}

TEST_CASE("F+- fields") {
    const Ti1Setup S(1.0 / 200.0);
    const CutoffChi chi;
    const double eps = 0.05, B = 6.0;
    const auto H = assemble(S.grid, S.kernel, S.pot, eps, BoundaryMode::Dirichlet);
    const auto phi = phi_field(S.d, B, eps, chi);
    const auto vphi = v_phi(H, phi);
    const auto pairs = lowest_eigenpairs(H, 1);
    const double E = pairs[0].lambda;

    const auto fpm = f_pm(H, vphi, E, B, eps, S.d);
    SUBCASE("algebraic identity F+^2 - F-^2 = V_eff + V^phi - E") {
        for (int i = 0; i < H.n(); ++i) {
            const double lhs = fpm.f_plus[i] * fpm.f_plus[i] - fpm.f_minus[i] * fpm.f_minus[i];
            const double rhs = H.diag_potential(i) + vphi[i] - E;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
    SUBCASE("measured F >= C sqrt(eps) with C >= 1") {
        CHECK(fpm.min_f_over_sqrt_eps >= 1.0);
    }
    SUBCASE("with E = 0 and a nonnegative field, Omega- is empty") {
        const auto f0 = f_pm(H, vphi, 0.0, B, eps, S.d);
        CHECK(f0.omega_minus.empty());
        for (int i = 0; i < H.n(); ++i) {
            const double expect = S.d[i] < B * eps ? eps : 0.0;
            CHECK(f0.f_minus[i] * f0.f_minus[i] == doctest::Approx(expect).epsilon(1e-14));
        }
    }
}

TEST_CASE("three-region bounds on the 1D instance") {
    const Ti1Setup S(1.0 / 400.0);
    const CutoffChi chi;
    const double B = 6.0, D = 1.6, eta = 0.25;
    auto v0 = [&](const Vec& x) { return quad_potential(1).v0(x); };

    double prev_middle = 0.0;
    std::vector<double> outer_c1;
    for (double eps : {0.1, 0.05, 0.025}) {
        std::vector<QuadratureAtoms> atoms;
        for (int i = 0; i < S.grid.node_count(); ++i)
            atoms.push_back(quadrature(S.kernel, S.grid, i, eps));
        const auto H = assemble(S.grid, S.kernel, S.pot, eps, BoundaryMode::Dirichlet);

        const auto phi = phi_field(S.d, B, eps, chi);
        const auto rep = three_region_check(S.grid, atoms, v0, H, phi, v_phi(H, phi), S.d,
                                            B, eps, D, eta);
        CHECK(rep.inner_v0 >= -5e-3); // eikonal equality region at h = 1/400
        CHECK(rep.middle_v0 > 0.0);
        if (prev_middle > 0) {
            const double ratio = prev_middle / rep.middle_v0;
            CHECK(ratio > 1.6); // middle bound scales like eps
            CHECK(ratio < 2.5);
        }
        prev_middle = rep.middle_v0;

        const auto pa = phi_alpha_field(S.grid, S.d, eps, 2.0, 0.3, D, eta, chi, 0.05);
        const auto rept = three_region_check(S.grid, atoms, v0, H, pa.phi_tilde,
                                             v_phi(H, pa.phi_tilde), S.d, B, eps, D, eta);
        CHECK(rept.pass(1e-2));
        outer_c1.push_back(rept.c1);
    }
    // outer-region lower bound independent of eps within 10%
    const double c1min = *std::min_element(outer_c1.begin(), outer_c1.end());
    const double c1max = *std::max_element(outer_c1.begin(), outer_c1.end());
    CHECK(c1max <= 1.1 * c1min);
}

TEST_CASE("lemma 2.3 inequality") {
    const Ti1Setup S(1.0 / 100.0);
    const CutoffChi chi;
    const double eps = 0.1, B = 6.0;
    for (auto mode : {BoundaryMode::Dirichlet, BoundaryMode::Neumann}) {
        const auto H = assemble(S.grid, S.kernel, S.pot, eps, mode);
        const auto phi = phi_field(S.d, B, eps, chi);
        const auto vphi = v_phi(H, phi);
        const auto pairs = lowest_eigenpairs(H, 1);
        const double E = pairs[0].lambda;
        const auto fpm = f_pm(H, vphi, E, B, eps, S.d);

        SUBCASE("eigenpair: nonnegative slack, residual term negligible") {
            const auto res = lemma23_check(H, pairs[0].u, E, phi, fpm);
            CHECK(res.lhs <= res.rhs * (1 + 1e-8));
            CHECK(res.term_residual <= 1e-3 * res.rhs);
        }
        SUBCASE("phi = 0 for random non-eigenvectors") {
            std::vector<double> zero(H.n(), 0.0);
            const auto f0 = f_pm(H, v_phi(H, zero), E, B, eps, S.d);
            std::mt19937 rng(17);
            std::normal_distribution<double> g;
            for (int t = 0; t < 5; ++t) {
                std::vector<double> u(H.n());
                for (double& x : u) x = g(rng);
                const auto res = lemma23_check(H, u, E, zero, f0);
                CHECK(res.lhs <= res.rhs * (1 + 1e-8));
            }
        }
        SUBCASE("sharpness probe: constant 8 -> 7 searched, reported only") {
            std::mt19937 rng(23);
            std::normal_distribution<double> g;
            int violations_with_7 = 0;
            for (int t = 0; t < 200; ++t) {
                std::vector<double> u(H.n());
                for (double& x : u) x = g(rng);
                const auto res = lemma23_check(H, u, E, phi, fpm);
                CHECK(res.lhs <= res.rhs * (1 + 1e-8)); // the stated constants hold
                const double rhs7 = res.term_residual + 7.0 / 8.0 * res.term_fminus;
                if (res.lhs > rhs7) ++violations_with_7;
            }
            MESSAGE("lemma 2.3 probe (", mode == BoundaryMode::Dirichlet ? "dirichlet" : "neumann",
                    "): replacing 8 by 7 violated in ", violations_with_7, "/200 trials");
        }
    }
}

TEST_CASE("decay report basics") {
    const Ti1Setup S(1.0 / 200.0);
    const double eps = 0.05, B = 6.0, alpha = 0.3;
    const auto H = assemble(S.grid, S.kernel, S.pot, eps, BoundaryMode::Dirichlet);
    const auto pairs = lowest_eigenpairs(H, 1);
    const CutoffChi chi;
    const auto pa = phi_alpha_field(S.grid, S.d, eps, 2.0, alpha, 1.6, 0.25, chi, 0.05);
    const auto rep = decay_report(S.grid, S.d, pairs[0], eps, B, alpha, 1.6, &pa, pa.c_prime);

    // single-node lower bound r1 >= |u(x_j)| sqrt(h)
    const double well_term =
        std::abs(pairs[0].u[S.grid.well_node()]) * std::sqrt(S.grid.cell_volume());
    CHECK(rep.r1 >= well_term);
    CHECK(rep.fit_count >= 10);
    CHECK(std::isfinite(rep.r2));
    CHECK(std::isfinite(rep.r3));
    CHECK(rep.slope > 0.9);
    // the split-norm estimate of the Lipschitz weight
    CHECK(rep.split_lhs <= rep.split_rhs * (1 + 1e-10));
}
