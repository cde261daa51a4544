#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "agmon/kernel.hpp"
#include "test_support.hpp"

using namespace agmon;
using namespace testing_support;

TEST_CASE("hypothesis validation on the two-atom kernel") {
    const auto k = ti1_kernel();
    const auto rep = validate_hypotheses(k, {Vec{0, 0}, Vec{0.7, 0}}, {1.0});
    REQUIRE(rep.pass());
    for (const auto& p : rep.points) {
        CHECK(p.exp_moment_k0 == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
        CHECK(p.sq_moment_k0 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(p.smallest_eig_B == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(p.continuity_modulus == 0.0);
    }
}

TEST_CASE("single-atom 2D kernel fails nondegeneracy") {
    KernelSpec k;
    k.dim = 2;
    k.variant = KernelVariant::Atomic;
    k.atoms.push_back({Vec{1, 0}, const_fn(1.0), {}});
    const auto rep = validate_hypotheses(k, {Vec{0, 0}}, {0.5});
    CHECK_FALSE(rep.pass());
    bool degenerate_flagged = false;
    for (const auto& v : rep.violations)
        if (v.find("nondegeneracy") != std::string::npos) degenerate_flagged = true;
    CHECK(degenerate_flagged);
}

TEST_CASE("gaussian density moments match an independent quadrature oracle") {
    const auto k = ti2_kernel();
    const auto rep = validate_hypotheses(k, {Vec{0.3, 0}}, {2.0});
    REQUIRE(rep.pass());
    const double oracle_exp =
        2.0 * simpson([](double r) { return std::exp(2.0 * r - r * r); }, 1.0, 12.0);
    const double oracle_sq =
        2.0 * simpson([](double r) { return r * r * std::exp(-r * r); }, 0.0, 1.0);
    CHECK(rep.points[0].exp_moment_k0 == doctest::Approx(oracle_exp).epsilon(1e-8));
    CHECK(rep.points[0].sq_moment_k0 == doctest::Approx(oracle_sq).epsilon(1e-8));
}

TEST_CASE("requesting a moment at c >= c_max is a hypothesis violation") {
    KernelSpec k = ti2_kernel();
    k.profile.tail = TailClass::Exponential; // c_max = 1
    CHECK_THROWS_AS(validate_hypotheses(k, {Vec{0, 0}}, {1.0}), hypothesis_error);
}

TEST_CASE("quadrature maps atoms exactly onto the lattice") {
    const auto k = ti1_kernel();
    const auto grid = ti1_grid(0.05);
    const double eps = 0.1; // m = 2
    const int mid = grid.node_count() / 2;
    const auto qa = quadrature(k, grid, mid, eps);
    REQUIRE(qa.atoms.size() == 2);
    for (const auto& a : qa.atoms) {
        CHECK(std::abs(a.z[0]) == 2);
        CHECK(a.w == doctest::Approx(0.5).epsilon(1e-15));
        CHECK_FALSE(a.exit);
    }

    // node next to the right boundary: the +1 jump exits Sigma
    int near_boundary = -1;
    for (int i = 0; i < grid.node_count(); ++i)
        if (grid.coord(i)[0] > 2.0 - eps - 1e-9) {
            near_boundary = i;
            break;
        }
    REQUIRE(near_boundary >= 0);
    const auto qb = quadrature(k, grid, near_boundary, eps);
    bool exit_plus = false;
    for (const auto& a : qb.atoms)
        if (a.z[0] > 0) exit_plus = a.exit;
    CHECK(exit_plus);
}

TEST_CASE("misaligned atomic offset is a configuration error") {
    KernelSpec k = ti1_kernel();
    k.atoms[0].offset = Vec{0.7, 0};
    k.atoms[1].offset = Vec{-0.7, 0};
    const auto grid = ti1_grid(0.05);
    CHECK_THROWS_AS(quadrature(k, grid, 0, 0.1), config_error);
}

TEST_CASE("gaussian lattice mass stays within 1% of the full integral") {
    const auto k = ti2_kernel();
    const auto grid = ti1_grid(0.05);
    QuadratureOptions opt;
    opt.radius = 4.0;
    const auto qa = quadrature(k, grid, grid.node_count() / 2, 0.05, opt); // eps = h
    CHECK(qa.riemann_mass == doctest::Approx(std::sqrt(M_PI)).epsilon(0.01));
}

TEST_CASE("truncation tail mass decreases in the radius") {
    const auto k = ti2_kernel();
    const auto grid = ti1_grid(0.05);
    double prev = 1e300;
    for (double R : {2.0, 3.0, 4.0}) {
        QuadratureOptions opt;
        opt.radius = R;
        const auto qa = quadrature(k, grid, grid.node_count() / 2, 0.05, opt);
        CHECK(qa.tail_mass < prev);
        prev = qa.tail_mass;
    }
}

TEST_CASE("singular profile drops the sub-cell energy and logs it") {
    KernelSpec k = ti2_kernel();
    k.profile.tail = TailClass::Compact;
    k.profile.scale = 2.0;
    k.singularity = 0.5;
    const auto grid = ti1_grid(0.05);
    const auto qa = quadrature(k, grid, grid.node_count() / 2, 0.1);
    CHECK(qa.dropped_small > 0.0);
    CHECK(qa.dropped_small < 1e-2);
    // |gamma|^2-moment near zero stays finite and matches plain Simpson
    const double oracle =
        2.0 * simpson([&](double r) {
            const double t = 1 - (r / 2.0) * (r / 2.0);
            return r * r * t * t * std::pow(r, -1.5);
        }, 1e-12, 1.0);
    CHECK(square_moment(k, Vec{0, 0}) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("midpoint construction is exactly reversible") {
    KernelSpec k = ti2_kernel();
    k.weight = [](const Vec& x) { return 2.0 + std::sin(x[0]); };
    const auto grid = ti1_grid(0.05);
    CHECK(reversibility_residual(k, grid, 0.1) == 0.0);

    SUBCASE("source-point evaluation breaks reversibility measurably") {
        KernelSpec ks = k;
        ks.spatial_rule = SpatialRule::Source;
        ks.weight = [](const Vec& x) { return 1.0 + x[0]; };
        const double res = reversibility_residual(ks, grid, 0.1);
        CHECK(res > 1e-4); // ~ eps |gamma| |w'| per jump weight
    }
    SUBCASE("constant weight is reversible under any evaluation rule") {
        KernelSpec kc = k;
        kc.spatial_rule = SpatialRule::Source;
        kc.weight = const_fn(3.0);
        CHECK(reversibility_residual(kc, grid, 0.1) == 0.0);
    }
}

TEST_CASE("ground-state transform") {
    const auto base = ti1_kernel();
    const auto grid = ti1_grid(0.05);
    const double eps = 0.1;
    const SpatialFn F = [](const Vec& x) { return x[0] * x[0]; };

    SUBCASE("constant F is the identity transform") {
        const auto gs = ground_state_transform(base, const_fn(2.5), grid, eps);
        for (double v : gs.v_eps) CHECK(std::abs(v) < 1e-14);
        CHECK(gs.c_reported < 1e-12);
    }

    SUBCASE("quadratic F against the closed-form potential") {
        const auto gs = ground_state_transform(base, F, grid, eps);
        for (int i = 0; i < grid.node_count(); i += 13) {
            const double x = grid.coord(i)[0];
            const double oracle = 1.0 - std::exp(eps / 2.0) * std::cosh(x);
            CHECK(gs.v_eps[i] == doctest::Approx(oracle).epsilon(1e-12));
            CHECK(gs.v_eps[i] >= -gs.c_reported * eps - 1e-12);
        }
    }

    SUBCASE("round trip recovers the base weights") {
        const auto leg1 = ground_state_transform(base, F, grid, eps);
        const auto leg2 = ground_state_transform(leg1.kernel,
                                                 [&F](const Vec& x) { return -F(x); },
                                                 grid, eps);
        const int m = grid.alignment(eps);
        for (int i = 0; i < grid.node_count(); i += 7) {
            const auto qa = quadrature(leg2.kernel, grid, i, eps);
            const auto qb = quadrature(base, grid, i, eps);
            REQUIRE(qa.atoms.size() == qb.atoms.size());
            for (size_t a = 0; a < qa.atoms.size(); ++a)
                CHECK(qa.atoms[a].w == doctest::Approx(qb.atoms[a].w).epsilon(1e-12));
        }
        (void)m;
    }

    SUBCASE("the m_eps-reversible leg keeps V_eps >= -C eps with bounded C") {
        // tilt down first: base2 is the kernel of the e^{-F/eps} dx reversible
        // process; transforming back is the Remark-1.7 pipeline
        double prev_at_min = 1.0;
        for (double e : {0.1, 0.05}) {
            const auto down = ground_state_transform(base, [&F](const Vec& x) { return -F(x); },
                                                     grid, e);
            const auto up = ground_state_transform(down.kernel, F, grid, e);
            CHECK(up.c_reported <= 0.6); // closed form: e^{-eps/2} cosh x - 1 >= -eps/2
            for (int i = 0; i < grid.node_count(); i += 17) {
                const double x = grid.coord(i)[0];
                const double oracle = std::exp(-e / 2.0) * std::cosh(x) - 1.0;
                CHECK(up.v_eps[i] == doctest::Approx(oracle).epsilon(1e-11));
            }
            // value at the potential minimum vanishes with eps
            const double at_min = std::abs(up.v_eps[grid.well_node()]);
            CHECK(at_min < prev_at_min);
            prev_at_min = at_min;
        }
    }

    SUBCASE("singular kernels have no finite total mass") {
        KernelSpec ks = ti2_kernel();
        ks.singularity = 0.5;
        CHECK_THROWS_AS(ground_state_transform(ks, F, grid, eps), hypothesis_error);
    }
}

TEST_CASE("signed perturbation stays an eps-scale correction") {
    KernelSpec k = ti1_kernel();
    k.atoms[0].r1_weight = const_fn(-0.1);
    k.atoms[1].r1_weight = const_fn(-0.1);
    const auto grid = ti1_grid(0.05);
    const auto rep = validate_hypotheses(k, {Vec{0.5, 0}}, {1.0});
    REQUIRE(rep.pass());
    CHECK(rep.points[0].exp_moment_r1 == doctest::Approx(0.2 * std::exp(1.0)).epsilon(1e-13));
    const auto qa = quadrature(k, grid, grid.node_count() / 2, 0.1);
    for (const auto& a : qa.atoms) CHECK(a.w == doctest::Approx(0.5 - 0.1 * 0.1).epsilon(1e-13));
}
