#include "agmon/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "agmon/finsler.hpp"

namespace agmon {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Timings {
    std::vector<std::pair<std::string, double>> stages;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    void mark(const std::string& name) {
        const auto t1 = std::chrono::steady_clock::now();
        stages.push_back({name, std::chrono::duration<double>(t1 - t0).count()});
        t0 = t1;
    }
};

void write_manifest(const ExperimentConfig& cfg, const std::string& out_dir,
                    const std::string& command, const Timings& tm,
                    const std::string& status) {
    std::ofstream f(fs::path(out_dir) / "run-manifest.txt");
    f << "agmonlab 0.1.0\n";
    f << "command: " << command << "\n";
    f << "seed: " << cfg.seed << "\n";
    f << "status: " << status << "\n";
    f << "timings:\n";
    for (const auto& [name, sec] : tm.stages) f << "  " << name << ": " << sec << " s\n";
    f << "config:\n";
    std::istringstream is(cfg.raw_text);
    std::string line;
    while (std::getline(is, line)) f << "  | " << line << "\n";
}

BoundaryMode mode_of(const std::string& name) {
    return name == "dirichlet" ? BoundaryMode::Dirichlet : BoundaryMode::Neumann;
}

std::vector<Vec> validation_points(const GridDomain& grid) {
    std::vector<Vec> pts;
    const int stride = std::max(1, grid.node_count() / 16);
    for (int i = 0; i < grid.node_count(); i += stride) pts.push_back(grid.coord(i));
    return pts;
}

int cmd_validate(const ExperimentConfig& cfg, const std::string& out_dir) {
    const GridDomain grid = cfg.build_grid();
    const KernelSpec kernel = cfg.build_kernel();
    const PotentialSpec pot = cfg.build_potential();
    validate_potential(pot, grid);

    std::vector<double> cs;
    for (double c : {0.5, 1.0, 2.0})
        if (c < kernel.c_max()) cs.push_back(c);
    const auto rep = validate_hypotheses(kernel, validation_points(grid), cs);

    const double rev = reversibility_residual(kernel, grid, cfg.epsilons.front());

    std::ofstream f(fs::path(out_dir) / "validation.csv");
    f << "x1,x2,c,exp_moment,sq_moment,exp_moment_r1,sq_moment_r1,min_eig_B,continuity,continuity_half\n";
    for (const auto& p : rep.points)
        f << fmt(p.x[0]) << ',' << fmt(p.x[1]) << ',' << fmt(p.c) << ','
          << fmt(p.exp_moment_k0) << ',' << fmt(p.sq_moment_k0) << ','
          << fmt(p.exp_moment_r1) << ',' << fmt(p.sq_moment_r1) << ','
          << fmt(p.smallest_eig_B) << ',' << fmt(p.continuity_modulus) << ','
          << fmt(p.continuity_modulus_half) << "\n";
    f << "# reversibility_residual," << fmt(rev) << "\n";
    for (const auto& v : rep.violations) f << "# violation," << v << "\n";
    return rep.pass() ? 0 : 2;
}

void cmd_symbol(const ExperimentConfig& cfg, const std::string& out_dir) {
    const GridDomain grid = cfg.build_grid();
    const KernelSpec kernel = cfg.build_kernel();
    const SymbolEvaluator sym(kernel);
    std::ofstream f(fs::path(out_dir) / "symbol.csv");
    f << "x1,x2,xi,t0,t_tilde0,quadratic_part,remainder\n";
    const int stride = std::max(1, grid.node_count() / 16);
    const double ximax = std::min(1.0, 0.25 * kernel.c_max());
    for (int i = 0; i < grid.node_count(); i += stride) {
        const Vec x = grid.coord(i);
        const auto B = second_moment_matrix(kernel, x);
        for (int j = 1; j <= 10; ++j) {
            const Vec xi{ximax * j / 10.0, 0.0};
            const double q = B[0] * xi[0] * xi[0];
            const double tt = sym.t_tilde0(x, xi);
            f << fmt(x[0]) << ',' << fmt(x[1]) << ',' << fmt(xi[0]) << ','
              << fmt(sym.t0(x, xi)) << ',' << fmt(tt) << ',' << fmt(q) << ','
              << fmt(tt - q) << "\n";
        }
    }
}

DistanceField make_distance(const ExperimentConfig& cfg, const GridDomain& grid,
                            const KernelSpec& kernel, const PotentialSpec& pot,
                            const SymbolEvaluator& sym, LengthOracle& oracle) {
    if (grid.dim() == 2 && kernel.variant == KernelVariant::Atomic) {
        double vmax = 0;
        for (int i = 0; i < grid.node_count(); ++i)
            vmax = std::max(vmax, pot.v0(grid.coord(i)));
        oracle.build_support_table(vmax);
    }
    DistanceOptions dop;
    dop.stencil_radius = cfg.stencil_radius;
    return distance_field(grid, oracle, dop);
}

void cmd_distance(const ExperimentConfig& cfg, const std::string& out_dir) {
    const GridDomain grid = cfg.build_grid();
    const KernelSpec kernel = cfg.build_kernel();
    const PotentialSpec pot = cfg.build_potential();
    const SymbolEvaluator sym(kernel);
    LengthOracle oracle(sym, [&pot](const Vec& x) { return pot.v0(x); });
    DistanceField field = make_distance(cfg, grid, kernel, pot, sym, oracle);
    eikonal_residual(field, sym, [&pot](const Vec& x) { return pot.v0(x); });

    std::ofstream f(fs::path(out_dir) / "distance.csv");
    f << "node,x1,x2,d,residual_eq,residual_ineq,cutlocus_flag\n";
    for (int i = 0; i < grid.node_count(); ++i) {
        const Vec x = grid.coord(i);
        f << i << ',' << fmt(x[0]) << ',' << fmt(x[1]) << ',' << fmt(field.d[i]) << ','
          << fmt(field.residual_eq[i]) << ',' << fmt(field.residual_ineq[i]) << ','
          << int(field.cut_mask[i]) << "\n";
    }
}

void cmd_spectrum(const ExperimentConfig& cfg, const std::string& out_dir) {
    const GridDomain grid = cfg.build_grid();
    const KernelSpec kernel = cfg.build_kernel();
    const PotentialSpec pot = cfg.build_potential();
    bool first = true;
    for (const auto& mode : cfg.modes) {
        const FormMatrix H = assemble(grid, kernel, pot, cfg.epsilons.front(), mode_of(mode));
        const auto pairs = lowest_eigenpairs(H, cfg.k, cfg.solver_options());
        const std::string name = first ? "spectrum.csv" : "spectrum_" + mode + ".csv";
        std::ofstream f(fs::path(out_dir) / name);
        f << "index,lambda,residual\n";
        for (size_t i = 0; i < pairs.size(); ++i)
            f << i << ',' << fmt(pairs[i].lambda) << ',' << fmt(pairs[i].residual) << "\n";
        first = false;
    }
}

} // namespace

SweepResult agmon_sweep(const ExperimentConfig& cfg) {
    const GridDomain grid = cfg.build_grid();
    const KernelSpec kernel = cfg.build_kernel();
    const PotentialSpec pot = cfg.build_potential();
    const SymbolEvaluator sym(kernel);
    auto v0 = [&pot](const Vec& x) { return pot.v0(x); };

    LengthOracle oracle(sym, v0);
    DistanceField field = make_distance(cfg, grid, kernel, pot, sym, oracle);
    const auto eik = eikonal_residual(field, sym, v0);
    const std::vector<double>& d = field.d;

    const CutoffChi chi;
    SweepResult result;
    const double alpha = cfg.alphas.front();
    // the inner region is the discrete eikonal-equality region, so its defect
    // is bounded by the measured eikonal consistency error
    const double tol_inner = std::max(1e-2, 2.0 * eik.max_abs_eq_offcut);

    for (double eps : cfg.epsilons) {
        // per-node quadrature atoms of this epsilon (shared by the weights)
        std::vector<QuadratureAtoms> atoms;
        atoms.reserve(grid.node_count());
        for (int i = 0; i < grid.node_count(); ++i)
            atoms.push_back(quadrature(kernel, grid, i, eps));

        for (const auto& mode : cfg.modes) {
            SweepRow row;
            row.epsilon = eps;
            row.mode = mode;
            row.cut_count = eik.cut_count;

            const FormMatrix H = assemble(grid, kernel, pot, eps, mode_of(mode));
            const auto pairs = lowest_eigenpairs(H, 1, cfg.solver_options());
            const EigenPair& ground = pairs.front();
            row.E0 = ground.lambda;

            // C^2 route: Phi at the configured B
            const auto phi = phi_field(d, cfg.B, eps, chi);
            row.c_prime = phi_sandwich_constant(d, phi, cfg.B, eps);
            const auto vphi = v_phi(H, phi);
            const auto reg = three_region_check(grid, atoms, v0, H, phi, vphi, d,
                                                cfg.B, eps, cfg.D, cfg.eta);
            row.c0 = reg.c0;
            row.c2 = reg.c2;
            row.c3 = reg.c3;

            // Lipschitz route: Phi-tilde carries the O(1) outer bounds
            PhiAlphaResult pa = phi_alpha_field(grid, d, eps, cfg.B_alpha, alpha,
                                                cfg.D, cfg.eta, chi, cfg.delta);
            row.thm24_ok = pa.thm24_ok;
            row.delta_used = pa.delta_used;
            const auto vphit = v_phi(H, pa.phi_tilde);
            const auto regt = three_region_check(grid, atoms, v0, H, pa.phi_tilde, vphit,
                                                 d, cfg.B, eps, cfg.D, cfg.eta);
            row.c1 = regt.c1;
            row.c4 = regt.c4;
            row.region_pass = reg.pass(tol_inner) && regt.pass(tol_inner);

            // F+- at the configured B, Lemma 2.3 on the ground state
            const auto fpm = f_pm(H, vphi, ground.lambda, cfg.B, eps, d);
            row.min_f = fpm.min_f_over_sqrt_eps;
            const auto l23 = lemma23_check(H, ground.u, ground.lambda, phi, fpm);
            row.lemma23_slack = l23.slack_rel;

            // Omega- inclusion once B >= C0 (1 + R0 + C3)
            row.b_big = reg.c0 * (1.0 + cfg.R0 + std::max(0.0, reg.c3));
            const auto phib = phi_field(d, row.b_big, eps, chi);
            const auto vphib = v_phi(H, phib);
            const auto fpmb = f_pm(H, vphib, ground.lambda, row.b_big, eps, d);
            row.omega_in_core = fpmb.omega_in_core;

            const auto dec = decay_report(grid, d, ground, eps, cfg.B, alpha, cfg.D,
                                          &pa, row.c_prime);
            row.r1 = dec.r1;
            row.r2 = dec.r2;
            row.r3 = dec.r3;
            row.slope = dec.slope;

            result.pass = result.pass && row.region_pass && row.lemma23_slack >= 0 &&
                          row.omega_in_core;
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

namespace {

void emit_sweep(const SweepResult& res, const std::string& out_dir) {
    std::ofstream f(fs::path(out_dir) / "agmon.csv");
    f << "epsilon,mode,E0,r1,r2_alpha,r3,slope_fit,lemma23_slack,region_flags,"
         "C0,C1,C2,C3,C4,Cprime,B_big,omega_in_core,thm24_ok,min_F,delta,cut_count\n";
    for (const auto& r : res.rows) {
        f << fmt(r.epsilon) << ',' << r.mode << ',' << fmt(r.E0) << ',' << fmt(r.r1) << ','
          << fmt(r.r2) << ',' << fmt(r.r3) << ',' << fmt(r.slope) << ','
          << fmt(r.lemma23_slack) << ',' << (r.region_pass ? "pass" : "fail") << ','
          << fmt(r.c0) << ',' << fmt(r.c1) << ',' << fmt(r.c2) << ',' << fmt(r.c3) << ','
          << fmt(r.c4) << ',' << fmt(r.c_prime) << ',' << fmt(r.b_big) << ','
          << int(r.omega_in_core) << ',' << int(r.thm24_ok) << ',' << fmt(r.min_f) << ','
          << fmt(r.delta_used) << ',' << r.cut_count << "\n";
    }
}

} // namespace

int run_command(const ExperimentConfig& cfg, const std::string& command,
                const std::string& out_dir, bool /*serial: execution is serial*/) {
    fs::create_directories(out_dir);
    Timings tm;
    int code = 0;
    try {
        if (command == "validate") {
            code = cmd_validate(cfg, out_dir);
            tm.mark("validate");
        } else if (command == "symbol") {
            cmd_symbol(cfg, out_dir);
            tm.mark("symbol");
        } else if (command == "distance") {
            cmd_distance(cfg, out_dir);
            tm.mark("distance");
        } else if (command == "spectrum") {
            cmd_spectrum(cfg, out_dir);
            tm.mark("spectrum");
        } else if (command == "agmon-sweep") {
            const auto res = agmon_sweep(cfg);
            emit_sweep(res, out_dir);
            tm.mark("agmon-sweep");
        } else if (command == "report") {
            code = cmd_validate(cfg, out_dir);
            tm.mark("validate");
            cmd_symbol(cfg, out_dir);
            tm.mark("symbol");
            cmd_distance(cfg, out_dir);
            tm.mark("distance");
            cmd_spectrum(cfg, out_dir);
            tm.mark("spectrum");
            const auto res = agmon_sweep(cfg);
            emit_sweep(res, out_dir);
            tm.mark("agmon-sweep");
            std::ofstream f(fs::path(out_dir) / "summary.txt");
            f << (code == 0 && res.pass ? "PASS" : "FAIL") << "\n";
        } else {
            throw config_error("unknown command '" + command +
                               "'; expected one of: validate, symbol, distance, spectrum, "
                               "agmon-sweep, report");
        }
    } catch (...) {
        write_manifest(cfg, out_dir, command, tm, "failed");
        throw;
    }
    write_manifest(cfg, out_dir, command, tm, code == 0 ? "ok" : "violations");
    return code;
}

} // namespace agmon
