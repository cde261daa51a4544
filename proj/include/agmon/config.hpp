#pragma once

#include <map>
#include <string>
#include <vector>

#include "agmon/finsler.hpp"
#include "agmon/form.hpp"
#include "agmon/geometry.hpp"
#include "agmon/kernel.hpp"
#include "agmon/spectra.hpp"

namespace agmon {

/// Plain sectioned key = value configuration. Repeated keys accumulate
/// (atoms, wells). Parse errors name the offending key and line.
struct ExperimentConfig {
    // [kernel]
    int kernel_dim = 1;
    std::string kernel_variant = "atomic";
    struct AtomLine {
        Vec offset{0, 0};
        double weight = 0;
        double r1 = 0;
    };
    std::vector<AtomLine> atom_lines;
    std::string profile = "gaussian";
    double profile_scale = 1.0;
    double density_weight = 1.0;
    double density_r1 = 0.0;
    double singularity = -1.0; // <0: none

    // [potential]
    std::string family = "quadratic";
    std::array<double, 3> quad{1, 1, 0};
    double quartic_a = 1, quartic_b = 1;
    double ig_amp = 1, ig_sigma = 1;
    std::vector<Vec> wells;
    std::string r1_kind = "none"; // none | ripple
    double r1_amp = 0;

    // [domain]
    int dim = 1;
    Vec box_lo{-2, -2}, box_hi{2, 2};
    double h = 0.01;
    std::string sigma_shape = "box";
    Vec ball_center{0, 0};
    double ball_radius = 1;
    Vec well{0, 0};

    // [sweep]
    std::vector<double> epsilons{0.1, 0.05};
    double B = 6;
    double B_alpha = 2;
    std::vector<double> alphas{0.8, 0.3};
    double R0 = 5;
    double D = 1.6;
    double eta = 0.25;
    double delta = 0.05;
    int stencil_radius = 4;
    std::vector<std::string> modes{"dirichlet", "neumann"};

    // [solver]
    int k = 4;
    double tol = 1e-10;
    int max_iter = 400;
    int cg_max = 50000;
    unsigned seed = 42;

    // [output]
    std::string out_dir = "out";

    std::string raw_text; // config echo for the run manifest

    GridDomain build_grid() const;
    KernelSpec build_kernel() const;
    PotentialSpec build_potential() const;
    SolverOptions solver_options() const;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

} // namespace agmon
