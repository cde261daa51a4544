#include "agmon/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "agmon/quad.hpp"

namespace agmon {

double RadialProfile::operator()(double r) const {
    switch (tail) {
        case TailClass::Gaussian: {
            const double t = r / scale;
            return std::exp(-t * t);
        }
        case TailClass::Exponential:
            return std::exp(-r / scale);
        case TailClass::Compact: {
            if (r >= scale) return 0.0;
            const double t = 1.0 - (r / scale) * (r / scale);
            return t * t;
        }
    }
    return 0.0;
}

double RadialProfile::suggested_radius(double tol) const {
    switch (tail) {
        case TailClass::Gaussian:
            return scale * (std::sqrt(std::log(1.0 / tol)) + 1.0);
        case TailClass::Exponential:
            return scale * (std::log(1.0 / tol) + 8.0);
        case TailClass::Compact:
            return scale;
    }
    return 4.0;
}

double KernelSpec::c_max() const {
    if (variant == KernelVariant::Atomic) return std::numeric_limits<double>::infinity();
    return profile.c_max();
}

bool KernelSpec::has_perturbation() const {
    if (variant == KernelVariant::Atomic) {
        for (const auto& a : atoms)
            if (a.r1_weight) return true;
        return false;
    }
    return static_cast<bool>(r1_weight);
}

double KernelSpec::density_k0(const Vec& x, double r) const {
    double v = profile(r) * weight(x);
    if (singularity && r > 0) v *= std::pow(r, -dim - *singularity);
    return v;
}

double KernelSpec::tilt_factor(const Vec& x, const Vec& y, double eps) const {
    if (tilts.empty()) return 1.0;
    double expo = 0.0;
    for (const auto& t : tilts) expo += t.sign * (t.F(y) - t.F(x));
    return std::exp(expo / (2.0 * eps));
}

namespace {

double angular_measure(int dim) { return dim == 2 ? 2.0 * M_PI : 2.0; }

// int_a^b g(r) rho(r) r^{d-1} dr against the K0 radial density (weight factored out)
double radial_density_integral(const KernelSpec& k, const std::function<double(double)>& g,
                               double a, double b, double tol = 1e-11) {
    auto f = [&](double r) {
        double rho = k.profile(r);
        if (k.singularity && r > 0) rho *= std::pow(r, -k.dim - *k.singularity);
        return g(r) * rho * (k.dim == 2 ? r : 1.0);
    };
    return adaptive_gl(f, a, b, tol);
}

double moment_cutoff_radius(const KernelSpec& k, double c) {
    if (c >= k.c_max())
        throw hypothesis_error("exponential moment requested at c >= c_max");
    switch (k.profile.tail) {
        case TailClass::Gaussian:
            return std::max(4.0, k.profile.scale * (std::sqrt(std::log(1e16)) + c * k.profile.scale + 2.0));
        case TailClass::Exponential: {
            const double kappa = 1.0 / k.profile.scale;
            return 1.0 + 40.0 / (kappa - c);
        }
        case TailClass::Compact:
            return k.profile.scale + 1.0;
    }
    return 8.0;
}

} // namespace

void jump_weight(const KernelSpec& k, const GridDomain& grid, int node,
                 const LatticeOffset& z, int m, double eps, double& w_full,
                 double& w_k0, bool& exit_flag, int atom_index) {
    const LatticeOffset ki = grid.lattice_of(node);
    const LatticeOffset kt{ki[0] + z[0], ki[1] + z[1]};
    const Vec x = grid.coord(node);
    const Vec y = grid.coord_of(kt);
    exit_flag = grid.node_at(kt) < 0 || !grid.inside(y);
    const Vec rule_pt = (k.spatial_rule == SpatialRule::Midpoint) ? grid.midpoint_of(ki, kt) : x;

    if (k.variant == KernelVariant::Atomic) {
        const AtomSpec& a = k.atoms[static_cast<size_t>(atom_index)];
        w_k0 = a.weight(x);
        w_full = a.weight(rule_pt);
        if (a.r1_weight) w_full += eps * a.r1_weight(rule_pt);
    } else {
        Vec gamma{z[0] / double(m), z[1] / double(m)};
        const double r = norm(gamma, k.dim);
        const double vol = (k.dim == 2) ? 1.0 / double(m) / double(m) : 1.0 / double(m);
        double rho = k.profile(r);
        if (k.singularity && r > 0) rho *= std::pow(r, -k.dim - *k.singularity);
        w_k0 = rho * k.weight(x) * vol;
        double wf = rho * k.weight(rule_pt);
        if (k.r1_weight) wf += eps * rho * k.r1_weight(rule_pt);
        w_full = wf * vol;
    }
    w_full *= k.tilt_factor(x, y, eps);
}

int atom_index_for(const KernelSpec& kernel, int m, const LatticeOffset& z) {
    if (kernel.variant != KernelVariant::Atomic) return -1;
    for (size_t i = 0; i < kernel.atoms.size(); ++i) {
        bool match = true;
        for (int a = 0; a < kernel.dim; ++a) {
            const double za = m * kernel.atoms[i].offset[a];
            if (static_cast<int>(std::lround(za)) != z[a]) match = false;
        }
        if (kernel.dim == 1 && z[1] != 0) match = false;
        if (match) return static_cast<int>(i);
    }
    return -1;
}

QuadratureAtoms quadrature(const KernelSpec& kernel, const GridDomain& grid,
                           int node, double eps, const QuadratureOptions& opt) {
    QuadratureAtoms out;
    out.node = node;
    out.x = grid.coord(node);
    const int m = grid.alignment(eps);
    out.m = m;

    if (kernel.variant == KernelVariant::Atomic) {
        double rmax = 1.0;
        for (size_t i = 0; i < kernel.atoms.size(); ++i) {
            const Vec g = kernel.atoms[i].offset;
            LatticeOffset z{0, 0};
            for (int a = 0; a < kernel.dim; ++a) {
                const double za = m * g[a];
                z[a] = static_cast<int>(std::lround(za));
                if (std::abs(za - z[a]) > 1e-9)
                    throw config_error("atomic offset " + std::to_string(g[a]) +
                                       " is not lattice-aligned at eps/h = " + std::to_string(m));
            }
            QuadAtom qa;
            qa.z = z;
            jump_weight(kernel, grid, node, z, m, eps, qa.w, qa.w_k0, qa.exit,
                        static_cast<int>(i));
            out.atoms.push_back(qa);
            out.riemann_mass += qa.w_k0;
            rmax = std::max(rmax, norm(g, kernel.dim));
        }
        out.truncation_radius = rmax;
        return out;
    }

    double R = opt.radius;
    if (R <= 0) {
        R = std::max(4.0, 10.0 * eps * std::log(1.0 / opt.tail_tol));
        R = std::min(R, kernel.profile.suggested_radius(opt.tail_tol));
        R = std::max(R, 2.0); // never truncate below the unit-jump scale
    }
    out.truncation_radius = R;

    const int zmax = static_cast<int>(std::floor(m * R));
    const double zr2 = double(m) * R * double(m) * R;
    const int jmax = kernel.dim == 2 ? zmax : 0;
    for (int i = -zmax; i <= zmax; ++i) {
        for (int j = -jmax; j <= jmax; ++j) {
            if (i == 0 && j == 0) continue;
            if (double(i) * i + double(j) * j > zr2) continue;
            QuadAtom qa;
            qa.z = {i, j};
            jump_weight(kernel, grid, node, qa.z, m, eps, qa.w, qa.w_k0, qa.exit);
            out.atoms.push_back(qa);
            out.riemann_mass += qa.w_k0;
        }
    }

    const double ang = angular_measure(kernel.dim);
    if (!kernel.singularity) {
        // complete the Riemann sum with the origin sample; the energy form never
        // uses it (u(x)-u(x)=0) but the mass diagnostic should track int rho
        const double vol = kernel.dim == 2 ? 1.0 / double(m) / double(m) : 1.0 / double(m);
        out.riemann_mass += kernel.density_k0(out.x, 0.0) * vol;
        out.dropped_small = 0.0;
    } else {
        out.dropped_small = kernel.weight(out.x) * ang *
            radial_density_integral(kernel, [](double r) { return r * r; }, 0.0, 0.5 / m);
    }

    if (kernel.profile.tail == TailClass::Compact && R >= kernel.profile.scale) {
        out.tail_mass = 0.0;
    } else {
        const double far = R + moment_cutoff_radius(kernel, 0.0);
        out.tail_mass = kernel.weight(out.x) * ang *
            radial_density_integral(kernel, [](double) { return 1.0; }, R, far);
    }
    return out;
}

double exp_moment(const KernelSpec& k, const Vec& x, double c) {
    if (k.variant == KernelVariant::Atomic) {
        double s = 0.0;
        for (const auto& a : k.atoms) {
            const double r = norm(a.offset, k.dim);
            if (r >= 1.0) s += a.weight(x) * std::exp(c * r);
        }
        return s;
    }
    const double R = moment_cutoff_radius(k, c);
    return k.weight(x) * angular_measure(k.dim) *
        radial_density_integral(k, [c](double r) { return std::exp(c * r); }, 1.0, R);
}

double square_moment(const KernelSpec& k, const Vec& x) {
    if (k.variant == KernelVariant::Atomic) {
        double s = 0.0;
        for (const auto& a : k.atoms) {
            const double r = norm(a.offset, k.dim);
            if (r <= 1.0) s += a.weight(x) * r * r;
        }
        return s;
    }
    return k.weight(x) * angular_measure(k.dim) *
        radial_density_integral(k, [](double r) { return r * r; }, 0.0, 1.0);
}

double exp_moment_r1(const KernelSpec& k, const Vec& x, double c) {
    if (k.variant == KernelVariant::Atomic) {
        double s = 0.0;
        for (const auto& a : k.atoms) {
            const double r = norm(a.offset, k.dim);
            if (r >= 1.0 && a.r1_weight) s += std::abs(a.r1_weight(x)) * std::exp(c * r);
        }
        return s;
    }
    if (!k.r1_weight) return 0.0;
    const double R = moment_cutoff_radius(k, c);
    return std::abs(k.r1_weight(x)) * angular_measure(k.dim) *
        radial_density_integral(k, [c](double r) { return std::exp(c * r); }, 1.0, R);
}

double square_moment_r1(const KernelSpec& k, const Vec& x) {
    if (k.variant == KernelVariant::Atomic) {
        double s = 0.0;
        for (const auto& a : k.atoms) {
            const double r = norm(a.offset, k.dim);
            if (r <= 1.0 && a.r1_weight) s += std::abs(a.r1_weight(x)) * r * r;
        }
        return s;
    }
    if (!k.r1_weight) return 0.0;
    return std::abs(k.r1_weight(x)) * angular_measure(k.dim) *
        radial_density_integral(k, [](double r) { return r * r; }, 0.0, 1.0);
}

std::array<double, 3> second_moment_matrix(const KernelSpec& k, const Vec& x) {
    if (k.variant == KernelVariant::Atomic) {
        double b11 = 0, b22 = 0, b12 = 0;
        for (const auto& a : k.atoms) {
            const double w = 0.5 * a.weight(x);
            b11 += w * a.offset[0] * a.offset[0];
            b22 += w * a.offset[1] * a.offset[1];
            b12 += w * a.offset[0] * a.offset[1];
        }
        return {b11, b22, b12};
    }
    const double R = moment_cutoff_radius(k, 0.0);
    const double m2 = radial_density_integral(
        k, [](double r) { return r * r; }, 0.0, R);
    if (k.dim == 1) return {0.5 * k.weight(x) * 2.0 * m2, 0.0, 0.0};
    // isotropic in 2D: int gamma_i gamma_j rho dgamma = pi int r^3 rho dr * delta_ij
    const double b = 0.5 * M_PI * k.weight(x) * m2;
    return {b, b, 0.0};
}

double smallest_eig_B(const KernelSpec& k, const Vec& x) {
    const auto B = second_moment_matrix(k, x);
    if (k.dim == 1) return B[0];
    const double tr = B[0] + B[1];
    const double disc = std::sqrt(std::max(0.0, (B[0] - B[1]) * (B[0] - B[1]) + 4 * B[2] * B[2]));
    return 0.5 * (tr - disc);
}

namespace {

double continuity_probe(const KernelSpec& k, const Vec& x, double c, double delta) {
    // int |gamma|^2 e^{c|gamma|} |K0(x+delta e_a) - K0(x)| maximized over axes
    double worst = 0.0;
    for (int a = 0; a < k.dim; ++a) {
        Vec xp = x;
        xp[a] += delta;
        double v = 0.0;
        if (k.variant == KernelVariant::Atomic) {
            for (const auto& at : k.atoms) {
                const double r = norm(at.offset, k.dim);
                v += std::abs(at.weight(xp) - at.weight(x)) * r * r * std::exp(c * r);
            }
        } else {
            const double R = moment_cutoff_radius(k, c);
            v = std::abs(k.weight(xp) - k.weight(x)) * angular_measure(k.dim) *
                radial_density_integral(
                    k, [c](double r) { return r * r * std::exp(c * r); }, 0.0, R);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

ValidationReport validate_hypotheses(const KernelSpec& kernel,
                                     const std::vector<Vec>& sample_points,
                                     const std::vector<double>& c_values,
                                     double nondegeneracy_floor,
                                     double continuity_step) {
    ValidationReport rep;
    for (double c : c_values)
        if (c >= kernel.c_max())
            throw hypothesis_error("requested moment radius c = " + std::to_string(c) +
                                   " is not below c_max");

    if (kernel.variant == KernelVariant::Atomic) {
        // structural +-pairing: every atom needs a mirror with matching weights
        for (size_t i = 0; i < kernel.atoms.size(); ++i) {
            bool found = false;
            for (size_t j = 0; j < kernel.atoms.size(); ++j) {
                const auto& a = kernel.atoms[i];
                const auto& b = kernel.atoms[j];
                if (std::abs(a.offset[0] + b.offset[0]) > 1e-12 ||
                    std::abs(a.offset[1] + b.offset[1]) > 1e-12)
                    continue;
                bool same = true;
                for (const Vec& p : {Vec{0.13, -0.4}, Vec{-0.71, 0.22}, Vec{1.9, 0.77}})
                    if (std::abs(a.weight(p) - b.weight(p)) > 1e-12 * (1 + std::abs(a.weight(p))))
                        same = false;
                if (same) { found = true; break; }
            }
            if (!found)
                rep.violations.push_back("atomic kernel: offset without a matching mirror atom (reversibility)");
        }
    }

    for (const Vec& x : sample_points) {
        for (double c : c_values) {
            PointValidation pv;
            pv.x = x;
            pv.c = c;
            pv.exp_moment_k0 = exp_moment(kernel, x, c);
            pv.sq_moment_k0 = square_moment(kernel, x);
            pv.exp_moment_r1 = exp_moment_r1(kernel, x, c);
            pv.sq_moment_r1 = square_moment_r1(kernel, x);
            pv.smallest_eig_B = smallest_eig_B(kernel, x);
            pv.continuity_modulus = continuity_probe(kernel, x, c, continuity_step);
            pv.continuity_modulus_half = continuity_probe(kernel, x, c, 0.5 * continuity_step);
            if (!(pv.exp_moment_k0 < std::numeric_limits<double>::infinity()) ||
                !std::isfinite(pv.exp_moment_k0))
                rep.violations.push_back("exponential moment diverged");
            if (pv.smallest_eig_B < nondegeneracy_floor)
                rep.violations.push_back("nondegeneracy: smallest eigenvalue of B(x) is " +
                                         std::to_string(pv.smallest_eig_B));
            if (pv.continuity_modulus > 1e-12 &&
                pv.continuity_modulus_half > 0.75 * pv.continuity_modulus)
                rep.violations.push_back("K0 continuity modulus does not shrink with the probe step");
            rep.points.push_back(pv);
        }
    }
    return rep;
}

double reversibility_residual(const KernelSpec& kernel, const GridDomain& grid,
                              double eps, int node_stride) {
    const int m = grid.alignment(eps);
    double worst = 0.0;
    for (int n = 0; n < grid.node_count(); n += std::max(1, node_stride)) {
        const QuadratureAtoms qa = quadrature(kernel, grid, n, eps);
        for (const auto& at : qa.atoms) {
            if (at.exit) continue;
            const int t = grid.neighbor(n, at.z);
            if (t < 0) continue;
            const LatticeOffset back{-at.z[0], -at.z[1]};
            double wb, wb_k0;
            bool ex;
            int atom_index = -1;
            if (kernel.variant == KernelVariant::Atomic) {
                atom_index = atom_index_for(kernel, m, back);
                if (atom_index < 0) {
                    worst = std::max(worst, at.w); // no return jump at all
                    continue;
                }
            }
            jump_weight(kernel, grid, t, back, m, eps, wb, wb_k0, ex, atom_index);
            worst = std::max(worst, std::abs(at.w - wb));
        }
    }
    return worst;
}

GroundStateTransform ground_state_transform(const KernelSpec& base, const SpatialFn& F,
                                            const GridDomain& grid, double eps,
                                            const QuadratureOptions& opt) {
    if (base.variant == KernelVariant::Density && base.singularity)
        throw hypothesis_error("ground-state transform requires a kernel with finite total mass");

    // Lipschitz budget of F against the exponential-moment radius
    double lip = 0.0;
    const double h = grid.spacing();
    for (int n = 0; n < grid.node_count(); n += 3) {
        const Vec x = grid.coord(n);
        for (int a = 0; a < grid.dim(); ++a) {
            Vec xp = x;
            xp[a] += h;
            lip = std::max(lip, std::abs(F(xp) - F(x)) / h);
        }
    }
    if (0.5 * lip >= base.c_max())
        throw hypothesis_error("ground-state transform: Lipschitz(F)/2 exceeds the c_max moment budget");

    GroundStateTransform out;
    out.kernel = base;
    out.kernel.tilts.push_back(TiltSpec{F, +1.0});

    out.v_eps.assign(grid.node_count(), 0.0);
    double vmin = 0.0;
    for (int n = 0; n < grid.node_count(); ++n) {
        const QuadratureAtoms qa = quadrature(base, grid, n, eps, opt);
        const Vec x = qa.x;
        const LatticeOffset ki = grid.lattice_of(n);
        double v = 0.0;
        for (const auto& at : qa.atoms) {
            const LatticeOffset kt{ki[0] + at.z[0], ki[1] + at.z[1]};
            const Vec y = grid.coord_of(kt);
            const double expo = (F(y) - F(x)) / (2.0 * eps);
            v += at.w * (1.0 - std::exp(expo));
        }
        out.v_eps[n] = v;
        vmin = std::min(vmin, v);
    }
    out.c_reported = std::max(0.0, -vmin) / eps;
    return out;
}

} // namespace agmon
