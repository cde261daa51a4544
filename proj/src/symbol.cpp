#include "agmon/symbol.hpp"

#include <cmath>
#include <random>

#include "agmon/quad.hpp"

namespace agmon {

SymbolEvaluator::SymbolEvaluator(const KernelSpec& kernel, double tol)
    : kernel_(&kernel), tol_(tol) {
    if (kernel.has_tilt())
        throw config_error("symbol evaluation is defined for untilted kernels");
}

void SymbolEvaluator::check_domain(const Vec& xi) const {
    if (norm(xi, dim()) >= admissible_radius())
        throw hypothesis_error("symbol evaluated outside the admissible strip |xi| < c_max");
}

double SymbolEvaluator::radial_cutoff(double s) const {
    const RadialProfile& p = kernel_->profile;
    switch (p.tail) {
        case TailClass::Gaussian:
            return p.scale * (std::sqrt(std::log(1e16)) + s * p.scale + 2.0);
        case TailClass::Exponential: {
            const double kappa = 1.0 / p.scale;
            return 1.0 + 45.0 / (kappa - s);
        }
        case TailClass::Compact:
            return p.scale;
    }
    return 8.0;
}

namespace {

double radial_int(const KernelSpec& k, const std::function<double(double)>& g,
                  double R, double tol) {
    auto f = [&](double r) {
        double rho = k.profile(r);
        if (k.singularity && r > 0) rho *= std::pow(r, -k.dim - *k.singularity);
        return g(r) * rho * (k.dim == 2 ? r : 1.0);
    };
    return adaptive_gl(f, 0.0, R, tol);
}

} // namespace

double SymbolEvaluator::t_tilde0(const Vec& x, const Vec& xi) const {
    check_domain(xi);
    const KernelSpec& k = *kernel_;
    if (k.variant == KernelVariant::Atomic) {
        double s = 0.0;
        for (const auto& a : k.atoms) s += a.weight(x) * (std::cosh(dot(a.offset, xi, k.dim)) - 1.0);
        return s;
    }
    const double s = norm(xi, k.dim);
    if (k.profile.tail == TailClass::Gaussian && !k.singularity) {
        const double sg = k.profile.scale;
        const double e = std::expm1(sg * sg * s * s / 4.0);
        return k.weight(x) * (k.dim == 1 ? sg * std::sqrt(M_PI) : M_PI * sg * sg) * e;
    }
    const double R = radial_cutoff(s);
    if (k.dim == 1)
        return k.weight(x) * 2.0 *
               radial_int(k, [s](double r) { return std::cosh(r * s) - 1.0; }, R, tol_);
    return k.weight(x) * 2.0 * M_PI *
           radial_int(k, [s](double r) { return std::cyl_bessel_i(0.0, r * s) - 1.0; }, R, tol_);
}

double SymbolEvaluator::t0(const Vec& x, const Vec& xi) const {
    const KernelSpec& k = *kernel_;
    if (k.variant == KernelVariant::Atomic) {
        double s = 0.0;
        for (const auto& a : k.atoms) s += a.weight(x) * (1.0 - std::cos(dot(a.offset, xi, k.dim)));
        return s;
    }
    const double s = norm(xi, k.dim);
    if (k.profile.tail == TailClass::Gaussian && !k.singularity) {
        const double sg = k.profile.scale;
        const double e = -std::expm1(-sg * sg * s * s / 4.0);
        return k.weight(x) * (k.dim == 1 ? sg * std::sqrt(M_PI) : M_PI * sg * sg) * e;
    }
    const double R = radial_cutoff(0.0);
    if (k.dim == 1)
        return k.weight(x) * 2.0 *
               radial_int(k, [s](double r) { return 1.0 - std::cos(r * s); }, R, tol_);
    return k.weight(x) * 2.0 * M_PI *
           radial_int(k, [s](double r) { return 1.0 - std::cyl_bessel_j(0.0, r * s); }, R, tol_);
}

Vec SymbolEvaluator::grad_t_tilde0(const Vec& x, const Vec& xi) const {
    check_domain(xi);
    const KernelSpec& k = *kernel_;
    if (k.variant == KernelVariant::Atomic) {
        Vec g{0, 0};
        for (const auto& a : k.atoms) {
            const double s = a.weight(x) * std::sinh(dot(a.offset, xi, k.dim));
            g[0] += s * a.offset[0];
            g[1] += s * a.offset[1];
        }
        return g;
    }
    const double s = norm(xi, k.dim);
    if (k.profile.tail == TailClass::Gaussian && !k.singularity) {
        const double sg = k.profile.scale;
        const double pref = k.weight(x) * (k.dim == 1 ? sg * std::sqrt(M_PI) : M_PI * sg * sg) *
                            std::exp(sg * sg * s * s / 4.0) * sg * sg * 0.5;
        return Vec{pref * xi[0], pref * xi[1]};
    }
    if (s < 1e-14) return Vec{0, 0};
    const double R = radial_cutoff(s);
    double dr;
    if (k.dim == 1)
        dr = k.weight(x) * 2.0 *
             radial_int(k, [s](double r) { return r * std::sinh(r * s); }, R, tol_);
    else
        dr = k.weight(x) * 2.0 * M_PI *
             radial_int(k, [s](double r) { return r * std::cyl_bessel_i(1.0, r * s); }, R, tol_);
    return Vec{dr * xi[0] / s, dr * xi[1] / s};
}

double SymbolEvaluator::hess_quadform(const Vec& x, const Vec& xi, const Vec& v) const {
    check_domain(xi);
    const KernelSpec& k = *kernel_;
    if (k.variant == KernelVariant::Atomic) {
        double q = 0.0;
        for (const auto& a : k.atoms) {
            const double gv = dot(a.offset, v, k.dim);
            q += a.weight(x) * gv * gv * std::cosh(dot(a.offset, xi, k.dim));
        }
        return q;
    }
    const double s = norm(xi, k.dim);
    if (k.profile.tail == TailClass::Gaussian && !k.singularity) {
        const double sg = k.profile.scale;
        const double pref = k.weight(x) * (k.dim == 1 ? sg * std::sqrt(M_PI) : M_PI * sg * sg) *
                            std::exp(sg * sg * s * s / 4.0);
        const double xv = dot(xi, v, k.dim);
        return pref * (0.5 * sg * sg * dot(v, v, k.dim) + 0.25 * sg * sg * sg * sg * xv * xv);
    }
    const auto B = second_moment_matrix(k, x);
    if (s < 1e-8) {
        // D^2 -> 2B at xi = 0
        return 2.0 * (B[0] * v[0] * v[0] + B[1] * v[1] * v[1] + 2 * B[2] * v[0] * v[1]);
    }
    const double R = radial_cutoff(s);
    if (k.dim == 1)
        return k.weight(x) * 2.0 *
               radial_int(k, [s](double r) { return r * r * std::cosh(r * s); }, R, tol_) *
               v[0] * v[0];
    // isotropic: D^2 = f'' uhat uhat^T + (f'/s)(I - uhat uhat^T) with u = xi
    const double fp = k.weight(x) * 2.0 * M_PI *
        radial_int(k, [s](double r) { return r * std::cyl_bessel_i(1.0, r * s); }, R, tol_);
    const double fpp = k.weight(x) * 2.0 * M_PI *
        radial_int(k,
                   [s](double r) {
                       return r * r * 0.5 *
                              (std::cyl_bessel_i(0.0, r * s) + std::cyl_bessel_i(2.0, r * s));
                   },
                   R, tol_);
    const double vpar = dot(xi, v, k.dim) / s;
    const double vperp2 = dot(v, v, k.dim) - vpar * vpar;
    return fpp * vpar * vpar + (fp / s) * vperp2;
}

double t_tilde0_sigma(const QuadratureAtoms& atoms, const Vec& xi, int dim) {
    double s = 0.0;
    for (const auto& a : atoms.atoms) {
        if (a.exit) continue;
        const Vec g{a.z[0] / double(atoms.m), a.z[1] / double(atoms.m)};
        s += a.w_k0 * (std::cosh(dot(g, xi, dim)) - 1.0);
    }
    return s;
}

double t_tilde0_grid(const QuadratureAtoms& atoms, const Vec& xi, int dim) {
    double s = 0.0;
    for (const auto& a : atoms.atoms) {
        const Vec g{a.z[0] / double(atoms.m), a.z[1] / double(atoms.m)};
        s += a.w_k0 * (std::cosh(dot(g, xi, dim)) - 1.0);
    }
    return s;
}

double convexity_certificate(const SymbolEvaluator& sym, const Vec& x, double rho,
                             int samples, unsigned seed) {
    if (rho >= sym.admissible_radius())
        throw hypothesis_error("convexity certificate: ball radius must stay below c_max");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double alpha = std::numeric_limits<double>::infinity();
    const int dim = sym.dim();
    for (int i = 0; i < samples; ++i) {
        Vec xi{0, 0};
        if (i > 0) { // always include xi = 0
            do {
                xi[0] = rho * unif(rng);
                if (dim == 2) xi[1] = rho * unif(rng);
            } while (norm(xi, dim) > rho);
        }
        double lam;
        if (dim == 1) {
            lam = sym.hess_quadform(x, xi, Vec{1, 0});
        } else {
            const double d11 = sym.hess_quadform(x, xi, Vec{1, 0});
            const double d22 = sym.hess_quadform(x, xi, Vec{0, 1});
            const double d12 =
                0.5 * (sym.hess_quadform(x, xi, Vec{1, 1}) - d11 - d22);
            const double tr = d11 + d22;
            const double disc = std::sqrt(std::max(0.0, (d11 - d22) * (d11 - d22) + 4 * d12 * d12));
            lam = 0.5 * (tr - disc);
        }
        alpha = std::min(alpha, lam);
    }
    if (!(alpha > 0))
        throw hypothesis_error("hyperconvexity violated: sampled D^2 t_tilde0 not positive definite");
    return alpha;
}

std::vector<QuarticRemainder> quartic_remainder(const SymbolEvaluator& sym, const Vec& x,
                                                const std::vector<Vec>& xis) {
    const auto B = second_moment_matrix(sym.kernel(), x);
    std::vector<QuarticRemainder> out;
    out.reserve(xis.size());
    for (const Vec& xi : xis) {
        const double quad = B[0] * xi[0] * xi[0] + B[1] * xi[1] * xi[1] + 2 * B[2] * xi[0] * xi[1];
        const double rem = sym.t_tilde0(x, xi) - quad;
        if (rem < -1e-12)
            throw numeric_error("quartic remainder negative: " + std::to_string(rem));
        const double r2 = dot(xi, xi, sym.dim());
        out.push_back({xi, rem, r2 > 0 ? rem / (r2 * r2) : 0.0});
    }
    return out;
}

} // namespace agmon
