#include "agmon/form.hpp"

#include <algorithm>
#include <cmath>

namespace agmon {

double PotentialSpec::v0(const Vec& x) const {
    switch (family) {
        case PotentialFamily::Quadratic:
            return quad[0] * x[0] * x[0] + quad[1] * x[1] * x[1] + 2 * quad[2] * x[0] * x[1];
        case PotentialFamily::QuarticDoubleWell: {
            const double t = x[0] * x[0] - quartic_b * quartic_b;
            return quartic_a * t * t;
        }
        case PotentialFamily::InvertedGaussian: {
            double s = 0.0;
            for (const auto& m : wells) {
                const Vec r{x[0] - m[0], x[1] - m[1]};
                s += std::exp(-dot(r, r, dim) / (2 * ig_sigma * ig_sigma));
            }
            return ig_amp * std::max(0.0, 1.0 - s);
        }
    }
    return 0.0;
}

void validate_potential(const PotentialSpec& pot, const GridDomain& grid) {
    for (int i = 0; i < grid.node_count(); i += 3) {
        if (pot.v0(grid.coord(i)) < -1e-14)
            throw hypothesis_error("potential: V0 negative at a grid node");
    }
    const double h = grid.spacing();
    for (const Vec& w : pot.wells) {
        if (std::abs(pot.v0(w)) > 1e-10)
            throw hypothesis_error("potential: declared well is not a zero of V0");
        // finite-difference Hessian, positive definite per Hypothesis
        double h11, h22 = 1.0, h12 = 0.0;
        auto vv = [&](double a, double b) { return pot.v0(Vec{w[0] + a, w[1] + b}); };
        h11 = (vv(h, 0) - 2 * vv(0, 0) + vv(-h, 0)) / (h * h);
        if (pot.dim == 2) {
            h22 = (vv(0, h) - 2 * vv(0, 0) + vv(0, -h)) / (h * h);
            h12 = (vv(h, h) - vv(h, -h) - vv(-h, h) + vv(-h, -h)) / (4 * h * h);
        }
        const double tr = h11 + h22;
        const double det = h11 * h22 - h12 * h12;
        const bool pd = pot.dim == 1 ? h11 > 0 : (tr > 0 && det > 0);
        if (!pd) throw hypothesis_error("potential: well Hessian is not positive definite");
    }
}

FormMatrix assemble(const GridDomain& grid, const KernelSpec& kernel,
                    const PotentialSpec& potential, double eps, BoundaryMode mode,
                    const QuadratureOptions& opt) {
    const int m = grid.alignment(eps);
    if (!grid.connected()) throw config_error("assemble: Sigma is not connected");

    FormMatrix F;
    F.grid = &grid;
    F.mode = mode;
    F.eps = eps;
    F.kappa.assign(grid.node_count(), 0.0);
    F.vdiag.assign(grid.node_count(), 0.0);

    for (int i = 0; i < grid.node_count(); ++i) {
        F.vdiag[i] = potential.v_eps(grid.coord(i), eps);
        const QuadratureAtoms qa = quadrature(kernel, grid, i, eps, opt);
        for (const auto& at : qa.atoms) {
            if (at.exit) {
                F.kappa[i] += at.w;
                continue;
            }
            // process each unordered pair once, from the lexicographically
            // positive direction
            if (at.z[0] < 0 || (at.z[0] == 0 && at.z[1] < 0)) continue;
            const int j = grid.neighbor(i, at.z);
            const LatticeOffset back{-at.z[0], -at.z[1]};
            double w_ji, w_ji_k0;
            bool ex;
            const int rev = atom_index_for(kernel, m, back);
            if (kernel.variant == KernelVariant::Atomic && rev < 0) {
                w_ji = 0.0;
            } else {
                jump_weight(kernel, grid, j, back, m, eps, w_ji, w_ji_k0, ex, rev);
            }
            F.pairs.push_back({i, j, at.w, w_ji});
            F.asymmetry = std::max(F.asymmetry, std::abs(at.w - w_ji));
        }
    }
    return F;
}

void FormMatrix::apply(const std::vector<double>& u, std::vector<double>& out) const {
    out.assign(u.size(), 0.0);
    for (const auto& p : pairs) {
        const double s = 0.5 * (p.w_ij + p.w_ji);
        const double diff = u[p.i] - u[p.j];
        out[p.i] += s * diff;
        out[p.j] -= s * diff;
    }
    for (size_t i = 0; i < u.size(); ++i) out[i] += diag_potential(static_cast<int>(i)) * u[i];
}

double FormMatrix::energy(const std::vector<double>& u, const std::vector<double>& v) const {
    double kin = 0.0;
    for (const auto& p : pairs)
        kin += 0.5 * (p.w_ij + p.w_ji) * (u[p.i] - u[p.j]) * (v[p.i] - v[p.j]);
    double pot = 0.0;
    for (size_t i = 0; i < u.size(); ++i) pot += diag_potential(static_cast<int>(i)) * u[i] * v[i];
    return (kin + pot) * hd();
}

double FormMatrix::norm_bound() const {
    std::vector<double> rowsum(n(), 0.0);
    for (const auto& p : pairs) {
        const double s = 0.5 * (p.w_ij + p.w_ji);
        rowsum[p.i] += 2 * std::abs(s);
        rowsum[p.j] += 2 * std::abs(s);
    }
    double b = 0.0;
    for (int i = 0; i < n(); ++i) b = std::max(b, rowsum[i] + std::abs(diag_potential(i)));
    return b;
}

std::vector<std::vector<std::pair<int, double>>> FormMatrix::rows() const {
    std::vector<std::vector<std::pair<int, double>>> rows(n());
    std::vector<double> diag(n(), 0.0);
    for (const auto& p : pairs) {
        const double s = 0.5 * (p.w_ij + p.w_ji);
        rows[p.i].push_back({p.j, -s});
        rows[p.j].push_back({p.i, -s});
        diag[p.i] += s;
        diag[p.j] += s;
    }
    for (int i = 0; i < n(); ++i) {
        rows[i].push_back({i, diag[i] + diag_potential(i)});
        std::sort(rows[i].begin(), rows[i].end());
    }
    return rows;
}

namespace {

double cosh_guarded(double t) {
    if (std::abs(t) > 700.0)
        throw numeric_error("cosh argument beyond 700: phi/eps scale exceeds double range");
    return std::cosh(t);
}

} // namespace

std::vector<double> v_phi(const FormMatrix& form, const std::vector<double>& phi) {
    std::vector<double> out(form.n(), 0.0);
    const double eps = form.eps;
    for (const auto& p : form.pairs) {
        const double c = 1.0 - cosh_guarded((phi[p.i] - phi[p.j]) / eps);
        out[p.i] += p.w_ij * c;
        out[p.j] += p.w_ji * c;
    }
    return out;
}

ConjugationCheck conjugated_form_identity(const FormMatrix& form,
                                          const std::vector<double>& phi,
                                          const std::vector<double>& v) {
    const int n = form.n();
    const double eps = form.eps;
    const auto [mn, mx] = std::minmax_element(phi.begin(), phi.end());
    const double shift = 0.5 * (*mn + *mx); // bilinear form is scale-invariant

    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        const double t = (phi[i] - shift) / eps;
        if (std::abs(t) > 700.0)
            throw numeric_error("conjugation: phi/eps range exceeds double even after scaling");
        a[i] = std::exp(-t) * v[i];
        b[i] = std::exp(t) * v[i];
    }

    ConjugationCheck out;
    out.lhs = form.energy(a, b);
    out.vphi = v_phi(form, phi);

    double pot = 0.0, cosh_e = 0.0;
    for (int i = 0; i < n; ++i) pot += (form.diag_potential(i) + out.vphi[i]) * v[i] * v[i];
    for (const auto& p : form.pairs) {
        const double c = cosh_guarded((phi[p.i] - phi[p.j]) / eps);
        const double dv = v[p.i] - v[p.j];
        cosh_e += 0.5 * (p.w_ij + p.w_ji) * c * dv * dv;
    }
    out.rhs_potential = pot * form.hd();
    out.rhs_cosh_energy = cosh_e * form.hd();
    const double rhs = out.rhs_potential + out.rhs_cosh_energy;
    out.rel_gap = std::abs(out.lhs - rhs) / std::max({std::abs(out.lhs), std::abs(rhs), 1e-300});
    return out;
}

} // namespace agmon
