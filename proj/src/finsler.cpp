#include "agmon/finsler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <Eigen/Dense>

namespace agmon {

LengthOracle::LengthOracle(const SymbolEvaluator& sym, std::function<double(const Vec&)> v0,
                           LengthOptions opt)
    : sym_(&sym), v0_(std::move(v0)), opt_(opt) {}

bool LengthOracle::isotropic() const {
    return sym_->kernel().variant == KernelVariant::Density || sym_->dim() == 1;
}

namespace {

// closed-form inversion for gaussian-profile densities
double gaussian_radial(const KernelSpec& k, const Vec& x, double V) {
    const double sg = k.profile.scale;
    const double mass = k.weight(x) * (k.dim == 1 ? sg * std::sqrt(M_PI) : M_PI * sg * sg);
    return (2.0 / sg) * std::sqrt(std::log1p(V / mass));
}

} // namespace

double LengthOracle::radial_solve(const Vec& x, const Vec& e) const {
    const double V = v0_(x);
    if (V <= 0) return 0.0;
    const KernelSpec& k = sym_->kernel();
    if (k.variant == KernelVariant::Density && k.profile.tail == TailClass::Gaussian &&
        !k.singularity)
        return gaussian_radial(k, x, V);

    const double cmax = sym_->admissible_radius();
    double lo = 0.0, hi = 1.0;
    if (std::isfinite(cmax)) hi = std::min(hi, 0.5 * cmax);
    while (sym_->t_tilde0(x, Vec{hi * e[0], hi * e[1]}) < V) {
        lo = hi;
        if (std::isfinite(cmax)) {
            hi = 0.5 * (hi + cmax);
            if (cmax - hi < 1e-12 * cmax)
                throw hypothesis_error("radial solve: level set leaves the admissible strip");
        } else {
            hi *= 2.0;
            if (hi > 1e8) throw numeric_error("radial solve failed to bracket the root");
        }
    }
    for (int it = 0; it < 200 && hi - lo > opt_.bisect_tol * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (sym_->t_tilde0(x, Vec{mid * e[0], mid * e[1]}) < V ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ------------------------------------------------------------------
// support table for x-independent anisotropic kernels: R(theta; V) on a
// (theta, sqrt(V)) grid, rows linear in sqrt(V) near zero where the body is
// the ellipsoid of the quadratic symbol part
struct LengthOracle::SupportTable {
    int ntheta = 256;
    int nlevel = 200;
    double smax = 1.0; // sqrt(Vmax)
    std::vector<double> cs, sn;
    std::vector<double> r_over_s; // [theta][level]
};

double LengthOracle::radial_at_level(double V, const Vec& e) const {
    // kernel weights are x-independent here, so any x works; use the origin
    const Vec x0{0, 0};
    const KernelSpec& k = sym_->kernel();
    if (V <= 0) return 0.0;
    double lo = 0.0, hi = 1.0;
    const double cmax = sym_->admissible_radius();
    while (sym_->t_tilde0(x0, Vec{hi * e[0], hi * e[1]}) < V) {
        lo = hi;
        if (std::isfinite(cmax)) {
            hi = 0.5 * (hi + cmax);
            if (cmax - hi < 1e-12 * cmax)
                throw hypothesis_error("radial solve: level set leaves the admissible strip");
        } else {
            hi *= 2.0;
        }
    }
    (void)k;
    for (int it = 0; it < 200 && hi - lo > opt_.bisect_tol * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (sym_->t_tilde0(x0, Vec{mid * e[0], mid * e[1]}) < V ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void LengthOracle::build_support_table(double vmax) const {
    auto tab = std::make_shared<SupportTable>();
    tab->smax = std::sqrt(std::max(vmax, 1e-12)) * 1.02;
    tab->cs.resize(tab->ntheta);
    tab->sn.resize(tab->ntheta);
    tab->r_over_s.assign(static_cast<size_t>(tab->ntheta) * tab->nlevel, 0.0);
    const auto B = second_moment_matrix(sym_->kernel(), Vec{0, 0});
    for (int j = 0; j < tab->ntheta; ++j) {
        const double th = 2.0 * M_PI * j / tab->ntheta;
        tab->cs[j] = std::cos(th);
        tab->sn[j] = std::sin(th);
        const Vec u{tab->cs[j], tab->sn[j]};
        const double ubu = B[0] * u[0] * u[0] + B[1] * u[1] * u[1] + 2 * B[2] * u[0] * u[1];
        for (int l = 0; l < tab->nlevel; ++l) {
            const double s = tab->smax * l / (tab->nlevel - 1);
            double ros;
            if (l == 0) {
                ros = 1.0 / std::sqrt(ubu); // quadratic-body limit
            } else {
                ros = radial_at_level(s * s, u) / s;
            }
            tab->r_over_s[static_cast<size_t>(j) * tab->nlevel + l] = ros;
        }
    }
    table_ = std::move(tab);
}

double LengthOracle::table_support(double V, const Vec& v) const {
    const SupportTable& t = *table_;
    const double s = std::sqrt(V);
    double fl = (t.nlevel - 1) * s / t.smax;
    fl = std::min(fl, double(t.nlevel - 1) - 1e-9);
    const int l0 = static_cast<int>(fl);
    const double w1 = fl - l0;
    double best = 0.0;
    for (int j = 0; j < t.ntheta; ++j) {
        const double ros = (1.0 - w1) * t.r_over_s[static_cast<size_t>(j) * t.nlevel + l0] +
                           w1 * t.r_over_s[static_cast<size_t>(j) * t.nlevel + l0 + 1];
        const double g = s * ros * (t.cs[j] * v[0] + t.sn[j] * v[1]);
        best = std::max(best, g);
    }
    return best;
}

double LengthOracle::support2d(const Vec& x, const Vec& v) const {
    const int N = std::max(16, opt_.polygon_samples);
    double best = -1e300;
    double best_th = 0.0;
    for (int j = 0; j < N; ++j) {
        const double th = 2.0 * M_PI * j / N;
        const Vec u{std::cos(th), std::sin(th)};
        const double g = radial_solve(x, u) * dot(u, v, 2);
        if (g > best) {
            best = g;
            best_th = th;
        }
    }
    // golden-section refinement of the circularly unimodal support profile
    auto g_at = [&](double th) {
        const Vec u{std::cos(th), std::sin(th)};
        return radial_solve(x, u) * dot(u, v, 2);
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_th - 2.0 * M_PI / N, b = best_th + 2.0 * M_PI / N;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = g_at(x1), f2 = g_at(x2);
    while (b - a > opt_.refine_angle) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = g_at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = g_at(x1);
        }
    }
    return std::max(best, std::max(f1, f2));
}

double LengthOracle::length(const Vec& x, const Vec& v) const {
    const double vn = norm(v, sym_->dim());
    if (vn == 0.0) return 0.0;
    if (sym_->dim() == 1) return std::abs(v[0]) * radial_solve(x, Vec{1, 0});
    if (isotropic()) {
        const Vec vhat{v[0] / vn, v[1] / vn};
        return vn * radial_solve(x, vhat);
    }
    const double V = v0_(x);
    if (V <= 0) return 0.0;
    if (table_ && opt_.use_support_table) return table_support(V, v);
    return support2d(x, v);
}

// ------------------------------------------------------------------

std::vector<LatticeOffset> stencil_offsets(int dim, int radius) {
    std::vector<LatticeOffset> out;
    if (dim == 1) {
        out.push_back({1, 0});
        out.push_back({-1, 0});
        return out;
    }
    for (int i = -radius; i <= radius; ++i) {
        for (int j = -radius; j <= radius; ++j) {
            if (i == 0 && j == 0) continue;
            if (i * i + j * j > radius * radius) continue;
            if (std::gcd(std::abs(i), std::abs(j)) != 1) continue;
            out.push_back({i, j});
        }
    }
    return out;
}

namespace {

struct EdgeContext {
    const GridDomain* grid;
    const LengthOracle* oracle;
    Vec well;
    bool subdivide;
};

double edge_cost(const EdgeContext& ctx, int node, const LatticeOffset& z) {
    const GridDomain& g = *ctx.grid;
    const LatticeOffset ki = g.lattice_of(node);
    const LatticeOffset kt{ki[0] + z[0], ki[1] + z[1]};
    // canonical direction so both orientations produce bitwise-equal costs
    LatticeOffset zc = z;
    if (zc[0] < 0 || (zc[0] == 0 && zc[1] < 0)) zc = {-z[0], -z[1]};
    const Vec hv{g.spacing() * zc[0], g.spacing() * zc[1]};
    const Vec p0 = g.coord_of(ki);
    const Vec p1 = g.coord_of(kt);
    const Vec mid = g.midpoint_of(ki, kt);
    if (!g.inside(mid)) return -1.0;

    const int dim = g.dim();
    const double seg = norm(Vec{p1[0] - p0[0], p1[1] - p0[1]}, dim);
    const double dw = std::min(norm(Vec{p0[0] - ctx.well[0], p0[1] - ctx.well[1]}, dim),
                               norm(Vec{p1[0] - ctx.well[0], p1[1] - ctx.well[1]}, dim));
    const LengthOracle& L = *ctx.oracle;
    if (ctx.subdivide && dw <= 2.0 * seg) {
        // two-panel composite Simpson: the length degenerates like sqrt(V0)
        const Vec q1 = g.dim() == 2
                           ? Vec{0.25 * (3 * p0[0] + p1[0]), 0.25 * (3 * p0[1] + p1[1])}
                           : Vec{0.25 * (3 * p0[0] + p1[0]), 0.0};
        const Vec q3 = g.dim() == 2
                           ? Vec{0.25 * (p0[0] + 3 * p1[0]), 0.25 * (p0[1] + 3 * p1[1])}
                           : Vec{0.25 * (p0[0] + 3 * p1[0]), 0.0};
        return (1.0 / 12.0) * (L.length(p0, hv) + 4.0 * L.length(q1, hv) +
                               2.0 * L.length(mid, hv) + 4.0 * L.length(q3, hv) +
                               L.length(p1, hv));
    }
    return (1.0 / 6.0) * (L.length(p0, hv) + 4.0 * L.length(mid, hv) + L.length(p1, hv));
}

} // namespace

DistanceField distance_field(const GridDomain& grid, const LengthOracle& oracle,
                             const DistanceOptions& opt) {
    DistanceField out;
    out.grid = &grid;
    const int n = grid.node_count();
    out.d.assign(n, std::numeric_limits<double>::infinity());

    const auto offs = stencil_offsets(grid.dim(), opt.stencil_radius);
    EdgeContext ctx{&grid, &oracle, grid.coord(grid.well_node()), opt.near_well_subdivide};

    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    out.d[grid.well_node()] = 0.0;
    pq.push({0.0, grid.well_node()});
    std::vector<char> settled(n, 0);
    while (!pq.empty()) {
        const auto [dist, node] = pq.top();
        pq.pop();
        if (settled[node]) continue;
        settled[node] = 1;
        for (const auto& z : offs) {
            const int t = grid.neighbor(node, z);
            if (t < 0 || settled[t]) continue;
            const double c = edge_cost(ctx, node, z);
            if (c < 0) continue; // segment leaves Sigma
            if (dist + c < out.d[t]) {
                out.d[t] = dist + c;
                pq.push({out.d[t], t});
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (!settled[i])
            throw config_error("distance field: Sigma is not connected under the stencil");
    return out;
}

namespace {

// one-sided gradients per axis; boundary nodes reuse the interior side
void one_sided(const GridDomain& g, const std::vector<double>& d, int node, int axis,
               double& gm, double& gp) {
    const double h = g.spacing();
    const LatticeOffset em{axis == 0 ? -1 : 0, axis == 1 ? -1 : 0};
    const LatticeOffset ep{axis == 0 ? 1 : 0, axis == 1 ? 1 : 0};
    const int nm = g.neighbor(node, em);
    const int np = g.neighbor(node, ep);
    const double dc = d[node];
    gm = nm >= 0 ? (dc - d[nm]) / h : std::numeric_limits<double>::quiet_NaN();
    gp = np >= 0 ? (d[np] - dc) / h : std::numeric_limits<double>::quiet_NaN();
    if (std::isnan(gm)) gm = gp;
    if (std::isnan(gp)) gp = gm;
}

} // namespace

EikonalSummary eikonal_residual(DistanceField& field, const SymbolEvaluator& sym,
                                const std::function<double(const Vec&)>& v0,
                                double cut_tol) {
    const GridDomain& g = *field.grid;
    const int n = g.node_count();
    const int dim = g.dim();
    if (cut_tol <= 0) cut_tol = std::max(0.05, 20.0 * g.spacing());
    field.residual_eq.assign(n, 0.0);
    field.residual_ineq.assign(n, 0.0);
    field.cut_mask.assign(n, 0);
    EikonalSummary sum;
    sum.max_signed_ineq = -std::numeric_limits<double>::infinity();

    for (int i = 0; i < n; ++i) {
        const Vec x = g.coord(i);
        double gm[2] = {0, 0}, gp[2] = {0, 0};
        bool cut = false;
        for (int a = 0; a < dim; ++a) {
            one_sided(g, field.d, i, a, gm[a], gp[a]);
            if (std::abs(gp[a] - gm[a]) > cut_tol) cut = true;
        }
        field.cut_mask[i] = cut ? 1 : 0;

        const double V = v0(x);
        if (i == g.well_node()) {
            field.residual_eq[i] = 0.0; // convention: grad -> 0 and V0 = 0 there
        } else {
            Vec up{std::abs(gm[0]) > std::abs(gp[0]) ? gm[0] : gp[0],
                   std::abs(gm[1]) > std::abs(gp[1]) ? gm[1] : gp[1]};
            if (dim == 1) up[1] = 0;
            field.residual_eq[i] = sym.t_tilde0(x, up) - V;
        }

        double best = std::numeric_limits<double>::infinity();
        const int combos = dim == 2 ? 4 : 2;
        for (int c = 0; c < combos; ++c) {
            Vec gsel{(c & 1) ? gp[0] : gm[0], dim == 2 ? ((c & 2) ? gp[1] : gm[1]) : 0.0};
            best = std::min(best, sym.t_tilde0(x, gsel) - V);
        }
        field.residual_ineq[i] = best;
        sum.max_signed_ineq = std::max(sum.max_signed_ineq, best);
        if (!cut) sum.max_abs_eq_offcut = std::max(sum.max_abs_eq_offcut, std::abs(field.residual_eq[i]));
        if (cut) ++sum.cut_count;
    }
    return sum;
}

std::vector<double> mollify(const GridDomain& grid, const std::vector<double>& d,
                            double delta) {
    const double h = grid.spacing();
    if (delta < 2.0 * h)
        throw config_error("mollifier scale delta must be at least 2h");
    const int r = static_cast<int>(std::floor(delta / h));
    const int dim = grid.dim();

    std::vector<LatticeOffset> offs;
    std::vector<double> w;
    for (int i = -r; i <= r; ++i) {
        const int jr = dim == 2 ? r : 0;
        for (int j = -jr; j <= jr; ++j) {
            const double rr = (i * i + j * j) * h * h / (delta * delta);
            if (rr >= 1.0) continue;
            offs.push_back({i, j});
            w.push_back(std::exp(-1.0 / (1.0 - rr)));
        }
    }
    const double tot = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= tot;

    std::vector<double> out(grid.node_count());
    for (int nidx = 0; nidx < grid.node_count(); ++nidx) {
        const LatticeOffset k0 = grid.lattice_of(nidx);
        double acc = 0.0;
        for (size_t a = 0; a < offs.size(); ++a) {
            LatticeOffset k{k0[0] + offs[a][0], k0[1] + offs[a][1]};
            // nearest-value extension: clamp to the bounding lattice, then walk
            // toward the well until a Sigma node is found (ball shapes)
            k[0] = std::clamp(k[0], 0, grid.cells(0) - 1);
            if (dim == 2) k[1] = std::clamp(k[1], 0, grid.cells(1) - 1);
            int node = grid.node_at(k);
            if (node < 0) {
                LatticeOffset kw = grid.lattice_of(grid.well_node());
                LatticeOffset kk = k;
                while (node < 0 && (kk[0] != kw[0] || kk[1] != kw[1])) {
                    if (kk[0] != kw[0]) kk[0] += kk[0] < kw[0] ? 1 : -1;
                    if (kk[1] != kw[1]) kk[1] += kk[1] < kw[1] ? 1 : -1;
                    node = grid.node_at(kk);
                }
                if (node < 0) node = grid.well_node();
            }
            acc += w[a] * d[node];
        }
        out[nidx] = acc;
    }
    return out;
}

std::vector<double> jensen_gap(const GridDomain& grid, const std::vector<double>& d_delta,
                               const SymbolEvaluator& sym,
                               const std::function<double(const Vec&)>& v0) {
    const int n = grid.node_count();
    std::vector<double> gap(n);
    for (int i = 0; i < n; ++i) {
        Vec gr{0, 0};
        for (int a = 0; a < grid.dim(); ++a) {
            double gm, gp;
            one_sided(grid, d_delta, i, a, gm, gp);
            gr[a] = 0.5 * (gm + gp);
        }
        gap[i] = v0(grid.coord(i)) - sym.t_tilde0(grid.coord(i), gr);
    }
    return gap;
}

WellFit well_quadratic_fit(const GridDomain& grid, const std::vector<double>& d,
                           double radius) {
    const int dim = grid.dim();
    const Vec w = grid.coord(grid.well_node());
    std::vector<int> sel;
    int per_axis = 0;
    for (int i = 0; i < grid.node_count(); ++i) {
        const Vec x = grid.coord(i);
        const Vec r{x[0] - w[0], x[1] - w[1]};
        if (norm(r, dim) <= radius) {
            sel.push_back(i);
            if (dim == 1 || std::abs(r[1]) < 1e-14) ++per_axis;
        }
    }
    if (per_axis < 5)
        throw config_error("well fit: radius must cover at least 5 nodes per axis");

    const int ncoef = dim == 1 ? 3 : 6;
    Eigen::MatrixXd A(sel.size(), ncoef);
    Eigen::VectorXd b(sel.size());
    for (size_t r = 0; r < sel.size(); ++r) {
        const Vec x = grid.coord(sel[r]);
        const double u = x[0] - w[0];
        const double v = dim == 2 ? x[1] - w[1] : 0.0;
        if (dim == 1) {
            A(r, 0) = 1;
            A(r, 1) = u;
            A(r, 2) = u * u;
        } else {
            A(r, 0) = 1;
            A(r, 1) = u;
            A(r, 2) = v;
            A(r, 3) = u * u;
            A(r, 4) = u * v;
            A(r, 5) = v * v;
        }
        b(r) = d[sel[r]];
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);

    WellFit fit;
    if (dim == 1) {
        fit.hessian = {2 * c(2), 0, 0};
        fit.grad_norm = std::abs(c(1));
        fit.eig_min = fit.eig_max = 2 * c(2);
    } else {
        fit.hessian = {2 * c(3), 2 * c(5), c(4)};
        fit.grad_norm = std::hypot(c(1), c(2));
        const double tr = fit.hessian[0] + fit.hessian[1];
        const double disc = std::sqrt(std::max(
            0.0, (fit.hessian[0] - fit.hessian[1]) * (fit.hessian[0] - fit.hessian[1]) +
                     4 * fit.hessian[2] * fit.hessian[2]));
        fit.eig_min = 0.5 * (tr - disc);
        fit.eig_max = 0.5 * (tr + disc);
    }
    if (!(fit.eig_min > 0))
        throw hypothesis_error("well fit: fitted Hessian of d is not positive definite");
    return fit;
}

} // namespace agmon
