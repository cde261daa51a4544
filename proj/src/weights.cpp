#include "agmon/weights.hpp"

#include "agmon/finsler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace agmon {

namespace {

// smoothstep and its integral Q(t) = t^3 - t^4/2, so the ramp areas are exact
double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }
double smoothstep_int(double t) { return t * t * t - 0.5 * t * t * t * t; }

constexpr double kPlateau = 2.5;
constexpr double kRamp = 0.1; // ramp width on each side of [1/2, 1]

} // namespace

double CutoffChi::operator()(double r) const {
    if (r <= 0.5) return 0.0;
    if (r >= 1.0) return 1.0;
    if (r < 0.5 + kRamp) return kPlateau * kRamp * smoothstep_int((r - 0.5) / kRamp);
    if (r <= 1.0 - kRamp) return 0.125 + kPlateau * (r - 0.6);
    return 1.0 - kPlateau * kRamp * smoothstep_int((1.0 - r) / kRamp);
}

double CutoffChi::deriv(double r) const {
    if (r <= 0.5 || r >= 1.0) return 0.0;
    if (r < 0.5 + kRamp) return kPlateau * smoothstep((r - 0.5) / kRamp);
    if (r <= 1.0 - kRamp) return kPlateau;
    return kPlateau * smoothstep((1.0 - r) / kRamp);
}

double CutoffChi::deriv2(double r) const {
    if (r <= 0.5 || r >= 1.0) return 0.0;
    auto ds = [](double t) { return 6.0 * t * (1.0 - t); };
    if (r < 0.5 + kRamp) return kPlateau / kRamp * ds((r - 0.5) / kRamp);
    if (r <= 1.0 - kRamp) return 0.0;
    return -kPlateau / kRamp * ds((1.0 - r) / kRamp);
}

double chi_ramp(const CutoffChi& chi, double t, double a, double b) {
    return chi(0.5 + 0.5 * (t - a) / (b - a));
}

std::vector<double> phi_field(const std::vector<double>& d, double B, double eps,
                              const CutoffChi& chi) {
    std::vector<double> out(d.size());
    const double be = B * eps;
    const double c0 = 0.5 * be * std::log(0.5 * B);
    for (size_t i = 0; i < d.size(); ++i) {
        const double g = chi(d[i] / be);
        double v = d[i] - c0;
        if (g > 0) v -= g * 0.5 * be * std::log(2.0 * d[i] / be);
        out[i] = v;
    }
    return out;
}

double phi_sandwich_constant(const std::vector<double>& d, const std::vector<double>& phi,
                             double B, double eps) {
    double worst = 0.0;
    for (size_t i = 0; i < d.size(); ++i) {
        const double r = (phi[i] - d[i]) / eps + 0.5 * B * std::log1p(d[i] / eps);
        worst = std::max(worst, std::abs(r));
    }
    return std::exp(worst);
}

PhiAlphaResult phi_alpha_field(const GridDomain& grid, const std::vector<double>& d,
                               double eps, double B, double alpha, double D, double eta,
                               const CutoffChi& chi, double delta0, bool strict) {
    if (!(alpha > 0 && alpha <= 1)) throw config_error("phi_alpha: alpha must lie in (0,1]");
    const double h = grid.spacing();
    const double dmax = *std::max_element(d.begin(), d.end());
    if (D + 2 * eta >= dmax)
        throw config_error("phi_alpha: D + 2 eta = " + std::to_string(D + 2 * eta) +
                           " must stay below max d = " + std::to_string(dmax));

    // delta(alpha): largest ladder value with (1-a/2)|d_delta - d| <= (a/2) d off K
    std::vector<double> mollified;
    double delta = std::max(delta0, 2 * h);
    bool ok = false;
    double worst_ratio = 0.0;
    while (delta >= 2 * h) {
        mollified = mollify(grid, d, delta);
        ok = true;
        worst_ratio = 0.0;
        for (size_t i = 0; i < d.size(); ++i) {
            if (d[i] <= D) continue;
            const double lhs = (1 - 0.5 * alpha) * std::abs(mollified[i] - d[i]);
            const double rhs = 0.5 * alpha * d[i];
            worst_ratio = std::max(worst_ratio, lhs / std::max(rhs, 1e-300));
            if (lhs > rhs) ok = false;
        }
        if (ok) break;
        if (delta == 2 * h) break;
        delta = std::max(delta / 2, 2 * h);
    }
    if (!ok) {
        // invert the failing condition for the minimal supported alpha
        const double amin = 2.0 * worst_ratio * alpha / (2.0 + worst_ratio * alpha);
        throw config_error("phi_alpha: grid too coarse for alpha = " + std::to_string(alpha) +
                           "; minimal supported alpha ~ " + std::to_string(std::min(1.0, amin * 1.1)));
    }

    PhiAlphaResult res;
    res.d_delta = std::move(mollified);
    res.delta_used = delta;

    res.thm24_ok = true;
    for (size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= D) continue;
        if (0.5 * B * eps * std::log(d[i] / eps) > 0.25 * alpha * d[i]) {
            res.thm24_ok = false;
            break;
        }
    }
    if (strict && !res.thm24_ok)
        throw config_error("phi_alpha: eps is above eps_alpha for B = " + std::to_string(B) +
                           ", alpha = " + std::to_string(alpha));

    const auto phi = phi_field(d, B, eps, chi);
    res.c_prime = phi_sandwich_constant(d, phi, B, eps);

    res.phi_alpha.resize(d.size());
    res.phi_tilde.resize(d.size());
    for (size_t i = 0; i < d.size(); ++i) {
        const double gh = chi_ramp(chi, d[i], D, D + eta);
        const double gt = chi_ramp(chi, d[i], D + eta, D + 2 * eta);
        const double lip = (1 - 0.5 * alpha) * ((1 - gt) * d[i] + gt * res.d_delta[i]);
        res.phi_alpha[i] = (1 - gh) * phi[i] + gh * lip;
        res.phi_tilde[i] = (1 - 0.5 * alpha) * ((1 - gh) * d[i] + gh * res.d_delta[i]);
    }
    return res;
}

FpmResult f_pm(const FormMatrix& form, const std::vector<double>& vphi, double E,
               double B, double eps, const std::vector<double>& d) {
    const int n = form.n();
    FpmResult out;
    out.f_plus.assign(n, 0.0);
    out.f_minus.assign(n, 0.0);
    double fmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double field = form.diag_potential(i) + vphi[i] - E;
        const bool core = d[i] < B * eps;
        if (field < 0) {
            out.omega_minus.push_back(i);
            if (!core) out.omega_in_core = false;
            out.f_minus[i] = std::sqrt((core ? eps : 0.0) - field);
            out.f_plus[i] = std::sqrt(core ? eps : 0.0);
        } else {
            out.f_plus[i] = std::sqrt((core ? eps : 0.0) + field);
            out.f_minus[i] = std::sqrt(core ? eps : 0.0);
        }
        fmin = std::min(fmin, out.f_plus[i] + out.f_minus[i]);
    }
    out.min_f_over_sqrt_eps = fmin / std::sqrt(eps);
    return out;
}

namespace {

// gradient of a node field, central in the interior, second-order one-sided
// at Sigma boundaries
Vec grad_at(const GridDomain& g, const std::vector<double>& f, int node) {
    const double h = g.spacing();
    Vec out{0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        const LatticeOffset ep{a == 0 ? 1 : 0, a == 1 ? 1 : 0};
        const LatticeOffset em{a == 0 ? -1 : 0, a == 1 ? -1 : 0};
        const int np = g.neighbor(node, ep);
        const int nm = g.neighbor(node, em);
        if (np >= 0 && nm >= 0) {
            out[a] = (f[np] - f[nm]) / (2 * h);
        } else if (np >= 0) {
            const int np2 = g.neighbor(np, ep);
            out[a] = np2 >= 0 ? (-3 * f[node] + 4 * f[np] - f[np2]) / (2 * h)
                              : (f[np] - f[node]) / h;
        } else if (nm >= 0) {
            const int nm2 = g.neighbor(nm, em);
            out[a] = nm2 >= 0 ? (3 * f[node] - 4 * f[nm] + f[nm2]) / (2 * h)
                              : (f[node] - f[nm]) / h;
        }
    }
    return out;
}

} // namespace

RegionReport three_region_check(const GridDomain& grid,
                                const std::vector<QuadratureAtoms>& atoms,
                                const std::function<double(const Vec&)>& v0,
                                const FormMatrix& form,
                                const std::vector<double>& weight,
                                const std::vector<double>& vphi,
                                const std::vector<double>& d, double B, double eps,
                                double D, double eta) {
    const int n = grid.node_count();
    RegionReport rep;
    const double inf = std::numeric_limits<double>::infinity();
    rep.inner_v0 = rep.middle_v0 = rep.outer_v0 = inf;
    rep.inner_v = rep.middle_v = rep.outer_v = inf;
    double defect = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec gp = grad_at(grid, weight, i);
        const double f1 = v0(grid.coord(i)) - t_tilde0_sigma(atoms[i], gp, grid.dim());
        const double f2 = form.vdiag[i] + vphi[i];
        defect = std::max(defect, std::abs(f2 - f1));
        if (d[i] < B * eps) {
            rep.inner_v0 = std::min(rep.inner_v0, f1);
            rep.inner_v = std::min(rep.inner_v, f2);
        } else if (d[i] < D + eta) {
            rep.has_middle = true;
            rep.middle_v0 = std::min(rep.middle_v0, f1);
            rep.middle_v = std::min(rep.middle_v, f2);
        } else {
            rep.has_outer = true;
            rep.outer_v0 = std::min(rep.outer_v0, f1);
            rep.outer_v = std::min(rep.outer_v, f2);
        }
    }
    rep.c0 = rep.has_middle && rep.middle_v0 > 0 ? B * eps / rep.middle_v0 : 0.0;
    rep.c1 = rep.has_outer ? rep.outer_v0 : 0.0;
    rep.c2 = std::max(0.0, -rep.inner_v / eps);
    rep.c3 = defect / eps;
    rep.c4 = rep.has_outer ? rep.outer_v : 0.0;
    return rep;
}

Lemma23Result lemma23_check(const FormMatrix& H, const std::vector<double>& u, double E,
                            const std::vector<double>& phi, const FpmResult& fpm) {
    const int n = H.n();
    const double eps = H.eps;
    const auto [mn, mx] = std::minmax_element(phi.begin(), phi.end());
    const double shift = 0.5 * (*mn + *mx); // both sides scale by e^{2 shift/eps}

    std::vector<double> hu(n);
    H.apply(u, hu);

    Lemma23Result out;
    double lhs = 0, t_res = 0, t_fm = 0;
    for (int i = 0; i < n; ++i) {
        const double t = (phi[i] - shift) / eps;
        if (std::abs(t) > 700.0)
            throw numeric_error("lemma 2.3: phi/eps exceeds double range after scaling");
        const double w = std::exp(t);
        const double F = fpm.f_plus[i] + fpm.f_minus[i];
        const double a = F * w * u[i];
        lhs += a * a;
        const double r = w * (hu[i] - E * u[i]) / F;
        t_res += r * r;
        const double fm = fpm.f_minus[i] * w * u[i];
        t_fm += fm * fm;
    }
    const double hd = H.hd();
    out.lhs = lhs * hd;
    out.term_residual = 4.0 * t_res * hd;
    out.term_fminus = 8.0 * t_fm * hd;
    out.rhs = out.term_residual + out.term_fminus;
    out.slack_rel = (out.rhs - out.lhs) / std::max(out.rhs, 1e-300);
    return out;
}

namespace {

double logsumexp(const std::vector<double>& logs) {
    if (logs.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(logs.begin(), logs.end());
    double s = 0.0;
    for (double l : logs) s += std::exp(l - m);
    return m + std::log(s);
}

} // namespace

DecayReport decay_report(const GridDomain& grid, const std::vector<double>& d,
                         const EigenPair& pair, double eps, double B, double alpha,
                         double Dk, const PhiAlphaResult* palpha, double c_prime,
                         double noise_floor) {
    DecayReport rep;
    rep.eps = eps;
    rep.E0 = pair.lambda;
    // components below the eigenvector-error scale (residual over cluster gap)
    // are solver noise, not decay; keep them out of the log-space fits
    rep.floor_used = std::max(noise_floor, 1e4 * pair.residual);
    const int n = grid.node_count();
    const double log_hd = std::log(grid.cell_volume());

    std::vector<double> l1, l2, l3, lk, loff;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int i = 0; i < n; ++i) {
        const double au = std::abs(pair.u[i]);
        if (au <= rep.floor_used) continue;
        const double lu = std::log(au);
        l1.push_back(2.0 * (d[i] / eps - B * std::log1p(d[i] / eps)) + 2.0 * lu + log_hd);
        l2.push_back(2.0 * (1 - alpha) * d[i] / eps + 2.0 * lu + log_hd);
        if (palpha) {
            l3.push_back(2.0 * palpha->phi_alpha[i] / eps + 2.0 * lu + log_hd);
            if (d[i] <= Dk)
                lk.push_back(2.0 * (d[i] / eps - 0.5 * B * std::log1p(d[i] / eps)) + 2.0 * lu +
                             log_hd);
            else
                loff.push_back(2.0 * (1 - alpha) * d[i] / eps + 2.0 * lu + log_hd);
        }
        if (d[i] >= 0.1) {
            const double y = -eps * lu;
            sx += d[i];
            sy += y;
            sxx += d[i] * d[i];
            sxy += d[i] * y;
            ++cnt;
        }
    }
    // u is normalized in the h^d inner product, so the ratios are the norms
    rep.r1 = std::exp(0.5 * logsumexp(l1));
    rep.r2 = std::exp(0.5 * logsumexp(l2));
    if (palpha) {
        rep.r3 = std::exp(0.5 * logsumexp(l3));
        rep.split_rhs = std::exp(logsumexp(l3));
        const double term_k = std::exp(logsumexp(lk)) / c_prime;
        const double term_off = loff.empty() ? 0.0 : std::exp(logsumexp(loff));
        rep.split_lhs = term_k + term_off;
    }
    rep.fit_count = cnt;
    if (cnt >= 2) {
        const double det = cnt * sxx - sx * sx;
        rep.slope = (cnt * sxy - sx * sy) / det;
        rep.intercept = (sy * sxx - sx * sxy) / det;
    }
    return rep;
}

} // namespace agmon
