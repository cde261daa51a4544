#pragma once

#include <optional>
#include <vector>

#include "agmon/form.hpp"
#include "agmon/spectra.hpp"
#include "agmon/symbol.hpp"

namespace agmon {

/// C^2 cutoff: 0 on [0,1/2], 1 on [1,inf), built by integrating a trapezoidal
/// slope profile with smoothstep ramps (plateau slope 2.5, below the 2/log 2
/// cap with margin).
struct CutoffChi {
    double operator()(double r) const;
    double deriv(double r) const;
    double deriv2(double r) const;
    static double slope_cap() { return 2.0 / std::log(2.0); }
};

/// rescaled cutoff: 0 for t <= a, 1 for t >= b
double chi_ramp(const CutoffChi& chi, double t, double a, double b);

/// Phi = d - (B eps/2) ln(B/2) - g (B eps/2) ln(2d/(B eps)), g = chi(d/(B eps))
std::vector<double> phi_field(const std::vector<double>& d, double B, double eps,
                              const CutoffChi& chi);

/// measured sandwich constant: exp(max |Phi/eps - d/eps + (B/2) ln(1+d/eps)|)
double phi_sandwich_constant(const std::vector<double>& d, const std::vector<double>& phi,
                             double B, double eps);

struct PhiAlphaResult {
    std::vector<double> phi_alpha; // (1-ghat) Phi + ghat (1-a/2)((1-gtilde) d + gtilde d_delta)
    std::vector<double> phi_tilde; // (1-a/2)((1-ghat) d + ghat d_delta)
    std::vector<double> d_delta;
    double delta_used = 0;
    bool thm24_ok = true; // (B eps/2) ln(d/eps) <= (alpha/4) d off K
    double c_prime = 1;   // on-K sandwich constant of the underlying Phi
};

/// Lipschitz-region weights; delta is halved from `delta0` until the
/// mollification error condition (1-a/2)|d_delta - d| <= (a/2) d holds off K.
/// Fails with a configuration error naming the minimal supported alpha when
/// no delta >= 2h works. When `strict`, a violated smallness condition on
/// (B eps/2) ln(d/eps) is an error too; otherwise it is recorded in thm24_ok.
PhiAlphaResult phi_alpha_field(const GridDomain& grid, const std::vector<double>& d,
                               double eps, double B, double alpha, double D, double eta,
                               const CutoffChi& chi, double delta0 = 0.05,
                               bool strict = false);

struct FpmResult {
    std::vector<double> f_plus;
    std::vector<double> f_minus;
    std::vector<int> omega_minus;
    bool omega_in_core = true; // Omega- subset of {d < B eps}
    double min_f_over_sqrt_eps = 0;
};

/// F+- from the effective potential V_eff + V^phi - E; Dirichlet mode folds
/// the killing diagonal into V_eff
FpmResult f_pm(const FormMatrix& form, const std::vector<double>& vphi, double E,
               double B, double eps, const std::vector<double>& d);

struct RegionReport {
    // V0 - t_tilde0^Sigma(x, grad_h weight) minima per region
    double inner_v0 = 0, middle_v0 = 0, outer_v0 = 0;
    // V_eps + V^phi minima per region
    double inner_v = 0, middle_v = 0, outer_v = 0;
    bool has_middle = false, has_outer = false;
    double c0 = 0; // B eps / middle_v0
    double c1 = 0; // outer_v0
    double c2 = 0; // max(0, -inner_v/eps)
    double c3 = 0; // max |(V_eps+V^phi) - (V0 - t^Sigma)| / eps
    double c4 = 0; // outer_v
    bool pass(double inner_tol) const {
        bool ok = inner_v0 >= -inner_tol;
        if (has_middle) ok = ok && middle_v0 > 0;
        if (has_outer) ok = ok && outer_v0 > 0 && outer_v > 0;
        return ok;
    }
};

/// classifies V0 - t_tilde0^Sigma(grad_h w) and V_eps + V^w by the regions
/// {d < B eps}, {B eps <= d < D+eta}, {d >= D+eta} and fits the constants
RegionReport three_region_check(const GridDomain& grid,
                                const std::vector<QuadratureAtoms>& atoms,
                                const std::function<double(const Vec&)>& v0,
                                const FormMatrix& form,
                                const std::vector<double>& weight,
                                const std::vector<double>& vphi,
                                const std::vector<double>& d, double B, double eps,
                                double D, double eta);

struct Lemma23Result {
    double lhs = 0;        // ||F e^{phi/eps} u||^2
    double rhs = 0;        // 4 ||F^{-1} e^{phi/eps}(H-E)u||^2 + 8 ||F_- e^{phi/eps} u||^2
    double term_residual = 0;
    double term_fminus = 0;
    double slack_rel = 0;  // (rhs - lhs)/rhs
};

Lemma23Result lemma23_check(const FormMatrix& H, const std::vector<double>& u, double E,
                            const std::vector<double>& phi, const FpmResult& fpm);

struct DecayReport {
    double eps = 0;
    double E0 = 0;
    double r1 = 0;    // ||(1+d/eps)^{-B} e^{d/eps} u|| / ||u||
    double r2 = 0;    // ||e^{(1-alpha) d/eps} u|| / ||u||
    double r3 = 0;    // sqrt of the split norm of the Lipschitz-weight estimate
    double slope = 0; // fit of -eps ln|u| against d on {d >= 0.1}
    double intercept = 0;
    int fit_count = 0;
    double floor_used = 0;
    double split_lhs = 0, split_rhs = 0; // K/off-K split vs ||e^{Phi_alpha/eps} u||^2
};

DecayReport decay_report(const GridDomain& grid, const std::vector<double>& d,
                         const EigenPair& pair, double eps, double B, double alpha,
                         double Dk, const PhiAlphaResult* palpha, double c_prime,
                         double noise_floor = 1e-13);

} // namespace agmon
