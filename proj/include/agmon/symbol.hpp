#pragma once

#include <vector>

#include "agmon/geometry.hpp"
#include "agmon/kernel.hpp"

namespace agmon {

/// Evaluates the jump symbols of the leading kernel part: closed forms for
/// atomic and Gaussian-density kernels, adaptive quadrature otherwise.
/// Evaluation is restricted to |xi| < c_max for declared-finite-moment tails.
class SymbolEvaluator {
public:
    explicit SymbolEvaluator(const KernelSpec& kernel, double tol = 1e-11);

    const KernelSpec& kernel() const { return *kernel_; }
    int dim() const { return kernel_->dim; }
    double admissible_radius() const { return kernel_->c_max(); }

    /// int (cosh(gamma.xi) - 1) K0(x,dgamma)
    double t_tilde0(const Vec& x, const Vec& xi) const;

    /// int (1 - cos(gamma.xi)) K0(x,dgamma)
    double t0(const Vec& x, const Vec& xi) const;

    Vec grad_t_tilde0(const Vec& x, const Vec& xi) const;

    /// <v, D^2_xi t_tilde0(x,xi) v>
    double hess_quadform(const Vec& x, const Vec& xi, const Vec& v) const;

private:
    void check_domain(const Vec& xi) const;
    double radial_cutoff(double s) const;

    const KernelSpec* kernel_;
    double tol_;
};

/// restricted symbol from grid quadrature atoms: sum over non-exit atoms of
/// w_k0 (cosh(gamma_z . xi) - 1)
double t_tilde0_sigma(const QuadratureAtoms& atoms, const Vec& xi, int dim);

/// same sum without the interior restriction (grid realization of t_tilde0)
double t_tilde0_grid(const QuadratureAtoms& atoms, const Vec& xi, int dim);

/// sampled lower convexity bound of D^2 t_tilde0 over the ball |xi| <= rho
double convexity_certificate(const SymbolEvaluator& sym, const Vec& x, double rho,
                             int samples, unsigned seed = 1234);

struct QuarticRemainder {
    Vec xi;
    double remainder; // t_tilde0 - <xi, B xi>, must be >= -1e-12
    double ratio;     // remainder / |xi|^4
};

std::vector<QuarticRemainder> quartic_remainder(const SymbolEvaluator& sym, const Vec& x,
                                                const std::vector<Vec>& xis);

} // namespace agmon
