#pragma once

#include <functional>
#include <vector>

#include "agmon/geometry.hpp"
#include "agmon/kernel.hpp"

namespace agmon {

enum class PotentialFamily { Quadratic, QuarticDoubleWell, InvertedGaussian };

/// R1(x; eps), the eps-scale potential correction (|R1| <= C eps on compacts)
using PotentialR1 = std::function<double(const Vec&, double)>;

struct PotentialSpec {
    int dim = 1;
    PotentialFamily family = PotentialFamily::Quadratic;
    std::array<double, 3> quad{1, 1, 0}; // <x, A x>, A = [[a11,a12],[a12,a22]]
    double quartic_a = 1, quartic_b = 1; // a (x^2 - b^2)^2, 1D
    double ig_amp = 1, ig_sigma = 1;     // amp * max(0, 1 - sum_i exp(-|x-m_i|^2/(2 s^2)))
    std::vector<Vec> wells{{Vec{0, 0}}};
    PotentialR1 r1; // optional

    double v0(const Vec& x) const;
    double v_eps(const Vec& x, double eps) const {
        return v0(x) + (r1 ? r1(x, eps) : 0.0);
    }
};

/// checks V0 >= 0 on the grid and nondegeneracy of every declared well
void validate_potential(const PotentialSpec& pot, const GridDomain& grid);

enum class BoundaryMode { Dirichlet, Neumann };

struct KineticPair {
    int i, j;
    double w_ij, w_ji; // jump weights i->j and j->i (equal for reversible kernels)
};

/// Discrete Dirichlet/Neumann form on Sigma, stored as the unordered jump-pair
/// list plus diagnonal parts. The operator is the form divided by h^d; apply()
/// uses the difference form so constants are annihilated exactly in Neumann
/// mode with V = 0.
struct FormMatrix {
    const GridDomain* grid = nullptr;
    BoundaryMode mode = BoundaryMode::Dirichlet;
    double eps = 0;
    std::vector<KineticPair> pairs;
    std::vector<double> kappa; // exit-killing diagonal (active in Dirichlet mode)
    std::vector<double> vdiag; // V_eps on nodes
    double asymmetry = 0;      // max |w_ij - w_ji| seen at assembly

    int n() const { return grid->node_count(); }
    double hd() const { return grid->cell_volume(); }
    /// potential-type diagonal entering the operator (V_eps + kappa in Dirichlet mode)
    double diag_potential(int i) const {
        return vdiag[i] + (mode == BoundaryMode::Dirichlet ? kappa[i] : 0.0);
    }

    void apply(const std::vector<double>& u, std::vector<double>& out) const;

    /// E(u,v): the h^d-weighted discrete energy (kinetic double sum + potential)
    double energy(const std::vector<double>& u, const std::vector<double>& v) const;

    /// crude operator-norm bound (max row sum of |entries|)
    double norm_bound() const;

    std::vector<std::vector<std::pair<int, double>>> rows() const; // incl. diagonal
};

FormMatrix assemble(const GridDomain& grid, const KernelSpec& kernel,
                    const PotentialSpec& potential, double eps, BoundaryMode mode,
                    const QuadratureOptions& opt = {});

/// V^phi(x) = sum over interior jumps of w(x,gamma) (1 - cosh((phi(x)-phi(x+eps gamma))/eps))
std::vector<double> v_phi(const FormMatrix& form, const std::vector<double>& phi);

struct ConjugationCheck {
    double lhs;             // E(e^{-phi/eps} v, e^{phi/eps} v)
    double rhs_potential;   // <(V_eff + V^phi) v, v>
    double rhs_cosh_energy; // 1/2 sum cosh(dphi/eps) (dv)^2
    double rel_gap;
    std::vector<double> vphi;
};

/// exact discrete conjugation identity; phi is shifted by its midrange before
/// exponentiating (the bilinear form is invariant under that scaling)
ConjugationCheck conjugated_form_identity(const FormMatrix& form,
                                          const std::vector<double>& phi,
                                          const std::vector<double>& v);

} // namespace agmon
