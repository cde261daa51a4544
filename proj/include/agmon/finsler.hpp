#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "agmon/geometry.hpp"
#include "agmon/symbol.hpp"

namespace agmon {

struct LengthOptions {
    int polygon_samples = 48;    // coarse boundary scan (2D anisotropic)
    double refine_angle = 1e-8;  // golden-section bracket width target
    double bisect_tol = 1e-12;
    bool use_support_table = true; // (theta, level) table for x-independent kernels
};

/// Direction-dependent length l(x,v) = sup{ v.xi : t_tilde0(x,xi) <= V0(x) },
/// the support function of the symbol sublevel body. Isotropic kernels reduce
/// to a single radial solve; anisotropic 2D bodies are sampled on the
/// boundary and refined around the support direction.
class LengthOracle {
public:
    LengthOracle(const SymbolEvaluator& sym, std::function<double(const Vec&)> v0,
                 LengthOptions opt = {});

    /// R >= 0 with t_tilde0(x, R e) = V0(x); unique by strict monotonicity
    double radial_solve(const Vec& x, const Vec& e) const;

    double length(const Vec& x, const Vec& v) const;

    bool isotropic() const;
    const SymbolEvaluator& symbol() const { return *sym_; }
    double potential(const Vec& x) const { return v0_(x); }

    /// enable the (theta,level) support table for x-independent kernels;
    /// vmax must dominate the potential over the working domain
    void build_support_table(double vmax) const;

private:
    double support2d(const Vec& x, const Vec& v) const;
    double radial_at_level(double V, const Vec& e) const; // x-independent path
    double table_support(double V, const Vec& v) const;

    const SymbolEvaluator* sym_;
    std::function<double(const Vec&)> v0_;
    LengthOptions opt_;

    struct SupportTable;
    mutable std::shared_ptr<SupportTable> table_;
};

struct DistanceField {
    const GridDomain* grid = nullptr;
    std::vector<double> d;
    // filled by eikonal_residual
    std::vector<double> residual_eq;
    std::vector<double> residual_ineq;
    std::vector<uint8_t> cut_mask;
};

struct DistanceOptions {
    int stencil_radius = 4;
    bool near_well_subdivide = true;
};

/// Single-source label-setting shortest path from the well over the extended
/// coprime stencil; edge costs are Simpson integrals of the length oracle.
DistanceField distance_field(const GridDomain& grid, const LengthOracle& oracle,
                             const DistanceOptions& opt = {});

struct EikonalSummary {
    double max_abs_eq_offcut = 0;  // |t(x, upwind grad) - V0| away from the cut mask
    double max_signed_ineq = 0;    // t(x, favorable grad) - V0, all nodes
    int cut_count = 0;
};

EikonalSummary eikonal_residual(DistanceField& field, const SymbolEvaluator& sym,
                                const std::function<double(const Vec&)>& v0,
                                double cut_tol = 0.0);

/// Friedrichs mollification d * j_delta on the lattice (bump kernel, numeric
/// normalization, nearest-value extension beyond Sigma); requires delta >= 2h
std::vector<double> mollify(const GridDomain& grid, const std::vector<double>& d,
                            double delta);

/// V0(x) - t_tilde0(x, central gradient of d_delta)
std::vector<double> jensen_gap(const GridDomain& grid, const std::vector<double>& d_delta,
                               const SymbolEvaluator& sym,
                               const std::function<double(const Vec&)>& v0);

struct WellFit {
    std::array<double, 3> hessian{0, 0, 0}; // (H11,H22,H12)
    double grad_norm = 0;
    double eig_min = 0;
    double eig_max = 0;
};

/// least-squares quadratic fit of d around the well; positive definite by
/// Hypothesis, enforced
WellFit well_quadratic_fit(const GridDomain& grid, const std::vector<double>& d,
                           double radius);

std::vector<LatticeOffset> stencil_offsets(int dim, int radius);

} // namespace agmon
