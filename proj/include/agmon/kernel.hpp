#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "agmon/geometry.hpp"

namespace agmon {

using SpatialFn = std::function<double(const Vec&)>;

inline SpatialFn const_fn(double c) {
    return [c](const Vec&) { return c; };
}

enum class TailClass { Gaussian, Compact, Exponential };

/// Radial jump-density profile s(r). The Exponential tail carries a finite
/// exponential-moment radius; Gaussian and Compact admit every exponential
/// moment (c_max = infinity).
struct RadialProfile {
    TailClass tail = TailClass::Gaussian;
    double scale = 1.0; // gaussian: exp(-(r/scale)^2); exponential: exp(-r/scale); compact: support radius

    double operator()(double r) const;
    double c_max() const {
        return tail == TailClass::Exponential ? 1.0 / scale
                                              : std::numeric_limits<double>::infinity();
    }
    /// radius beyond which the tail mass is below `tol` (used for truncation)
    double suggested_radius(double tol) const;
};

struct AtomSpec {
    Vec offset{0, 0};
    SpatialFn weight;      // a_i(x) >= 0 for the leading part
    SpatialFn r1_weight;   // optional signed epsilon-scale part (may be empty)
};

enum class KernelVariant { Atomic, Density };

/// where the spatial weight is evaluated when realizing K_eps on the grid;
/// Midpoint enforces discrete reversibility exactly, Source is kept as a
/// deliberately broken rule for the reversibility diagnostic
enum class SpatialRule { Midpoint, Source };

/// Ground-state modulation e^{sign*(F(x+eps*gamma)-F(x))/(2 eps)} applied to
/// every jump weight; stored as the generating function so compositions
/// cancel exactly.
struct TiltSpec {
    SpatialFn F;
    double sign = 1.0;
};

struct KernelSpec {
    int dim = 1;
    KernelVariant variant = KernelVariant::Atomic;

    // atomic
    std::vector<AtomSpec> atoms;

    // density
    RadialProfile profile;
    SpatialFn weight;                  // w(x) > 0
    std::optional<double> singularity; // s0 in [0,2): density carries |gamma|^{-d-s0}
    SpatialFn r1_weight;               // optional epsilon-scale density factor (signed)

    SpatialRule spatial_rule = SpatialRule::Midpoint;
    std::vector<TiltSpec> tilts;

    double c_max() const;
    bool has_perturbation() const;
    bool has_tilt() const { return !tilts.empty(); }

    /// continuum K0 density/weights at x (leading part, no perturbation/tilt)
    double density_k0(const Vec& x, double r) const;

    /// tilt multiplier exp(sum sign*(F(y)-F(x))/(2 eps))
    double tilt_factor(const Vec& x, const Vec& y, double eps) const;
};

struct QuadAtom {
    LatticeOffset z{0, 0};
    double w = 0;     // full K_eps weight (K0 + eps R1, tilted)
    double w_k0 = 0;  // continuum-K0 part evaluated at x
    bool exit = false;
};

struct QuadratureAtoms {
    int node = -1;
    Vec x{0, 0};
    int m = 1; // eps/h
    double truncation_radius = 0;
    std::vector<QuadAtom> atoms;
    double tail_mass = 0;       // estimated mass beyond the truncation radius
    double riemann_mass = 0;    // lattice Riemann sum of the K0 density (origin cell included)
    double dropped_small = 0;   // |gamma|^2-energy of dropped sub-cell jumps (singular profiles)
};

struct QuadratureOptions {
    double radius = 0;     // 0: use the profile default max(4, 10 eps ln(1/tol))
    double tail_tol = 1e-10;
};

QuadratureAtoms quadrature(const KernelSpec& kernel, const GridDomain& grid,
                           int node, double eps, const QuadratureOptions& opt = {});

/// weight of the single jump from `node` by lattice offset z; atomic kernels
/// identify the atom by index. Midpoint evaluation goes through the symmetric
/// lattice formula, so paired orientations agree bitwise.
void jump_weight(const KernelSpec& kernel, const GridDomain& grid, int node,
                 const LatticeOffset& z, int m, double eps, double& w_full,
                 double& w_k0, bool& exit_flag, int atom_index = -1);

/// index of the atom whose lattice offset at alignment m equals z, or -1
int atom_index_for(const KernelSpec& kernel, int m, const LatticeOffset& z);

/// moment integrals of the leading kernel part at x
double exp_moment(const KernelSpec& kernel, const Vec& x, double c);     // |gamma|>=1
double square_moment(const KernelSpec& kernel, const Vec& x);            // |gamma|<=1
double exp_moment_r1(const KernelSpec& kernel, const Vec& x, double c);  // |R1|-part, eps-free factor
double square_moment_r1(const KernelSpec& kernel, const Vec& x);

/// B(x) = 1/2 int gamma gamma^T K0(x,dgamma)
std::array<double, 3> second_moment_matrix(const KernelSpec& kernel, const Vec& x); // (B11,B22,B12)
double smallest_eig_B(const KernelSpec& kernel, const Vec& x);

struct PointValidation {
    Vec x{0, 0};
    double c = 0;
    double exp_moment_k0 = 0;
    double sq_moment_k0 = 0;
    double exp_moment_r1 = 0;
    double sq_moment_r1 = 0;
    double smallest_eig_B = 0;
    double continuity_modulus = 0;       // K0stetig probe at step delta
    double continuity_modulus_half = 0;  // at delta/2 (must shrink)
};

struct ValidationReport {
    std::vector<PointValidation> points;
    std::vector<std::string> violations;
    bool pass() const { return violations.empty(); }
};

ValidationReport validate_hypotheses(const KernelSpec& kernel,
                                     const std::vector<Vec>& sample_points,
                                     const std::vector<double>& c_values,
                                     double nondegeneracy_floor = 1e-12,
                                     double continuity_step = 1e-3);

/// max over sampled node/atom pairs of |k(x,gamma) - k(x+eps gamma,-gamma)|
double reversibility_residual(const KernelSpec& kernel, const GridDomain& grid,
                              double eps, int node_stride = 7);

struct GroundStateTransform {
    KernelSpec kernel;          // e^{dF/2eps}-modulated base
    std::vector<double> v_eps;  // per grid node
    double c_reported;          // max(0, -min v_eps)/eps
};

/// Remark-1.7 transform: multiplies the base kernel by e^{(F(x+eps g)-F(x))/2eps}
/// and returns V_eps = int (base - transformed). Requires a kernel with finite
/// total mass per x.
GroundStateTransform ground_state_transform(const KernelSpec& base, const SpatialFn& F,
                                            const GridDomain& grid, double eps,
                                            const QuadratureOptions& opt = {});

} // namespace agmon
