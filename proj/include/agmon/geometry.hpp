#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "agmon/errors.hpp"

namespace agmon {

// Points and jump displacements in dimension 1 or 2. The second component is
// ignored (kept zero) in 1D.
using Vec = std::array<double, 2>;
using LatticeOffset = std::array<int, 2>;

inline double dot(const Vec& a, const Vec& b, int dim) {
    double s = a[0] * b[0];
    if (dim == 2) s += a[1] * b[1];
    return s;
}

inline double norm(const Vec& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline Vec axpy(double t, const Vec& a, const Vec& b, int dim) {
    Vec r{b[0] + t * a[0], 0.0};
    if (dim == 2) r[1] = b[1] + t * a[1];
    return r;
}

enum class SigmaShape { Box, Ball };

/// Uniform lattice over an open bounded set Sigma. Nodes are the lattice
/// points lo + (k+1)h strictly inside Sigma; the well must coincide with a
/// node. Jump targets x + h z are resolved through the cell index table.
class GridDomain {
public:
    GridDomain(int dim, Vec lo, Vec hi, double h, SigmaShape shape,
               Vec ball_center, double ball_radius, Vec well);

    static GridDomain box(int dim, Vec lo, Vec hi, double h, Vec well) {
        return GridDomain(dim, lo, hi, h, SigmaShape::Box, Vec{0, 0}, 0.0, well);
    }
    static GridDomain ball(Vec center, double radius, double h, Vec well) {
        Vec lo{center[0] - radius, center[1] - radius};
        Vec hi{center[0] + radius, center[1] + radius};
        return GridDomain(2, lo, hi, h, SigmaShape::Ball, center, radius, well);
    }

    int dim() const { return dim_; }
    double spacing() const { return h_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int well_node() const { return well_node_; }
    SigmaShape shape() const { return shape_; }

    // lattice cell counts per axis (interior candidates)
    int cells(int axis) const { return ncells_[axis]; }

    const LatticeOffset& lattice_of(int node) const { return nodes_[node]; }

    Vec coord(int node) const { return coord_of(nodes_[node]); }

    Vec coord_of(const LatticeOffset& k) const {
        Vec x{lo_[0] + (k[0] + 1) * h_, 0.0};
        if (dim_ == 2) x[1] = lo_[1] + (k[1] + 1) * h_;
        return x;
    }

    // Midpoint of the segment joining two lattice nodes, computed symmetrically
    // from the integer indices so both orientations agree bitwise.
    Vec midpoint_of(const LatticeOffset& a, const LatticeOffset& b) const {
        Vec x{lo_[0] + (a[0] + b[0] + 2) * (0.5 * h_), 0.0};
        if (dim_ == 2) x[1] = lo_[1] + (a[1] + b[1] + 2) * (0.5 * h_);
        return x;
    }

    // node index of lattice point, or -1 when outside Sigma
    int node_at(const LatticeOffset& k) const {
        if (k[0] < 0 || k[0] >= ncells_[0]) return -1;
        if (dim_ == 2 && (k[1] < 0 || k[1] >= ncells_[1])) return -1;
        return cell_node_[flat(k)];
    }

    int neighbor(int node, const LatticeOffset& z) const {
        LatticeOffset k = nodes_[node];
        k[0] += z[0];
        k[1] += z[1];
        return node_at(k);
    }

    bool inside(const Vec& x) const;

    /// axis-adjacency connectivity of the node graph
    bool connected() const;

    /// integer alignment m = eps/h; throws config_error when eps is not a
    /// lattice multiple
    int alignment(double eps) const;

    double cell_volume() const { return dim_ == 2 ? h_ * h_ : h_; }

private:
    int flat(const LatticeOffset& k) const {
        return dim_ == 2 ? k[0] * ncells_[1] + k[1] : k[0];
    }

    int dim_;
    Vec lo_, hi_;
    double h_;
    SigmaShape shape_;
    Vec center_;
    double radius_;
    std::array<int, 2> ncells_;
    std::vector<LatticeOffset> nodes_;
    std::vector<int32_t> cell_node_;
    int well_node_;
};

} // namespace agmon
