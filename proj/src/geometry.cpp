#include "agmon/geometry.hpp"

#include <cmath>
#include <queue>
#include <string>

namespace agmon {

GridDomain::GridDomain(int dim, Vec lo, Vec hi, double h, SigmaShape shape,
                       Vec ball_center, double ball_radius, Vec well)
    : dim_(dim), lo_(lo), hi_(hi), h_(h), shape_(shape),
      center_(ball_center), radius_(ball_radius) {
    if (dim != 1 && dim != 2) throw config_error("grid: dimension must be 1 or 2");
    if (h <= 0) throw config_error("grid: spacing h must be positive");
    for (int a = 0; a < dim_; ++a) {
        const double len = hi_[a] - lo_[a];
        if (len <= 0) throw config_error("grid: empty box");
        const double cells = len / h;
        const int n = static_cast<int>(std::lround(cells));
        if (std::abs(cells - n) > 1e-9 * std::max(1.0, cells))
            throw config_error("grid: box length " + std::to_string(len) +
                               " is not a multiple of h = " + std::to_string(h));
        ncells_[a] = n - 1; // strictly interior lattice points
        if (ncells_[a] < 3) throw config_error("grid: too few interior nodes");
    }
    if (dim_ == 1) ncells_[1] = 1;

    cell_node_.assign(static_cast<size_t>(ncells_[0]) * (dim_ == 2 ? ncells_[1] : 1), -1);
    for (int i = 0; i < ncells_[0]; ++i) {
        for (int j = 0; j < (dim_ == 2 ? ncells_[1] : 1); ++j) {
            LatticeOffset k{i, j};
            if (!inside(coord_of(k))) continue;
            cell_node_[flat(k)] = static_cast<int32_t>(nodes_.size());
            nodes_.push_back(k);
        }
    }
    if (nodes_.empty()) throw config_error("grid: Sigma contains no nodes");

    // the declared well must land on a node
    well_node_ = -1;
    double best = 1e300;
    for (int n = 0; n < node_count(); ++n) {
        const double r = norm(Vec{coord(n)[0] - well[0], coord(n)[1] - well[1]}, dim_);
        if (r < best) {
            best = r;
            well_node_ = n;
        }
    }
    if (best > 1e-9)
        throw config_error("grid: well is not a lattice node (offset " +
                           std::to_string(best) + ")");
}

bool GridDomain::inside(const Vec& x) const {
    for (int a = 0; a < dim_; ++a)
        if (!(x[a] > lo_[a] && x[a] < hi_[a])) return false;
    if (shape_ == SigmaShape::Ball) {
        const Vec r{x[0] - center_[0], x[1] - center_[1]};
        return norm(r, dim_) < radius_;
    }
    return true;
}

bool GridDomain::connected() const {
    std::vector<char> seen(node_count(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int cnt = 1;
    const LatticeOffset axes[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    while (!q.empty()) {
        const int n = q.front();
        q.pop();
        const int naxes = dim_ == 2 ? 4 : 2;
        for (int a = 0; a < naxes; ++a) {
            const int m = neighbor(n, axes[a]);
            if (m >= 0 && !seen[m]) {
                seen[m] = 1;
                ++cnt;
                q.push(m);
            }
        }
    }
    return cnt == node_count();
}

int GridDomain::alignment(double eps) const {
    const double ratio = eps / h_;
    const int m = static_cast<int>(std::lround(ratio));
    if (m < 1 || std::abs(ratio - m) > 1e-9 * std::max(1.0, ratio))
        throw config_error("eps/h must be a positive integer: eps = " +
                           std::to_string(eps) + ", h = " + std::to_string(h_));
    return m;
}

} // namespace agmon
