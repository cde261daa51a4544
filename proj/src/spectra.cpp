#include "agmon/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace agmon {

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double nrm(const std::vector<double>& a) { return std::sqrt(dotv(a, a)); }

struct ShiftedOp {
    const FormMatrix* H;
    double sigma;
    std::vector<double> jacobi; // diagonal of H - sigma
    int cg_max;
    double cg_tol;
    mutable std::vector<double> r, z, p, q;

    explicit ShiftedOp(const FormMatrix& h, double sg, int cgmax, double cgtol)
        : H(&h), sigma(sg), cg_max(cgmax), cg_tol(cgtol) {
        jacobi.assign(h.n(), -sigma);
        for (const auto& pr : h.pairs) {
            const double s = 0.5 * (pr.w_ij + pr.w_ji);
            jacobi[pr.i] += s;
            jacobi[pr.j] += s;
        }
        for (int i = 0; i < h.n(); ++i) jacobi[i] += h.diag_potential(i);
    }

    void apply_shifted(const std::vector<double>& u, std::vector<double>& out) const {
        H->apply(u, out);
        for (size_t i = 0; i < u.size(); ++i) out[i] -= sigma * u[i];
    }

    // y = (H - sigma)^{-1} b by preconditioned CG
    void solve(const std::vector<double>& b, std::vector<double>& y) const {
        const int n = H->n();
        y.assign(n, 0.0);
        r = b;
        z.resize(n);
        for (int i = 0; i < n; ++i) z[i] = r[i] / jacobi[i];
        p = z;
        double rz = dotv(r, z);
        const double b0 = nrm(b);
        if (b0 == 0) return;
        for (int it = 0; it < cg_max; ++it) {
            apply_shifted(p, q);
            const double alpha = rz / dotv(p, q);
            for (int i = 0; i < n; ++i) {
                y[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            if (nrm(r) <= cg_tol * b0) return;
            for (int i = 0; i < n; ++i) z[i] = r[i] / jacobi[i];
            const double rz_new = dotv(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        throw numeric_error("inner CG solve did not converge");
    }
};

} // namespace

std::vector<EigenPair> lowest_eigenpairs(const FormMatrix& H, int k,
                                         const SolverOptions& opt) {
    const int n = H.n();
    k = std::min(k, n);
    if (k <= 0) return {};

    const double nb = H.norm_bound();
    const double sigma = -opt.shift_rel * std::max(nb, 1e-30);
    ShiftedOp op(H, sigma, opt.cg_max, opt.cg_tol);

    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> V; // Lanczos basis
    std::vector<double> alpha, beta;    // tridiagonal of (H-sigma)^{-1}

    auto fresh_vector = [&](std::vector<double>& v) {
        v.resize(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        for (const auto& w : V) {
            const double c = dotv(v, w);
            for (int i = 0; i < n; ++i) v[i] -= c * w[i];
        }
        const double s = nrm(v);
        if (s < 1e-200) throw numeric_error("Lanczos: degenerate start vector");
        for (int i = 0; i < n; ++i) v[i] /= s;
    };

    std::vector<double> v0;
    fresh_vector(v0);
    V.push_back(std::move(v0));

    std::vector<double> w(n);
    std::vector<EigenPair> best;
    double best_res = std::numeric_limits<double>::infinity();

    const int max_steps = std::min(opt.max_lanczos, 2 * n + 20);
    for (int step = 0; step < max_steps; ++step) {
        op.solve(V.back(), w);
        const double a = dotv(w, V.back());
        alpha.push_back(a);
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& vv : V) {
                const double c = dotv(w, vv);
                for (int i = 0; i < n; ++i) w[i] -= c * vv[i];
            }
        double b = nrm(w);

        const int j = static_cast<int>(alpha.size());
        const bool check = j >= k && (j % 4 == 0 || b < 1e-13 || step == max_steps - 1 ||
                                      j == n);
        if (check) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j, j);
            for (int i = 0; i < j; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < j) T(i, i + 1) = T(i + 1, i) = beta.size() > size_t(i) ? beta[i] : 0.0;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            // largest theta of the inverse <-> smallest lambda of H
            std::vector<EigenPair> cand;
            double worst = 0.0;
            for (int t = 0; t < k; ++t) {
                const int idx = j - 1 - t;
                if (idx < 0) break;
                const double theta = es.eigenvalues()(idx);
                EigenPair ep;
                ep.lambda = sigma + 1.0 / theta;
                ep.u.assign(n, 0.0);
                for (int c = 0; c < j; ++c) {
                    const double y = es.eigenvectors()(c, idx);
                    for (int i = 0; i < n; ++i) ep.u[i] += y * V[c][i];
                }
                std::vector<double> hu(n);
                H.apply(ep.u, hu);
                const double un = nrm(ep.u);
                double rs = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double ri = hu[i] - ep.lambda * ep.u[i];
                    rs += ri * ri;
                }
                ep.residual = std::sqrt(rs) / un;
                worst = std::max(worst, ep.residual);
                cand.push_back(std::move(ep));
            }
            if (static_cast<int>(cand.size()) == k && worst < best_res) {
                best = cand;
                best_res = worst;
            }
            if (static_cast<int>(cand.size()) == k && worst <= opt.tol) break;
            if (j == n) break; // Krylov space exhausted: result is exact up to roundoff
        }

        if (static_cast<int>(V.size()) >= max_steps) break;
        if (b < 1e-13) {
            // breakdown: continue with a fresh orthogonal direction
            std::vector<double> nv;
            if (static_cast<int>(V.size()) >= n) break;
            fresh_vector(nv);
            V.push_back(std::move(nv));
            beta.push_back(0.0);
        } else {
            std::vector<double> nv(n);
            for (int i = 0; i < n; ++i) nv[i] = w[i] / b;
            V.push_back(std::move(nv));
            beta.push_back(b);
        }
    }

    if (best.empty() || best_res > opt.tol)
        throw numeric_error("eigensolver did not converge within the iteration budget (best residual " +
                            std::to_string(best_res) + ")");

    std::sort(best.begin(), best.end(),
              [](const EigenPair& a, const EigenPair& b) { return a.lambda < b.lambda; });

    // normalize in the h^d inner product, orient by the well-node sign
    const double hd = H.hd();
    const int wn = H.grid->well_node();
    for (auto& ep : best) {
        const double s = nrm(ep.u) * std::sqrt(hd);
        for (double& x : ep.u) x /= s;
        if (ep.u[wn] < 0)
            for (double& x : ep.u) x = -x;
    }
    return best;
}

std::vector<EigenPair> eigen_window(const FormMatrix& H, double emax,
                                    const SolverOptions& opt) {
    int k = std::max(2, opt.k);
    for (;;) {
        k = std::min(k, H.n());
        auto pairs = lowest_eigenpairs(H, k, opt);
        if (k == H.n() || pairs.back().lambda > emax) {
            pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                                       [&](const EigenPair& p) { return p.lambda > emax; }),
                        pairs.end());
            return pairs;
        }
        k *= 2;
    }
}

} // namespace agmon
