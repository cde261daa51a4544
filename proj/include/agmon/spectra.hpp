#pragma once

#include <vector>

#include "agmon/form.hpp"

namespace agmon {

struct EigenPair {
    double lambda = 0;
    std::vector<double> u; // unit norm in the h^d-weighted inner product
    double residual = 0;   // ||H u - lambda u|| / ||u|| (unweighted 2-norms)
};

struct SolverOptions {
    int k = 4;
    double tol = 1e-10;
    int max_lanczos = 400;
    int cg_max = 50000;
    double cg_tol = 1e-13;
    double shift_rel = 1e-6; // shift = -shift_rel * ||H||, keeps the solve SPD
    unsigned seed = 42;
};

/// k smallest eigenpairs by shift-inverted Lanczos with full
/// reorthogonalization; inner solves are Jacobi-preconditioned CG.
std::vector<EigenPair> lowest_eigenpairs(const FormMatrix& H, int k,
                                         const SolverOptions& opt = {});

/// all eigenpairs with lambda <= emax (deflation by enlarging k)
std::vector<EigenPair> eigen_window(const FormMatrix& H, double emax,
                                    const SolverOptions& opt = {});

} // namespace agmon
