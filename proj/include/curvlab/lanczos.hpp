#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "curvlab/classifier.hpp"

namespace curvlab {

struct LanczosOptions {
    int max_iter = 0;          // 0: run to subspace exhaustion if needed
    double tol = 1e-10;        // Ritz residual tolerance, relative to |theta|
    std::uint64_t seed = 1;    // start-vector draw
    int check_interval = 1;    // how often to test convergence
};

struct LanczosResult {
    std::vector<double> eigenvalues;  // descending
    Mat eigenvectors;                 // columns match eigenvalues
    int iterations = 0;
    bool exhausted = false;  // Krylov space spanned the full (deflated) space
};

// Extreme eigenpairs of a symmetric operator given only matrix-vector
// products. Full reorthogonalization against previous Lanczos vectors and
// against the deflation set (vectors the Krylov space must stay orthogonal
// to). On breakdown the recurrence restarts with a fresh orthogonal vector,
// which keeps the tridiagonal matrix block-diagonal and the Ritz pairs
// valid. Returns the k_top most positive and k_bottom most negative
// converged Ritz pairs (deduplicated if they overlap); throws LanczosError
// with an iteration diagnostic if max_iter stops the run before
// convergence.
LanczosResult lanczos_extreme_eigenpairs(
    const std::function<Vec(const Vec&)>& apply, int dim, int k_top, int k_bottom,
    const std::vector<Vec>& deflation, const LanczosOptions& opts = {});

}  // namespace curvlab
