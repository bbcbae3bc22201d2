#include "curvlab/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "curvlab/errors.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

namespace {

void orthogonalize(Vec& w, const std::vector<Vec>& basis) {
    // Two classical Gram-Schmidt sweeps.
    for (int sweep = 0; sweep < 2; ++sweep)
        for (const Vec& q : basis) w -= q.dot(w) * q;
}

Vec fresh_start_vector(int dim, const std::vector<Vec>& deflation,
                       const std::vector<Vec>& basis, Rng& rng) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        Vec v = rng.gaussian_vector(dim);
        orthogonalize(v, deflation);
        orthogonalize(v, basis);
        const double n = v.norm();
        if (n > 1e-10) return v / n;
    }
    throw LanczosError("could not draw a start vector orthogonal to the deflation set");
}

}  // namespace

LanczosResult lanczos_extreme_eigenpairs(const std::function<Vec(const Vec&)>& apply,
                                         int dim, int k_top, int k_bottom,
                                         const std::vector<Vec>& deflation,
                                         const LanczosOptions& opts) {
    if (dim <= 0) throw InvalidInput("lanczos: dimension must be positive");
    if (k_top < 0 || k_bottom < 0 || k_top + k_bottom == 0)
        throw InvalidInput("lanczos: need at least one requested eigenpair");

    const int eff_dim = dim - static_cast<int>(deflation.size());
    if (eff_dim <= 0) throw InvalidInput("lanczos: deflation set spans the space");
    const int want_top = std::min(k_top, eff_dim);
    const int want_bottom = std::min(k_bottom, eff_dim);
    const int max_iter = opts.max_iter > 0 ? std::min(opts.max_iter, eff_dim) : eff_dim;

    Rng rng(opts.seed);
    std::vector<Vec> basis;
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[m] couples basis[m] and basis[m+1]

    basis.push_back(fresh_start_vector(dim, deflation, basis, rng));

    auto ritz = [&](int m) {
        Mat T = Mat::Zero(m, m);
        for (int r = 0; r < m; ++r) {
            T(r, r) = alpha[r];
            if (r + 1 < m) T(r, r + 1) = T(r + 1, r) = beta[r];
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(T);
        return es;
    };

    auto extract = [&](const Eigen::SelfAdjointEigenSolver<Mat>& es, int m,
                       bool exhausted, int iterations) {
        // Ascending eigenvalues from Eigen; select extremes.
        std::vector<int> keep;
        const int nt = std::min(want_top, m);
        const int nb = std::min(want_bottom, m);
        for (int t = 0; t < nt; ++t) keep.push_back(m - 1 - t);
        for (int b = 0; b < nb; ++b) {
            const int idx = b;
            if (std::find(keep.begin(), keep.end(), idx) == keep.end()) keep.push_back(idx);
        }
        std::sort(keep.begin(), keep.end(), std::greater<int>());

        LanczosResult res;
        res.iterations = iterations;
        res.exhausted = exhausted;
        res.eigenvectors.resize(dim, static_cast<int>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c) {
            res.eigenvalues.push_back(es.eigenvalues()[keep[c]]);
            Vec v = Vec::Zero(dim);
            for (int r = 0; r < m; ++r) v += es.eigenvectors()(r, keep[c]) * basis[r];
            v.normalize();
            res.eigenvectors.col(static_cast<int>(c)) = v;
        }
        return res;
    };

    for (int m = 1; m <= max_iter; ++m) {
        const Vec& q = basis[m - 1];
        Vec w = apply(q);
        alpha.push_back(q.dot(w));
        w -= alpha.back() * q;
        if (m >= 2) w -= beta[m - 2] * basis[m - 2];
        orthogonalize(w, deflation);
        orthogonalize(w, basis);

        const bool exhausted = (m == eff_dim);
        bool converged = false;
        Eigen::SelfAdjointEigenSolver<Mat> es;
        const bool check_now = exhausted || m == max_iter ||
                               (m >= want_top + want_bottom && m % opts.check_interval == 0);
        const double b_next = w.norm();
        if (check_now) {
            es = ritz(m);
            if (exhausted) {
                converged = true;
            } else {
                converged = true;
                const int nt = std::min(want_top, m);
                const int nb = std::min(want_bottom, m);
                for (int t = 0; t < nt && converged; ++t) {
                    const int idx = m - 1 - t;
                    const double resid = b_next * std::abs(es.eigenvectors()(m - 1, idx));
                    if (resid > opts.tol * std::max(1.0, std::abs(es.eigenvalues()[idx])))
                        converged = false;
                }
                for (int b = 0; b < nb && converged; ++b) {
                    const double resid = b_next * std::abs(es.eigenvectors()(m - 1, b));
                    if (resid > opts.tol * std::max(1.0, std::abs(es.eigenvalues()[b])))
                        converged = false;
                }
                if (m < want_top + want_bottom) converged = false;
            }
        }
        if (converged) return extract(es, m, exhausted, m);
        if (m == max_iter) {
            if (opts.max_iter > 0 && max_iter < eff_dim)
                throw LanczosError("lanczos did not converge within " +
                                   std::to_string(max_iter) + " iterations (dim " +
                                   std::to_string(dim) + ", requested " +
                                   std::to_string(want_top) + "+" +
                                   std::to_string(want_bottom) + " eigenpairs)");
            return extract(es, m, exhausted, m);
        }

        if (b_next < 1e-12) {
            // Invariant subspace found; restart with a fresh direction.
            beta.push_back(0.0);
            basis.push_back(fresh_start_vector(dim, deflation, basis, rng));
        } else {
            beta.push_back(b_next);
            basis.push_back(w / b_next);
        }
    }
    throw LanczosError("lanczos: unreachable");
}

}  // namespace curvlab
