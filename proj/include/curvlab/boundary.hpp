#pragma once

#include <cstdint>
#include <vector>

#include "curvlab/classifier.hpp"
#include "curvlab/lanczos.hpp"

namespace curvlab {

// Point on (or within tolerance of) the pairwise decision boundary
// {z : F(z) = 0} with F = f_i - f_j.
struct BoundaryPoint {
    Vec z;
    int class_i = 0;
    int class_j = 1;
    double f_value = 0.0;
    Vec gradient;
    double grad_norm = 0.0;
    Vec unit_normal;
};

// Scale-free tolerance: |F(z)| <= 1e-6 * max(1, ||grad|| * ||z||).
double boundary_tolerance(const Vec& z, double grad_norm);

struct RefineOptions {
    int max_bracket_steps = 60;
    int max_bisect_steps = 200;
};

// Wraps an existing point; checks the tolerance and the gradient.
BoundaryPoint make_boundary_point(const Classifier& net, const Vec& z, int i, int j);

// Walks from x_start along the line through -sign(F) * grad F until the
// margin changes sign, then bisects down to the boundary tolerance. Throws
// NoBoundaryFound if no sign change shows up within max_bracket_steps, and
// DegenerateNormal on a vanishing gradient.
BoundaryPoint refine_to_boundary(const Classifier& net, const Vec& x_start, int i, int j,
                                 const RefineOptions& opts = {});

// v minus its component along the unit normal. Idempotent.
Vec tangent_project(const BoundaryPoint& bp, const Vec& v);

// Normal curvature kappa(z, v) = v_t^T H_F v_t / (||v_t||^2 ||grad F||)
// with v_t the tangent projection of v. One Hessian-vector product.
double normal_curvature(const Classifier& net, const BoundaryPoint& bp, const Vec& v);

enum class EigenPath { Auto, Dense, Lanczos };

// Principal curvatures and directions: eigenpairs of the projected,
// gradient-normalized Hessian restricted to the tangent space. The normal
// direction never enters (the dense path works in an explicit tangent
// basis, the matrix-free path deflates the normal), so its zero eigenvalue
// is excluded by construction.
struct CurvatureProfile {
    std::vector<double> curvatures;  // descending
    Mat directions;                  // columns, orthonormal, orthogonal to the normal
    double mean_curvature = 0.0;
    bool complete = false;  // all d-1 curvatures present
};

inline constexpr int kDenseEigenLimit = 300;

// k < 0 requests the full profile. For a partial request on the Lanczos
// path the result holds the k most positive and k most negative
// curvatures; mean_curvature is then filled from the trace identity.
CurvatureProfile principal_curvatures(const Classifier& net, const BoundaryPoint& bp,
                                      int k = -1, EigenPath path = EigenPath::Auto,
                                      std::uint64_t seed = 1);

// tr(P H P) / ||grad F|| by the identity tr(PHP) = tr(H) - n^T H n,
// costing d+1 Hessian-vector products.
double projected_hessian_trace(const Classifier& net, const BoundaryPoint& bp);

// Average of all d-1 principal curvatures. Dense eigendecomposition for
// small d, trace identity otherwise.
double mean_curvature_exact(const Classifier& net, const BoundaryPoint& bp,
                            EigenPath path = EigenPath::Auto);

// Orthonormal basis of the hyperplane orthogonal to the unit vector n,
// as the columns of a d x (d-1) matrix.
Mat tangent_basis(const Vec& unit_normal);

}  // namespace curvlab
