#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curvlab/boundary.hpp"
#include "curvlab/classifier.hpp"
#include "curvlab/dataset.hpp"

namespace curvlab {

// Left singular vectors of the matrix M whose columns are the strongest
// principal directions collected at boundary points near many samples:
// the data-shared curved directions.
struct SharedBasis {
    Mat U;                // d x m, orthonormal columns
    Vec singular_values;  // nonincreasing, one per column
    int samples_used = 0;
    int samples_skipped = 0;
    int dirs_per_sample = 0;
};

struct Subspace {
    Mat basis;  // orthonormal columns
    int dimension() const { return static_cast<int>(basis.cols()); }
    int ambient_dim() const { return static_cast<int>(basis.rows()); }
};

enum class DirectionSelection { ByAbsCurvature, BySignedCurvature };

struct SharedBasisOptions {
    int per_sample_top_p = 10;
    int m = 0;  // 0: keep min(d, columns of M) singular vectors
    DirectionSelection selection = DirectionSelection::ByAbsCurvature;
    EigenPath eigen_path = EigenPath::Auto;
    PerturbationOptions perturbation;
};

// For each sample row: minimal perturbation to the boundary, refinement,
// principal directions, keep the strongest per_sample_top_p. Samples whose
// boundary search fails are skipped and counted.
SharedBasis build_shared_basis(const Classifier& net, const Mat& samples,
                               const SharedBasisOptions& opts, std::uint64_t seed);

Subspace leading_subspace(const SharedBasis& basis, int dimension);

// Paper-scaled default: min(200, max(1, d/4)).
int default_subspace_dim(int input_dim);

struct RhoEstimate {
    double rho = 0.0;
    double numerator = 0.0;   // |u^T P H P u| / ||grad||
    double denom_mean = 0.0;  // E_v |v^T P H P v| / ||grad||, Monte-Carlo
    double denom_std_error = 0.0;
    double rho_std_error = 0.0;  // first-order propagation of the denominator error
};

// How curved the boundary is along u, relative to a random direction:
// rho = |u^T P H P u| / E_{v ~ sphere} |v^T P H P v|.
RhoEstimate rho_statistic(const Classifier& net, const BoundaryPoint& bp, const Vec& u,
                          int denom_samples, std::uint64_t seed);

// ||P_S v|| / ||v||, in [0, 1].
double projection_norm(const Subspace& subspace, const Vec& v);

struct NoiseCurve {
    bool present = false;
    std::vector<double> rate;       // label-change fraction per magnitude
    std::vector<double> std_error;
};

struct NoiseRobustnessReport {
    std::vector<double> magnitudes;  // as fractions of the typical norm
    double typical_norm = 0.0;       // median validation sample norm
    NoiseCurve in_subspace;
    NoiseCurve orthogonal;  // absent when the subspace fills the space
};

// Label-change rate under noise of the given relative magnitudes, drawn
// uniformly on the unit sphere of S and of its orthogonal complement.
NoiseRobustnessReport noise_robustness_split(const Classifier& net, const Dataset& validation,
                                             const Subspace& subspace,
                                             const std::vector<double>& magnitudes,
                                             int trials, std::uint64_t seed);

struct ProjectionNormRow {
    std::string source;
    bool present = false;
    double mean = 0.0;
    double std_error = 0.0;
    int count = 0;
    std::string note;
};

struct ProjectionTableOptions {
    int random_draws = 200;
    int pair_count = 200;
    int adversarial_count = 100;
    std::optional<int> image_side;  // enables the spatial-gradient row
    PerturbationOptions perturbation;
};

// Mean projection norm onto S for four perturbation sources: uniform
// random directions, same-prediction sample differences, spatial image
// gradients (image-shaped data only), and minimal adversarial
// perturbations.
std::vector<ProjectionNormRow> projection_norm_table(const Classifier& net,
                                                     const Subspace& subspace,
                                                     const Dataset& validation,
                                                     const ProjectionTableOptions& opts,
                                                     std::uint64_t seed);

}  // namespace curvlab
