#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curvlab/adversarial.hpp"
#include "curvlab/classifier.hpp"
#include "curvlab/dataset.hpp"

namespace curvlab {

// Piecewise-linear path through a classification region, anchors first to
// last. When valid, every validation sample on every segment is predicted
// as region_label.
struct Path {
    std::vector<Vec> anchors;
    int region_label = 0;
    bool valid = false;
    int depth_used = 0;
};

struct PathConfig {
    int depth_cap = 20;
    int samples_per_segment = 8;
    // Equispaced validation samples at least this dense along each segment;
    // callers set it to 1% of the dataset diameter.
    double sample_spacing = 0.01;
    PerturbationOptions projection;  // midpoint re-projection settings

    PathConfig() { projection.tighten = true; }
};

struct PathValidation {
    bool valid = false;
    std::optional<Vec> first_failure;
};

// Deterministic equispaced membership check over every segment; the sample
// count per segment is max(samples_per_segment, ceil(length / spacing)).
PathValidation validate_path(const Classifier& net, const Path& path,
                             int samples_per_segment, double spacing);

double path_length(const Path& path);

// Recursive midpoint construction: a segment that validates is kept; a
// misclassified midpoint is projected back into the region (targeted
// minimal perturbation, with one fallback midpoint toward the nearer
// endpoint); otherwise both halves recurse. Hitting depth_cap returns
// valid=false with the partial path retained -- "not connected at this
// resolution", never a disconnection proof.
Path find_path(const Classifier& net, const Vec& x1, const Vec& x2, const PathConfig& cfg);

struct ScenarioPair {
    int pair_id = 0;
    int scenario = 1;
    bool success = false;
    int anchors = 0;
    int depth = 0;
    double length = 0.0;
    std::string note;  // skip reason when endpoints could not be built
};

// The three endpoint regimes: (1) two same-prediction validation points,
// (2) validation point vs a differently-classified point pushed into its
// region, (3) validation point vs a uniform point on the sphere of radius
// median ||x|| pushed into its region.
std::vector<ScenarioPair> run_scenario(const Classifier& net, int scenario, int pairs,
                                       const Dataset& validation, std::uint64_t seed,
                                       const PathConfig& cfg);

struct ConvexProbeReport {
    std::vector<int> k_values;
    std::vector<double> probability;
    std::vector<int> trials;        // completed trials per k
    std::vector<double> std_error;  // binomial standard error
};

// Empirical probability that a uniform convex combination of k points from
// one predicted region is still predicted in that region.
ConvexProbeReport convex_probe(const Classifier& net, const Dataset& validation,
                               const std::vector<int>& k_values, int trials,
                               std::uint64_t seed);

}  // namespace curvlab
