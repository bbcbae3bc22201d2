#pragma once

#include <optional>

#include "curvlab/classifier.hpp"

namespace curvlab {

struct PerturbationOptions {
    double overshoot = 0.02;  // multiplicative margin past the boundary
    int max_iter = 100;
    // Targeted only: binary-search back to the smallest multiple of r that
    // still lands in the target region. Tightens path anchors.
    bool tighten = false;
};

// The returned r already includes the overshoot factor: on success
// predict(x + r) differs from predict(x) (or equals the target), and
// ||r|| / (1 + overshoot) estimates the distance to the boundary.
struct PerturbationResult {
    Vec r;
    int iterations = 0;
    bool succeeded = false;
    int original_label = 0;
    int new_label = 0;
    std::optional<int> target_class;

    double norm() const { return r.norm(); }
};

// Smallest-perturbation search by iterative linearization: each step jumps
// to the nearest linearized pairwise boundary over all classes, until the
// overshot point changes label.
PerturbationResult minimal_perturbation(const Classifier& net, const Vec& x,
                                        const PerturbationOptions& opts = {});

// Same scheme restricted to the boundary against a fixed target class;
// success means the overshot point is predicted as `target`.
PerturbationResult targeted_projection(const Classifier& net, const Vec& x, int target,
                                       const PerturbationOptions& opts = {});

// x + alpha * r, alpha >= 1.
Vec scale_perturbation(const Vec& x, const Vec& r, double alpha);

}  // namespace curvlab
