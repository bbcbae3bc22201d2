#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "curvlab/classifier.hpp"

namespace curvlab {

// The detector works with the pairwise margin oriented as
// F = f_{k_hat(x)} - f_alt, so that near clean samples the boundary shows
// negative average curvature and near minimally-perturbed samples positive
// average curvature; perturbed means rho >= threshold.

// v^T G v where G is the Hessian of F = f_{k_hat} - f_alt projected on the
// tangent plane of the unit normal and divided by the gradient norm,
// evaluated at x itself (x is assumed near the boundary). One
// Hessian-vector product per call.
double quadratic_form_g(const Classifier& net, const Vec& x, int alt_class, const Vec& v);

struct HutchinsonEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int probes = 0;
};

// Monte-Carlo average of v^T G v over uniform unit probes. For uniform v
// the expectation is tr(G)/d (the d-1 principal curvatures averaged over d
// directions); the sign, which drives detection, matches the mean
// curvature's.
HutchinsonEstimate hutchinson_mean_curvature(const Classifier& net, const Vec& x,
                                             int alt_class, int probes, std::uint64_t seed);

// Same estimate with an explicit margin orientation F = f_i - f_j. Needed
// where predict(x) is ambiguous, e.g. exactly on the boundary.
HutchinsonEstimate pair_mean_curvature(const Classifier& net, const Vec& x, int i, int j,
                                       int probes, std::uint64_t seed);

struct DetectionVerdict {
    double rho = 0.0;
    bool perturbed = false;
    std::optional<int> recovered_label;  // present iff perturbed
    std::vector<std::optional<double>> per_class_scores;  // indexed by class
    int probes = 0;
    double threshold = 0.0;
    int predicted_label = 0;
};

// Per-class boundary-curvature scores from probes shared across classes;
// rho is their mean, the verdict flags rho >= t, and the recovered label is
// the class with the highest score (ties to the lowest index). Classes with
// a degenerate gradient are skipped; if all are degenerate this throws.
DetectionVerdict detect(const Classifier& net, const Vec& x, int probes, double threshold,
                        std::uint64_t seed);

// Batch scores with per-sample probe streams (seed + sample index), so
// results do not depend on evaluation order.
std::vector<double> detection_scores(const Classifier& net, const Mat& samples, int probes,
                                     std::uint64_t seed);

struct SignStatistics {
    double clean_negative = 0.0;  // fraction of usable clean samples
    double clean_positive = 0.0;
    double perturbed_negative = 0.0;
    double perturbed_positive = 0.0;
    int clean_used = 0;
    int clean_skipped = 0;
    int perturbed_used = 0;
    int perturbed_skipped = 0;
};

// Fractions of each set whose boundary-evaluated average curvature lands
// on each side of zero. Each sample is first carried onto the nearby
// decision boundary (minimal perturbation + refinement); the curvature is
// estimated there with the detector's sign convention.
SignStatistics sign_statistics(const Classifier& net, const Mat& clean, const Mat& perturbed,
                               int probes, std::uint64_t seed);

struct RocPoint {
    double threshold = 0.0;
    double tpr_clean = 0.0;      // clean samples detected as clean (rho < t)
    double fpr_perturbed = 0.0;  // perturbed samples passing as clean
};

struct RocTable {
    std::vector<RocPoint> points;
    double auc = 0.0;  // rank statistic P(rho_clean < rho_pert) + ties/2
};

// Threshold sweep over the observed score range (plus open ends), with the
// exact rank-based area under the curve.
RocTable roc_sweep(const std::vector<double>& clean_scores,
                   const std::vector<double>& perturbed_scores, int thresholds = 101);

struct RecoveryReport {
    int total = 0;
    int flagged = 0;
    int correct = 0;
    std::optional<double> accuracy;  // absent when nothing was flagged
};

// Among perturbed samples flagged by the detector, the fraction whose
// recovered label matches the pre-perturbation predicted label.
RecoveryReport recover_labels(const Classifier& net, const Mat& perturbed,
                              const std::vector<int>& original_labels, int probes,
                              double threshold, std::uint64_t seed);

}  // namespace curvlab
