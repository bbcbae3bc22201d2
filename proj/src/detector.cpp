#include "curvlab/detector.hpp"

#include <algorithm>
#include <cmath>

#include "curvlab/adversarial.hpp"
#include "curvlab/boundary.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

namespace {

constexpr double kDegenerateGradNorm = 1e-12;

// Shared inner loop: scores s_alt = (1/T) sum_j v_j^T G_{alt} v_j for every
// alternative class, with one gradient and T HVPs per class.
std::vector<std::optional<double>> class_scores(const Classifier& net, const Vec& x,
                                                int predicted, const std::vector<Vec>& probes) {
    const int L = net.num_classes();
    std::vector<std::optional<double>> scores(static_cast<std::size_t>(L));
    for (int alt = 0; alt < L; ++alt) {
        if (alt == predicted) continue;
        const Vec g = net.grad_margin(x, predicted, alt);
        const double gn = g.norm();
        if (gn < kDegenerateGradNorm) continue;  // marked absent
        const Vec n = g / gn;
        double sum = 0.0;
        for (const Vec& v : probes) {
            const Vec pv = v - n.dot(v) * n;
            const Vec hv = net.hvp_margin(x, predicted, alt, pv);
            sum += pv.dot(hv) / gn;
        }
        scores[alt] = sum / static_cast<double>(probes.size());
    }
    return scores;
}

std::vector<Vec> draw_probes(int dim, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> probes;
    probes.reserve(count);
    for (int j = 0; j < count; ++j) probes.push_back(rng.unit_vector(dim));
    return probes;
}

}  // namespace

namespace {

double pair_quadratic_form(const Classifier& net, const Vec& x, int i, int j, const Vec& v) {
    const Vec g = net.grad_margin(x, i, j);
    const double gn = g.norm();
    if (gn < kDegenerateGradNorm)
        throw DegenerateNormal("pairwise gradient vanishes at the sample");
    const Vec n = g / gn;
    const Vec pv = v - n.dot(v) * n;
    const Vec hv = net.hvp_margin(x, i, j, pv);
    return pv.dot(hv) / gn;
}

}  // namespace

double quadratic_form_g(const Classifier& net, const Vec& x, int alt_class, const Vec& v) {
    const int predicted = net.predict(x);
    if (alt_class == predicted)
        throw InvalidInput("alternative class equals the predicted class");
    return pair_quadratic_form(net, x, predicted, alt_class, v);
}

HutchinsonEstimate pair_mean_curvature(const Classifier& net, const Vec& x, int i, int j,
                                       int probes, std::uint64_t seed) {
    if (probes < 2) throw InvalidInput("hutchinson estimate needs at least 2 probes");
    Rng rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (int p = 0; p < probes; ++p) {
        const double val = pair_quadratic_form(net, x, i, j, rng.unit_vector(net.input_dim()));
        sum += val;
        sumsq += val * val;
    }
    HutchinsonEstimate est;
    est.probes = probes;
    est.mean = sum / probes;
    const double var = std::max(0.0, (sumsq - sum * sum / probes) / (probes - 1));
    est.std_error = std::sqrt(var / probes);
    return est;
}

HutchinsonEstimate hutchinson_mean_curvature(const Classifier& net, const Vec& x,
                                             int alt_class, int probes, std::uint64_t seed) {
    const int predicted = net.predict(x);
    if (alt_class == predicted)
        throw InvalidInput("alternative class equals the predicted class");
    return pair_mean_curvature(net, x, predicted, alt_class, probes, seed);
}

DetectionVerdict detect(const Classifier& net, const Vec& x, int probes, double threshold,
                        std::uint64_t seed) {
    if (net.num_classes() < 2) throw InvalidInput("detector needs at least two classes");
    if (probes < 1) throw InvalidInput("detector needs at least one probe");
    if (!net.smooth()) throw NonSmoothActivation("detector requires smooth activations");

    DetectionVerdict verdict;
    verdict.probes = probes;
    verdict.threshold = threshold;
    verdict.predicted_label = net.predict(x);

    const std::vector<Vec> shared = draw_probes(net.input_dim(), probes, seed);
    verdict.per_class_scores = class_scores(net, x, verdict.predicted_label, shared);

    double sum = 0.0;
    int contributing = 0;
    for (const auto& s : verdict.per_class_scores) {
        if (!s) continue;
        sum += *s;
        ++contributing;
    }
    if (contributing == 0)
        throw DegenerateNormal("every pairwise gradient vanishes at the sample");
    verdict.rho = sum / contributing;
    verdict.perturbed = verdict.rho >= threshold;
    if (verdict.perturbed) {
        int best = -1;
        for (int c = 0; c < static_cast<int>(verdict.per_class_scores.size()); ++c) {
            const auto& s = verdict.per_class_scores[c];
            if (!s) continue;
            if (best < 0 || *s > *verdict.per_class_scores[best]) best = c;
        }
        verdict.recovered_label = best;
    }
    return verdict;
}

std::vector<double> detection_scores(const Classifier& net, const Mat& samples, int probes,
                                     std::uint64_t seed) {
    std::vector<double> scores;
    scores.reserve(samples.rows());
    for (int r = 0; r < samples.rows(); ++r) {
        const std::uint64_t child = Rng::derive(seed, "detect-probes",
                                                static_cast<std::uint64_t>(r));
        scores.push_back(detect(net, samples.row(r).transpose(), probes, 0.0, child).rho);
    }
    return scores;
}

SignStatistics sign_statistics(const Classifier& net, const Mat& clean, const Mat& perturbed,
                               int probes, std::uint64_t seed) {
    if (clean.rows() == 0 || perturbed.rows() == 0)
        throw InvalidInput("sign statistics need both sets nonempty");

    auto tally = [&](const Mat& set, std::string_view purpose, int& used, int& skipped,
                     double& neg, double& pos) {
        int negative = 0, positive = 0;
        for (int r = 0; r < set.rows(); ++r) {
            const Vec x = set.row(r).transpose();
            try {
                const PerturbationResult pert = minimal_perturbation(net, x);
                if (!pert.succeeded) {
                    ++skipped;
                    continue;
                }
                // Boundary point between the sample's class and the class it
                // flips to; curvature with the detector's orientation
                // F = f_{k_hat(x)} - f_other, pinned explicitly because
                // predict() is ambiguous on the boundary itself.
                const BoundaryPoint bp = refine_to_boundary(
                    net, x + pert.r, pert.original_label, pert.new_label);
                const HutchinsonEstimate est = pair_mean_curvature(
                    net, bp.z, pert.original_label, pert.new_label, probes,
                    Rng::derive(seed, purpose, static_cast<std::uint64_t>(r)));
                ++used;
                if (est.mean < 0.0)
                    ++negative;
                else
                    ++positive;
            } catch (const Error&) {
                ++skipped;
            }
        }
        if (used > 0) {
            neg = static_cast<double>(negative) / used;
            pos = static_cast<double>(positive) / used;
        }
    };

    SignStatistics stats;
    tally(clean, "signs-clean", stats.clean_used, stats.clean_skipped, stats.clean_negative,
          stats.clean_positive);
    tally(perturbed, "signs-perturbed", stats.perturbed_used, stats.perturbed_skipped,
          stats.perturbed_negative, stats.perturbed_positive);
    return stats;
}

RocTable roc_sweep(const std::vector<double>& clean_scores,
                   const std::vector<double>& perturbed_scores, int thresholds) {
    if (clean_scores.empty() || perturbed_scores.empty())
        throw InvalidInput("roc sweep needs scores for both sets");
    if (thresholds < 2) throw InvalidInput("roc sweep needs at least two thresholds");

    double lo = clean_scores[0], hi = clean_scores[0];
    for (double s : clean_scores) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    for (double s : perturbed_scores) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    const double pad = 1e-9 + 1e-6 * (hi - lo);
    lo -= pad;
    hi += pad;

    RocTable table;
    for (int t = 0; t < thresholds; ++t) {
        const double thr = lo + (hi - lo) * t / (thresholds - 1);
        RocPoint pt;
        pt.threshold = thr;
        int below = 0;
        for (double s : clean_scores) below += (s < thr) ? 1 : 0;
        pt.tpr_clean = static_cast<double>(below) / clean_scores.size();
        below = 0;
        for (double s : perturbed_scores) below += (s < thr) ? 1 : 0;
        pt.fpr_perturbed = static_cast<double>(below) / perturbed_scores.size();
        table.points.push_back(pt);
    }

    // Exact Mann-Whitney statistic.
    double wins = 0.0;
    for (double c : clean_scores)
        for (double p : perturbed_scores) {
            if (c < p)
                wins += 1.0;
            else if (c == p)
                wins += 0.5;
        }
    table.auc = wins / (static_cast<double>(clean_scores.size()) * perturbed_scores.size());
    return table;
}

RecoveryReport recover_labels(const Classifier& net, const Mat& perturbed,
                              const std::vector<int>& original_labels, int probes,
                              double threshold, std::uint64_t seed) {
    if (perturbed.rows() != static_cast<Eigen::Index>(original_labels.size()))
        throw DimensionMismatch("perturbed set and original labels disagree in size");
    RecoveryReport report;
    report.total = static_cast<int>(perturbed.rows());
    for (int r = 0; r < perturbed.rows(); ++r) {
        const std::uint64_t child = Rng::derive(seed, "detect-probes",
                                                static_cast<std::uint64_t>(r));
        const DetectionVerdict v =
            detect(net, perturbed.row(r).transpose(), probes, threshold, child);
        if (!v.perturbed) continue;
        ++report.flagged;
        if (v.recovered_label && *v.recovered_label == original_labels[r]) ++report.correct;
    }
    if (report.flagged > 0)
        report.accuracy = static_cast<double>(report.correct) / report.flagged;
    return report;
}

}  // namespace curvlab
