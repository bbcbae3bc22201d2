#include "curvlab/adversarial.hpp"

#include <cmath>
#include <limits>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace {

constexpr double kTinyGrad = 1e-12;

// Machine-scale nudge along w for the degenerate start exactly on a
// boundary, where the linearized step has length zero.
Vec epsilon_step(const Vec& x, const Vec& w) {
    const double scale = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + x.norm());
    return scale * (w / w.norm());
}

}  // namespace

PerturbationResult minimal_perturbation(const Classifier& net, const Vec& x,
                                        const PerturbationOptions& opts) {
    const int L = net.num_classes();
    const int orig = net.predict(x);
    PerturbationResult res;
    res.original_label = orig;
    res.r = Vec::Zero(x.size());

    Vec r_acc = Vec::Zero(x.size());
    for (int it = 0; it < opts.max_iter; ++it) {
        const Vec overshot = x + (1.0 + opts.overshoot) * r_acc;
        if (net.predict(overshot) != orig) {
            res.succeeded = true;
            break;
        }
        res.iterations = it + 1;
        const Vec y = x + r_acc;
        const Vec logits = net.forward(y);

        // Closest linearized pairwise boundary over all other classes.
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        Vec best_w;
        double best_margin = 0.0;
        for (int k = 0; k < L; ++k) {
            if (k == orig) continue;
            const Vec w = net.grad_margin(y, k, orig);
            const double wn = w.norm();
            if (wn < kTinyGrad) continue;
            const double margin = logits[k] - logits[orig];
            const double dist = std::abs(margin) / wn;
            if (dist < best_dist) {
                best_dist = dist;
                best = k;
                best_w = w;
                best_margin = margin;
            }
        }
        if (best < 0) break;  // every pairwise gradient degenerate

        Vec step = (std::abs(best_margin) / best_w.squaredNorm()) * best_w;
        if (step.norm() == 0.0) step = epsilon_step(y, best_w);
        r_acc += step;
    }

    if (!res.succeeded &&
        net.predict(x + (1.0 + opts.overshoot) * r_acc) != orig)
        res.succeeded = true;

    res.r = (1.0 + opts.overshoot) * r_acc;
    res.new_label = net.predict(x + res.r);
    if (res.succeeded && res.new_label == orig) res.succeeded = false;  // hard re-check
    return res;
}

PerturbationResult targeted_projection(const Classifier& net, const Vec& x, int target,
                                       const PerturbationOptions& opts) {
    if (target < 0 || target >= net.num_classes())
        throw InvalidInput("target class out of range");
    const int orig = net.predict(x);
    if (target == orig) throw InvalidInput("target class equals the current prediction");

    PerturbationResult res;
    res.original_label = orig;
    res.target_class = target;
    res.r = Vec::Zero(x.size());

    Vec r_acc = Vec::Zero(x.size());
    // Multiple of r_acc that lands in the target region; the overshot point
    // is preferred, the raw point is a fallback for razor-thin regions.
    auto landing = [&](const Vec& racc) -> std::optional<double> {
        if (net.predict(x + (1.0 + opts.overshoot) * racc) == target)
            return 1.0 + opts.overshoot;
        if (racc.norm() > 0.0 && net.predict(x + racc) == target) return 1.0;
        return std::nullopt;
    };

    std::optional<double> multiple;
    for (int it = 0; it < opts.max_iter; ++it) {
        multiple = landing(r_acc);
        if (multiple) break;
        res.iterations = it + 1;
        const Vec y = x + r_acc;
        // Linearize against whatever class currently wins at y; for L = 2
        // this is the plain pairwise scheme.
        const int cur = net.predict(y);
        const Vec w = net.grad_margin(y, target, cur);
        const double wn = w.norm();
        if (wn < kTinyGrad) break;
        const Vec logits = net.forward(y);
        Vec step = (std::abs(logits[target] - logits[cur]) / (wn * wn)) * w;
        if (step.norm() == 0.0) step = epsilon_step(y, w);
        r_acc += step;
    }
    if (!multiple) multiple = landing(r_acc);
    res.succeeded = multiple.has_value();

    Vec r = multiple.value_or(1.0 + opts.overshoot) * r_acc;
    if (res.succeeded && opts.tighten && r.norm() > 0.0) {
        // Smallest multiple of r still reaching the target region.
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (net.predict(x + mid * r) == target)
                hi = mid;
            else
                lo = mid;
        }
        r *= hi;
    }
    res.r = r;
    res.new_label = net.predict(x + res.r);
    if (res.succeeded && res.new_label != target) res.succeeded = false;  // hard re-check
    return res;
}

Vec scale_perturbation(const Vec& x, const Vec& r, double alpha) {
    if (alpha < 1.0) throw InvalidInput("scale factor must be >= 1");
    if (x.size() != r.size()) throw DimensionMismatch("perturbation dimension mismatch");
    return x + alpha * r;
}

}  // namespace curvlab
