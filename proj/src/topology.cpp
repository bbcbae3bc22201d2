#include "curvlab/topology.hpp"

#include <cmath>

#include "curvlab/errors.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

namespace {

int segment_sample_count(const Vec& a, const Vec& b, int samples_per_segment,
                         double spacing) {
    const double len = (b - a).norm();
    const int by_spacing = spacing > 0 ? static_cast<int>(std::ceil(len / spacing)) : 0;
    return std::max(samples_per_segment, by_spacing);
}

bool segment_in_region(const Classifier& net, const Vec& a, const Vec& b, int label,
                       int samples_per_segment, double spacing, std::optional<Vec>* failure) {
    const int count = segment_sample_count(a, b, samples_per_segment, spacing);
    for (int s = 0; s <= count; ++s) {
        const double t = count == 0 ? 0.0 : static_cast<double>(s) / count;
        const Vec p = a + t * (b - a);
        if (net.predict(p) != label) {
            if (failure) *failure = p;
            return false;
        }
    }
    return true;
}

struct PathBuilder {
    const Classifier& net;
    const PathConfig& cfg;
    int label;
    int max_depth_seen = 0;
    bool ok = true;

    // Returns anchors covering [a, b] including both endpoints.
    std::vector<Vec> build(const Vec& a, const Vec& b, int depth) {
        max_depth_seen = std::max(max_depth_seen, depth);
        if (segment_in_region(net, a, b, label, cfg.samples_per_segment,
                              cfg.sample_spacing, nullptr))
            return {a, b};
        if (depth >= cfg.depth_cap) {
            ok = false;
            return {a, b};
        }
        Vec mid = 0.5 * (a + b);
        if (net.predict(mid) != label && !project_midpoint(mid, a, b)) {
            ok = false;
            return {a, b};
        }
        std::vector<Vec> left = build(a, mid, depth + 1);
        std::vector<Vec> right = build(mid, b, depth + 1);
        left.insert(left.end(), right.begin() + 1, right.end());
        return left;
    }

    // Projects a misclassified midpoint into the region; on failure falls
    // back once to the midpoint shifted toward the nearer endpoint.
    bool project_midpoint(Vec& mid, const Vec& a, const Vec& b) {
        PerturbationResult res = targeted_projection(net, mid, label, cfg.projection);
        if (res.succeeded) {
            mid += res.r;
            return true;
        }
        const Vec& nearer = (mid - a).norm() <= (mid - b).norm() ? a : b;
        Vec fallback = 0.5 * (mid + nearer);
        if (net.predict(fallback) == label) {
            mid = fallback;
            return true;
        }
        PerturbationResult retry = targeted_projection(net, fallback, label, cfg.projection);
        if (retry.succeeded) {
            mid = fallback + retry.r;
            return true;
        }
        return false;
    }
};

}  // namespace

PathValidation validate_path(const Classifier& net, const Path& path,
                             int samples_per_segment, double spacing) {
    PathValidation out;
    if (path.anchors.empty()) throw InvalidInput("path has no anchors");
    if (path.anchors.size() == 1) {
        out.valid = net.predict(path.anchors[0]) == path.region_label;
        if (!out.valid) out.first_failure = path.anchors[0];
        return out;
    }
    for (std::size_t s = 0; s + 1 < path.anchors.size(); ++s) {
        std::optional<Vec> failure;
        if (!segment_in_region(net, path.anchors[s], path.anchors[s + 1], path.region_label,
                               samples_per_segment, spacing, &failure)) {
            out.first_failure = failure;
            return out;
        }
    }
    out.valid = true;
    return out;
}

double path_length(const Path& path) {
    double len = 0.0;
    for (std::size_t s = 0; s + 1 < path.anchors.size(); ++s)
        len += (path.anchors[s + 1] - path.anchors[s]).norm();
    return len;
}

Path find_path(const Classifier& net, const Vec& x1, const Vec& x2, const PathConfig& cfg) {
    const int l1 = net.predict(x1);
    const int l2 = net.predict(x2);
    if (l1 != l2)
        throw InvalidQuery("path endpoints lie in different classification regions (" +
                           std::to_string(l1) + " vs " + std::to_string(l2) + ")");

    Path path;
    path.region_label = l1;
    if ((x2 - x1).norm() == 0.0) {
        path.anchors = {x1, x2};
        path.valid = true;
        path.depth_used = 0;
        return path;
    }

    PathBuilder builder{net, cfg, l1};
    path.anchors = builder.build(x1, x2, 0);
    path.depth_used = builder.max_depth_seen;
    path.valid = builder.ok;
    return path;
}

std::vector<ScenarioPair> run_scenario(const Classifier& net, int scenario, int pairs,
                                       const Dataset& validation, std::uint64_t seed,
                                       const PathConfig& cfg) {
    if (scenario < 1 || scenario > 3) throw InvalidInput("scenario must be 1, 2 or 3");
    if (validation.size() < 2) throw InvalidInput("scenario needs a validation set");

    Rng rng = Rng::for_purpose(seed, "scenario-pairs", static_cast<std::uint64_t>(scenario));
    const int n = validation.size();
    std::vector<int> predicted(n);
    for (int r = 0; r < n; ++r) predicted[r] = net.predict(validation.sample(r));
    const double sphere_radius = median_sample_norm(validation.X);

    std::vector<ScenarioPair> out;
    for (int p = 0; p < pairs; ++p) {
        ScenarioPair sp;
        sp.pair_id = p;
        sp.scenario = scenario;

        const int a = static_cast<int>(rng.uniform_int(n));
        const Vec x1 = validation.sample(a);
        Vec x2;
        bool have_x2 = false;
        if (scenario == 1) {
            for (int attempt = 0; attempt < 10 * n && !have_x2; ++attempt) {
                const int b = static_cast<int>(rng.uniform_int(n));
                if (b != a && predicted[b] == predicted[a]) {
                    x2 = validation.sample(b);
                    have_x2 = true;
                }
            }
            if (!have_x2) sp.note = "no second point with the same prediction";
        } else {
            Vec base;
            bool have_base = false;
            if (scenario == 2) {
                for (int attempt = 0; attempt < 10 * n && !have_base; ++attempt) {
                    const int b = static_cast<int>(rng.uniform_int(n));
                    if (predicted[b] != predicted[a]) {
                        base = validation.sample(b);
                        have_base = true;
                    }
                }
                if (!have_base) sp.note = "no differently-classified point available";
            } else {
                base = sphere_radius * rng.unit_vector(validation.d);
                if (net.predict(base) == predicted[a]) {
                    // Already inside the region; no perturbation needed.
                    x2 = base;
                    have_x2 = true;
                } else {
                    have_base = true;
                }
            }
            if (have_base && !have_x2) {
                PerturbationOptions popts = cfg.projection;
                popts.tighten = false;
                PerturbationResult res = targeted_projection(net, base, predicted[a], popts);
                if (res.succeeded) {
                    x2 = base + res.r;
                    have_x2 = true;
                } else {
                    sp.note = "targeted projection failed";
                }
            }
        }

        if (have_x2) {
            Path path = find_path(net, x1, x2, cfg);
            sp.success = path.valid;
            sp.anchors = static_cast<int>(path.anchors.size());
            sp.depth = path.depth_used;
            sp.length = path_length(path);
        }
        out.push_back(std::move(sp));
    }
    return out;
}

ConvexProbeReport convex_probe(const Classifier& net, const Dataset& validation,
                               const std::vector<int>& k_values, int trials,
                               std::uint64_t seed) {
    if (trials <= 0) throw InvalidInput("convex_probe needs a positive trial count");
    const int n = validation.size();
    if (n == 0) throw InvalidInput("convex_probe needs a validation set");

    std::vector<int> predicted(n);
    std::vector<std::vector<int>> by_region(static_cast<std::size_t>(net.num_classes()));
    for (int r = 0; r < n; ++r) {
        predicted[r] = net.predict(validation.sample(r));
        by_region[predicted[r]].push_back(r);
    }

    ConvexProbeReport report;
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
        const int k = k_values[ki];
        if (k <= 0) throw InvalidInput("convex_probe: k must be positive");
        Rng rng = Rng::for_purpose(seed, "convex-probe", static_cast<std::uint64_t>(k));
        int done = 0, hits = 0;
        for (int t = 0; t < trials; ++t) {
            const int anchor = static_cast<int>(rng.uniform_int(n));
            const auto& pool = by_region[predicted[anchor]];
            if (static_cast<int>(pool.size()) < k) continue;  // region too small for k

            // k distinct points from the region, anchor included.
            std::vector<int> chosen{anchor};
            while (static_cast<int>(chosen.size()) < k) {
                const int cand = pool[rng.uniform_int(pool.size())];
                bool dup = false;
                for (int c : chosen) dup = dup || (c == cand);
                if (!dup) chosen.push_back(cand);
            }
            const std::vector<double> w = rng.simplex_weights(k);
            Vec combo = Vec::Zero(validation.d);
            for (int c = 0; c < k; ++c) combo += w[c] * validation.sample(chosen[c]);
            ++done;
            if (net.predict(combo) == predicted[anchor]) ++hits;
        }
        const double prob = done > 0 ? static_cast<double>(hits) / done : 0.0;
        report.k_values.push_back(k);
        report.probability.push_back(prob);
        report.trials.push_back(done);
        report.std_error.push_back(done > 0 ? std::sqrt(prob * (1.0 - prob) / done) : 0.0);
    }
    return report;
}

}  // namespace curvlab
