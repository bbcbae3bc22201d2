#include "curvlab/shared_directions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "curvlab/adversarial.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

namespace {

double quadratic_form(const Classifier& net, const BoundaryPoint& bp, const Vec& v) {
    const Vec pv = v - bp.unit_normal.dot(v) * bp.unit_normal;
    const Vec hv = net.hvp_margin(bp.z, bp.class_i, bp.class_j, pv);
    return pv.dot(hv) / bp.grad_norm;
}

}  // namespace

SharedBasis build_shared_basis(const Classifier& net, const Mat& samples,
                               const SharedBasisOptions& opts, std::uint64_t seed) {
    if (!net.smooth())
        throw NonSmoothActivation("shared directions require smooth activations");
    if (samples.rows() == 0) throw InvalidInput("no samples given");
    const int d = net.input_dim();
    if (samples.cols() != d) throw DimensionMismatch("sample dimension mismatch");
    const int p = std::min(opts.per_sample_top_p, d - 1);
    if (p <= 0) throw InvalidInput("per_sample_top_p must be positive");

    std::vector<Vec> columns;
    SharedBasis basis;
    basis.dirs_per_sample = p;
    for (int r = 0; r < samples.rows(); ++r) {
        const Vec x = samples.row(r).transpose();
        try {
            const PerturbationResult pert = minimal_perturbation(net, x, opts.perturbation);
            if (!pert.succeeded) {
                ++basis.samples_skipped;
                continue;
            }
            const BoundaryPoint bp =
                refine_to_boundary(net, x + pert.r, pert.original_label, pert.new_label);
            // Requesting p eigenpairs yields the p most positive and p most
            // negative curvatures, a superset of the p largest by |kappa|.
            const CurvatureProfile profile = principal_curvatures(
                net, bp, p, opts.eigen_path,
                Rng::derive(seed, "basis-eigs", static_cast<std::uint64_t>(r)));

            // Strongest directions of this profile.
            std::vector<int> order(profile.curvatures.size());
            std::iota(order.begin(), order.end(), 0);
            if (opts.selection == DirectionSelection::ByAbsCurvature) {
                std::sort(order.begin(), order.end(), [&](int a, int b) {
                    return std::abs(profile.curvatures[a]) > std::abs(profile.curvatures[b]);
                });
            }  // signed selection keeps the descending order as-is
            const int take = std::min<int>(p, static_cast<int>(order.size()));
            for (int t = 0; t < take; ++t) columns.push_back(profile.directions.col(order[t]));
            ++basis.samples_used;
        } catch (const Error&) {
            ++basis.samples_skipped;
        }
    }
    if (columns.empty()) throw InvalidInput("no boundary point succeeded; basis is empty");

    Mat M(d, static_cast<int>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) M.col(static_cast<int>(c)) = columns[c];

    Eigen::BDCSVD<Mat> svd(M, Eigen::ComputeThinU);
    const int available = static_cast<int>(svd.singularValues().size());
    const int m = opts.m > 0 ? std::min(opts.m, available) : available;
    basis.U = svd.matrixU().leftCols(m);
    basis.singular_values = svd.singularValues().head(m);
    return basis;
}

Subspace leading_subspace(const SharedBasis& basis, int dimension) {
    if (dimension <= 0 || dimension > basis.U.cols())
        throw InvalidInput("subspace dimension out of range");
    return Subspace{basis.U.leftCols(dimension)};
}

int default_subspace_dim(int input_dim) {
    return std::min(200, std::max(1, input_dim / 4));
}

RhoEstimate rho_statistic(const Classifier& net, const BoundaryPoint& bp, const Vec& u,
                          int denom_samples, std::uint64_t seed) {
    if (denom_samples < 2) throw InvalidInput("rho denominator needs at least 2 samples");
    const int d = static_cast<int>(bp.z.size());
    if (u.size() != d) throw DimensionMismatch("direction dimension mismatch");

    RhoEstimate est;
    est.numerator = std::abs(quadratic_form(net, bp, u));

    Rng rng = Rng::for_purpose(seed, "rho-denominator");
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < denom_samples; ++s) {
        const double val = std::abs(quadratic_form(net, bp, rng.unit_vector(d)));
        sum += val;
        sumsq += val * val;
    }
    est.denom_mean = sum / denom_samples;
    const double var =
        std::max(0.0, (sumsq - sum * sum / denom_samples) / (denom_samples - 1));
    est.denom_std_error = std::sqrt(var / denom_samples);
    if (est.denom_mean < 1e-12)
        throw DegenerateDenominator("random-direction curvature is numerically zero");
    est.rho = est.numerator / est.denom_mean;
    est.rho_std_error = est.rho * est.denom_std_error / est.denom_mean;
    return est;
}

double projection_norm(const Subspace& subspace, const Vec& v) {
    const double vn = v.norm();
    if (vn == 0.0) throw InvalidInput("projection_norm: zero vector");
    if (v.size() != subspace.ambient_dim())
        throw DimensionMismatch("projection_norm dimension mismatch");
    return std::min(1.0, (subspace.basis.transpose() * v).norm() / vn);
}

namespace {

Vec unit_in_subspace(const Subspace& s, Rng& rng) {
    const Vec g = rng.gaussian_vector(s.dimension());
    Vec v = s.basis * g;
    return v / v.norm();
}

Vec unit_in_complement(const Subspace& s, Rng& rng) {
    while (true) {
        Vec g = rng.gaussian_vector(s.ambient_dim());
        g -= s.basis * (s.basis.transpose() * g);
        const double n = g.norm();
        if (n > 1e-12) return g / n;
    }
}

}  // namespace

NoiseRobustnessReport noise_robustness_split(const Classifier& net, const Dataset& validation,
                                             const Subspace& subspace,
                                             const std::vector<double>& magnitudes,
                                             int trials, std::uint64_t seed) {
    if (validation.size() == 0) throw InvalidInput("noise split needs a validation set");
    if (trials <= 0) throw InvalidInput("noise split needs a positive trial count");

    NoiseRobustnessReport report;
    report.magnitudes = magnitudes;
    report.typical_norm = median_sample_norm(validation.X);
    const bool full_space = subspace.dimension() >= subspace.ambient_dim();
    report.in_subspace.present = true;
    report.orthogonal.present = !full_space;

    std::vector<int> predicted(validation.size());
    for (int r = 0; r < validation.size(); ++r)
        predicted[r] = net.predict(validation.sample(r));

    for (std::size_t mi = 0; mi < magnitudes.size(); ++mi) {
        const double len = magnitudes[mi] * report.typical_norm;
        int flips_s = 0, flips_perp = 0;
        Rng rng = Rng::for_purpose(seed, "noise-split", static_cast<std::uint64_t>(mi));
        for (int t = 0; t < trials; ++t) {
            const int idx = static_cast<int>(rng.uniform_int(validation.size()));
            const Vec x = validation.sample(idx);
            const Vec dir_s = unit_in_subspace(subspace, rng);
            if (net.predict(x + len * dir_s) != predicted[idx]) ++flips_s;
            if (!full_space) {
                const Vec dir_p = unit_in_complement(subspace, rng);
                if (net.predict(x + len * dir_p) != predicted[idx]) ++flips_perp;
            }
        }
        const double rate_s = static_cast<double>(flips_s) / trials;
        report.in_subspace.rate.push_back(rate_s);
        report.in_subspace.std_error.push_back(std::sqrt(rate_s * (1.0 - rate_s) / trials));
        if (!full_space) {
            const double rate_p = static_cast<double>(flips_perp) / trials;
            report.orthogonal.rate.push_back(rate_p);
            report.orthogonal.std_error.push_back(
                std::sqrt(rate_p * (1.0 - rate_p) / trials));
        }
    }
    return report;
}

namespace {

ProjectionNormRow summarize(const std::string& source, const std::vector<double>& values) {
    ProjectionNormRow row;
    row.source = source;
    row.count = static_cast<int>(values.size());
    if (values.empty()) {
        row.note = "no usable samples";
        return row;
    }
    row.present = true;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / row.count;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = row.count > 1 ? var / (row.count - 1) : 0.0;
    row.mean = mean;
    row.std_error = std::sqrt(var / row.count);
    return row;
}

// Central-difference spatial gradients of an image sample, replicate
// borders; both axes contribute one direction each.
std::vector<Vec> image_gradient_dirs(const Vec& x, int side) {
    auto at = [&](int r, int c) {
        r = std::clamp(r, 0, side - 1);
        c = std::clamp(c, 0, side - 1);
        return x[r * side + c];
    };
    Vec gx(x.size()), gy(x.size());
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            gx[r * side + c] = 0.5 * (at(r, c + 1) - at(r, c - 1));
            gy[r * side + c] = 0.5 * (at(r + 1, c) - at(r - 1, c));
        }
    }
    std::vector<Vec> dirs;
    if (gx.norm() > 1e-12) dirs.push_back(gx);
    if (gy.norm() > 1e-12) dirs.push_back(gy);
    return dirs;
}

}  // namespace

std::vector<ProjectionNormRow> projection_norm_table(const Classifier& net,
                                                     const Subspace& subspace,
                                                     const Dataset& validation,
                                                     const ProjectionTableOptions& opts,
                                                     std::uint64_t seed) {
    const int d = validation.d;
    const int n = validation.size();
    if (n == 0) throw InvalidInput("projection table needs a validation set");
    std::vector<ProjectionNormRow> table;

    {
        Rng rng = Rng::for_purpose(seed, "table-random");
        std::vector<double> vals;
        for (int s = 0; s < opts.random_draws; ++s)
            vals.push_back(projection_norm(subspace, rng.unit_vector(d)));
        table.push_back(summarize("random", vals));
    }
    {
        Rng rng = Rng::for_purpose(seed, "table-pairs");
        std::vector<int> predicted(n);
        for (int r = 0; r < n; ++r) predicted[r] = net.predict(validation.sample(r));
        std::vector<double> vals;
        int attempts = 0;
        while (static_cast<int>(vals.size()) < opts.pair_count && attempts < 50 * opts.pair_count) {
            ++attempts;
            const int a = static_cast<int>(rng.uniform_int(n));
            const int b = static_cast<int>(rng.uniform_int(n));
            if (a == b || predicted[a] != predicted[b]) continue;
            const Vec diff = validation.sample(b) - validation.sample(a);
            if (diff.norm() == 0.0) continue;
            vals.push_back(projection_norm(subspace, diff));
        }
        table.push_back(summarize("sample_difference", vals));
    }
    {
        ProjectionNormRow row;
        if (opts.image_side && *opts.image_side * *opts.image_side == d) {
            Rng rng = Rng::for_purpose(seed, "table-gradient");
            std::vector<double> vals;
            const int want = std::min(n, opts.pair_count);
            for (int s = 0; s < want; ++s) {
                const int idx = static_cast<int>(rng.uniform_int(n));
                for (const Vec& g : image_gradient_dirs(validation.sample(idx), *opts.image_side))
                    vals.push_back(projection_norm(subspace, g));
            }
            row = summarize("image_gradient", vals);
        } else {
            row.source = "image_gradient";
            row.note = "dataset is not image-shaped";
        }
        table.push_back(row);
    }
    {
        Rng rng = Rng::for_purpose(seed, "table-adversarial");
        std::vector<double> vals;
        int attempts = 0;
        while (static_cast<int>(vals.size()) < opts.adversarial_count &&
               attempts < 10 * opts.adversarial_count) {
            ++attempts;
            const int idx = static_cast<int>(rng.uniform_int(n));
            const PerturbationResult res =
                minimal_perturbation(net, validation.sample(idx), opts.perturbation);
            if (res.succeeded && res.norm() > 0.0)
                vals.push_back(projection_norm(subspace, res.r));
        }
        table.push_back(summarize("adversarial", vals));
    }
    return table;
}

}  // namespace curvlab
