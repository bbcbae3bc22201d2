#include "curvlab/boundary.hpp"

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace {

constexpr double kDegenerateGradNorm = 1e-12;

BoundaryPoint assemble(const Classifier& net, const Vec& z, int i, int j) {
    BoundaryPoint bp;
    bp.z = z;
    bp.class_i = i;
    bp.class_j = j;
    bp.f_value = net.margin(z, i, j);
    bp.gradient = net.grad_margin(z, i, j);
    bp.grad_norm = bp.gradient.norm();
    if (bp.grad_norm < kDegenerateGradNorm)
        throw DegenerateNormal("gradient vanishes at the candidate boundary point");
    bp.unit_normal = bp.gradient / bp.grad_norm;
    return bp;
}

}  // namespace

double boundary_tolerance(const Vec& z, double grad_norm) {
    return 1e-6 * std::max(1.0, grad_norm * z.norm());
}

BoundaryPoint make_boundary_point(const Classifier& net, const Vec& z, int i, int j) {
    BoundaryPoint bp = assemble(net, z, i, j);
    if (std::abs(bp.f_value) > boundary_tolerance(bp.z, bp.grad_norm))
        throw InvalidInput("point is not on the decision boundary: |F| = " +
                           std::to_string(std::abs(bp.f_value)));
    return bp;
}

BoundaryPoint refine_to_boundary(const Classifier& net, const Vec& x_start, int i, int j,
                                 const RefineOptions& opts) {
    const double f0 = net.margin(x_start, i, j);
    const Vec g0 = net.grad_margin(x_start, i, j);
    const double g0n = g0.norm();
    if (g0n < kDegenerateGradNorm)
        throw DegenerateNormal("gradient vanishes at the start point");
    if (std::abs(f0) <= boundary_tolerance(x_start, g0n)) return assemble(net, x_start, i, j);

    // March down |F| along the gradient line from x_start.
    const Vec dir = (f0 > 0 ? -1.0 : 1.0) * (g0 / g0n);
    auto phi = [&](double t) { return net.margin(x_start + t * dir, i, j); };
    // The tolerance check inside the search uses the start gradient as a
    // proxy; acceptance re-verifies with the local gradient.
    auto try_accept = [&](double t, double f_t) -> std::optional<BoundaryPoint> {
        const Vec z = x_start + t * dir;
        if (std::abs(f_t) > boundary_tolerance(z, g0n)) return std::nullopt;
        BoundaryPoint bp = assemble(net, z, i, j);
        if (std::abs(bp.f_value) <= boundary_tolerance(bp.z, bp.grad_norm)) return bp;
        return std::nullopt;
    };

    double t_lo = 0.0, f_lo = f0;
    double t_hi = std::abs(f0) / g0n;  // Newton scale of the first probe
    bool bracketed = false;
    for (int step = 0; step < opts.max_bracket_steps; ++step) {
        const double f_hi = phi(t_hi);
        if (auto bp = try_accept(t_hi, f_hi)) return *bp;
        if ((f_hi > 0) != (f_lo > 0)) {
            bracketed = true;
            break;
        }
        t_lo = t_hi;
        f_lo = f_hi;
        t_hi *= 2.0;
    }
    if (!bracketed)
        throw NoBoundaryFound("no sign change of the margin within " +
                              std::to_string(opts.max_bracket_steps) +
                              " bracketing steps from the start point");

    for (int step = 0; step < opts.max_bisect_steps; ++step) {
        const double t_mid = 0.5 * (t_lo + t_hi);
        const double f_mid = phi(t_mid);
        if (auto bp = try_accept(t_mid, f_mid)) return *bp;
        if ((f_mid > 0) == (f_lo > 0)) {
            t_lo = t_mid;
            f_lo = f_mid;
        } else {
            t_hi = t_mid;
        }
    }
    // Interval collapsed to rounding; accept the midpoint if it meets the
    // tolerance measured with its own gradient.
    BoundaryPoint bp = assemble(net, x_start + 0.5 * (t_lo + t_hi) * dir, i, j);
    if (std::abs(bp.f_value) <= boundary_tolerance(bp.z, bp.grad_norm)) return bp;
    throw NoBoundaryFound("bisection exhausted without reaching the boundary tolerance");
}

Vec tangent_project(const BoundaryPoint& bp, const Vec& v) {
    if (bp.grad_norm < kDegenerateGradNorm)
        throw DegenerateNormal("boundary point has a degenerate normal");
    return v - bp.unit_normal.dot(v) * bp.unit_normal;
}

double normal_curvature(const Classifier& net, const BoundaryPoint& bp, const Vec& v) {
    if (v.norm() == 0.0) throw InvalidInput("curvature direction must be nonzero");
    const Vec vt = tangent_project(bp, v);
    const double nt = vt.norm();
    if (nt <= 1e-12 * v.norm())
        throw InvalidInput("curvature direction is parallel to the normal");
    const Vec hv = net.hvp_margin(bp.z, bp.class_i, bp.class_j, vt);
    return vt.dot(hv) / (nt * nt * bp.grad_norm);
}

Mat tangent_basis(const Vec& unit_normal) {
    const int d = static_cast<int>(unit_normal.size());
    Mat col(d, 1);
    col.col(0) = unit_normal;
    Eigen::HouseholderQR<Mat> qr(col);
    Mat q = qr.householderQ();
    return q.rightCols(d - 1);
}

namespace {

CurvatureProfile dense_profile(const Classifier& net, const BoundaryPoint& bp, int k) {
    const int d = static_cast<int>(bp.z.size());
    const Mat B = tangent_basis(bp.unit_normal);
    Mat T(d - 1, d - 1);
    for (int c = 0; c < d - 1; ++c) {
        const Vec hv = net.hvp_margin(bp.z, bp.class_i, bp.class_j, B.col(c));
        T.col(c) = B.transpose() * hv / bp.grad_norm;
    }
    const Mat sym = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);

    CurvatureProfile profile;
    const int total = d - 1;
    std::vector<int> keep;
    if (k < 0 || 2 * k >= total) {
        for (int c = total - 1; c >= 0; --c) keep.push_back(c);
    } else {
        for (int t = 0; t < k; ++t) keep.push_back(total - 1 - t);
        for (int b = k - 1; b >= 0; --b) keep.push_back(b);
    }
    profile.complete = static_cast<int>(keep.size()) == total;
    profile.directions.resize(d, static_cast<int>(keep.size()));
    double sum_all = es.eigenvalues().sum();
    for (std::size_t c = 0; c < keep.size(); ++c) {
        profile.curvatures.push_back(es.eigenvalues()[keep[c]]);
        profile.directions.col(static_cast<int>(c)) = B * es.eigenvectors().col(keep[c]);
    }
    profile.mean_curvature = sum_all / total;
    return profile;
}

CurvatureProfile lanczos_profile(const Classifier& net, const BoundaryPoint& bp, int k,
                                 std::uint64_t seed) {
    const int d = static_cast<int>(bp.z.size());
    const int total = d - 1;
    const int want = (k < 0 || 2 * k >= total) ? total : k;

    auto apply = [&](const Vec& v) {
        const Vec pv = v - bp.unit_normal.dot(v) * bp.unit_normal;
        Vec hv = net.hvp_margin(bp.z, bp.class_i, bp.class_j, pv);
        hv -= bp.unit_normal.dot(hv) * bp.unit_normal;
        return Vec(hv / bp.grad_norm);
    };

    LanczosOptions opts;
    opts.seed = seed;
    opts.check_interval = 5;
    LanczosResult res = (want == total)
        ? lanczos_extreme_eigenpairs(apply, d, total, 0, {bp.unit_normal}, opts)
        : lanczos_extreme_eigenpairs(apply, d, want, want, {bp.unit_normal}, opts);

    CurvatureProfile profile;
    profile.curvatures = res.eigenvalues;
    profile.directions = res.eigenvectors;
    profile.complete = static_cast<int>(res.eigenvalues.size()) == total;
    if (profile.complete) {
        double sum = 0.0;
        for (double v : res.eigenvalues) sum += v;
        profile.mean_curvature = sum / total;
    } else {
        profile.mean_curvature = projected_hessian_trace(net, bp) / total;
    }
    return profile;
}

}  // namespace

CurvatureProfile principal_curvatures(const Classifier& net, const BoundaryPoint& bp, int k,
                                      EigenPath path, std::uint64_t seed) {
    if (!net.smooth())
        throw NonSmoothActivation("principal curvatures require smooth activations");
    const int d = static_cast<int>(bp.z.size());
    if (d < 2) throw InvalidInput("curvature needs input dimension >= 2");
    if (k == 0 || k > d - 1) throw InvalidInput("requested curvature count out of range");
    if (path == EigenPath::Auto) path = d <= kDenseEigenLimit ? EigenPath::Dense : EigenPath::Lanczos;
    return path == EigenPath::Dense ? dense_profile(net, bp, k)
                                    : lanczos_profile(net, bp, k, seed);
}

double projected_hessian_trace(const Classifier& net, const BoundaryPoint& bp) {
    const int d = static_cast<int>(bp.z.size());
    double trace_h = 0.0;
    for (int c = 0; c < d; ++c) {
        Vec e = Vec::Zero(d);
        e[c] = 1.0;
        trace_h += net.hvp_margin(bp.z, bp.class_i, bp.class_j, e)[c];
    }
    const Vec hn = net.hvp_margin(bp.z, bp.class_i, bp.class_j, bp.unit_normal);
    return (trace_h - bp.unit_normal.dot(hn)) / bp.grad_norm;
}

double mean_curvature_exact(const Classifier& net, const BoundaryPoint& bp, EigenPath path) {
    const int d = static_cast<int>(bp.z.size());
    if (path == EigenPath::Auto) path = d <= kDenseEigenLimit ? EigenPath::Dense : EigenPath::Lanczos;
    if (path == EigenPath::Dense) return principal_curvatures(net, bp).mean_curvature;
    return projected_hessian_trace(net, bp) / (d - 1);
}

}  // namespace curvlab
