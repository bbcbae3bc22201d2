#pragma once

// Test-only oracles, independent of the library's analytic derivative and
// eigensolver paths.

#include <cmath>
#include <vector>

#include "curvlab/boundary.hpp"
#include "curvlab/network.hpp"
#include "curvlab/rng.hpp"

namespace testutil {

using curvlab::Mat;
using curvlab::Vec;

// Plain-loop forward pass, no Eigen products: the reference arithmetic for
// the network forward oracle.
inline Vec naive_forward(const curvlab::Network& net, const Vec& x) {
    std::vector<double> a(x.data(), x.data() + x.size());
    for (const auto& layer : net.layers()) {
        std::vector<double> z(layer.weight.rows(), 0.0);
        for (int r = 0; r < layer.weight.rows(); ++r) {
            double sum = layer.bias[r];
            for (int c = 0; c < layer.weight.cols(); ++c) sum += layer.weight(r, c) * a[c];
            z[r] = curvlab::act_value(layer.activation, sum);
        }
        a = std::move(z);
    }
    Vec out(static_cast<int>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) out[static_cast<int>(i)] = a[i];
    return out;
}

// Central finite difference of the pairwise margin.
inline Vec fd_grad_margin(const curvlab::Classifier& net, const Vec& x, int i, int j,
                          double h = 1e-5) {
    Vec g(x.size());
    for (int c = 0; c < x.size(); ++c) {
        Vec xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        g[c] = (net.margin(xp, i, j) - net.margin(xm, i, j)) / (2.0 * h);
    }
    return g;
}

// Finite difference of gradients: (grad(x+hv) - grad(x-hv)) / 2h.
inline Vec fd_hvp_margin(const curvlab::Classifier& net, const Vec& x, int i, int j,
                         const Vec& v, double h_scale = 1e-4) {
    const double h = h_scale * (1.0 + x.norm());
    return (net.grad_margin(x + h * v, i, j) - net.grad_margin(x - h * v, i, j)) / (2.0 * h);
}

// Random softplus/tanh network with chained layer dimensions.
inline curvlab::Network random_smooth_network(int input_dim, int num_classes,
                                              const std::vector<int>& hidden,
                                              std::uint64_t seed,
                                              double weight_scale = 1.0) {
    curvlab::Rng rng(seed);
    std::vector<int> widths{input_dim};
    for (int h : hidden) widths.push_back(h);
    widths.push_back(num_classes);
    std::vector<curvlab::Layer> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        curvlab::Layer l;
        l.weight.resize(widths[k + 1], widths[k]);
        for (int r = 0; r < l.weight.rows(); ++r)
            for (int c = 0; c < l.weight.cols(); ++c)
                l.weight(r, c) = weight_scale * rng.normal() / std::sqrt(double(widths[k]));
        l.bias.resize(widths[k + 1]);
        for (int r = 0; r < l.bias.size(); ++r) l.bias[r] = 0.1 * rng.normal();
        const bool last = (k + 2 == widths.size());
        l.activation = last ? curvlab::Activation::Identity
                            : (rng.uniform() < 0.5 ? curvlab::Activation::Softplus
                                                   : curvlab::Activation::Tanh);
        layers.push_back(std::move(l));
    }
    return curvlab::Network(std::move(layers));
}

// Linear multiclass network f(x) = Wx + b.
inline curvlab::Network linear_network(const Mat& W, const Vec& b) {
    curvlab::Layer l;
    l.weight = W;
    l.bias = b;
    l.activation = curvlab::Activation::Identity;
    return curvlab::Network({l});
}

// Dense projected, gradient-normalized Hessian P H P / ||g|| for any
// classifier, built from explicit products: the eigen-oracle matrix.
inline Mat dense_projected_hessian(const curvlab::Classifier& net, const Vec& z, int i, int j) {
    const int d = static_cast<int>(z.size());
    const Vec g = net.grad_margin(z, i, j);
    const Vec n = g / g.norm();
    Mat H(d, d);
    for (int c = 0; c < d; ++c) {
        Vec e = Vec::Zero(d);
        e[c] = 1.0;
        H.col(c) = net.hvp_margin(z, i, j, e);
    }
    const Mat P = Mat::Identity(d, d) - n * n.transpose();
    Mat G = P * H * P / g.norm();
    return 0.5 * (G + G.transpose());
}

// Curvature of the planar cross-section of the boundary along span(n, v):
// solve the section curve beta(alpha) with 1-d Newton on the margin, then
// second-difference it. Sign convention matches kappa = -beta''(0).
inline double traced_section_curvature(const curvlab::Classifier& net,
                                       const curvlab::BoundaryPoint& bp, const Vec& v_unit,
                                       double h = 1e-3) {
    auto solve_beta = [&](double alpha) {
        double beta = 0.0;
        for (int it = 0; it < 100; ++it) {
            const Vec p = bp.z + alpha * v_unit + beta * bp.unit_normal;
            const double f = net.margin(p, bp.class_i, bp.class_j);
            const double df = net.grad_margin(p, bp.class_i, bp.class_j).dot(bp.unit_normal);
            const double step = f / df;
            beta -= step;
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(beta))) break;
        }
        return beta;
    };
    const double beta_plus = solve_beta(h);
    const double beta_zero = solve_beta(0.0);
    const double beta_minus = solve_beta(-h);
    return -(beta_plus - 2.0 * beta_zero + beta_minus) / (h * h);
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-12, std::abs(want));
}

inline double rel_err(const Vec& got, const Vec& want) {
    return (got - want).norm() / std::max(1e-12, want.norm());
}

}  // namespace testutil
