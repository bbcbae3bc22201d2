#include "curvlab/network.hpp"

#include <string>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace {

Vec apply_act(Activation a, const Vec& z) {
    Vec out(z.size());
    for (int i = 0; i < z.size(); ++i) out[i] = act_value(a, z[i]);
    return out;
}

Vec apply_deriv(Activation a, const Vec& z) {
    Vec out(z.size());
    for (int i = 0; i < z.size(); ++i) out[i] = act_deriv(a, z[i]);
    return out;
}

Vec apply_second_deriv(Activation a, const Vec& z) {
    Vec out(z.size());
    for (int i = 0; i < z.size(); ++i) out[i] = act_second_deriv(a, z[i]);
    return out;
}

}  // namespace

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw InvalidInput("network needs at least one layer");
    input_dim_ = static_cast<int>(layers_.front().weight.cols());
    num_classes_ = static_cast<int>(layers_.back().weight.rows());
    Eigen::Index expected_in = layers_.front().weight.cols();
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const Layer& l = layers_[k];
        if (l.weight.cols() != expected_in)
            throw DimensionMismatch("layer " + std::to_string(k) + " expects input " +
                                    std::to_string(expected_in) + ", has " +
                                    std::to_string(l.weight.cols()) + " columns");
        if (l.bias.size() != l.weight.rows())
            throw DimensionMismatch("layer " + std::to_string(k) + " bias size mismatch");
        if (!l.weight.allFinite() || !l.bias.allFinite())
            throw InvalidInput("layer " + std::to_string(k) + " has non-finite parameters");
        expected_in = l.weight.rows();
    }
    if (num_classes_ < 2) throw InvalidInput("network must output at least two classes");
}

bool Network::smooth() const {
    for (const auto& l : layers_)
        if (!is_smooth(l.activation)) return false;
    return true;
}

Network::Trace Network::trace(const Vec& x) const {
    check_input(x);
    Trace t;
    t.pre.reserve(layers_.size());
    t.post.reserve(layers_.size());
    const Vec* a = &x;
    for (const auto& l : layers_) {
        t.pre.push_back(l.weight * (*a) + l.bias);
        t.post.push_back(apply_act(l.activation, t.pre.back()));
        a = &t.post.back();
    }
    return t;
}

Vec Network::forward(const Vec& x) const {
    return trace(x).post.back();
}

Vec Network::grad_margin(const Vec& x, int i, int j) const {
    check_pair(i, j);
    const Trace t = trace(x);
    const int K = static_cast<int>(layers_.size());

    Vec delta = Vec::Zero(num_classes_);  // dF/da_K
    delta[i] = 1.0;
    delta[j] = -1.0;
    for (int k = K - 1; k >= 0; --k) {
        const Vec dz = apply_deriv(layers_[k].activation, t.pre[k]).cwiseProduct(delta);
        delta = layers_[k].weight.transpose() * dz;
    }
    return delta;
}

Vec Network::hvp_margin(const Vec& x, int i, int j, const Vec& v) const {
    check_pair(i, j);
    if (v.size() != input_dim_) throw DimensionMismatch("direction dimension mismatch");
    if (!smooth())
        throw NonSmoothActivation("Hessian-vector product requires smooth activations");

    const Trace t = trace(x);
    const int K = static_cast<int>(layers_.size());

    // Tangent sweep: directional derivative of every pre-activation along v.
    std::vector<Vec> rpre(K);
    Vec ra = v;
    for (int k = 0; k < K; ++k) {
        rpre[k] = layers_[k].weight * ra;
        ra = apply_deriv(layers_[k].activation, t.pre[k]).cwiseProduct(rpre[k]);
    }

    Vec delta = Vec::Zero(num_classes_);
    delta[i] = 1.0;
    delta[j] = -1.0;
    Vec rdelta = Vec::Zero(num_classes_);
    for (int k = K - 1; k >= 0; --k) {
        const Vec d1 = apply_deriv(layers_[k].activation, t.pre[k]);
        const Vec d2 = apply_second_deriv(layers_[k].activation, t.pre[k]);
        const Vec dz = d1.cwiseProduct(delta);
        const Vec rdz = d2.cwiseProduct(rpre[k]).cwiseProduct(delta) + d1.cwiseProduct(rdelta);
        delta = layers_[k].weight.transpose() * dz;
        rdelta = layers_[k].weight.transpose() * rdz;
    }
    return rdelta;
}

}  // namespace curvlab
