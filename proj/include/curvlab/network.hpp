#pragma once

#include <vector>

#include "curvlab/activation.hpp"
#include "curvlab/classifier.hpp"

namespace curvlab {

struct Layer {
    Mat weight;  // out x in, row-major semantics when serialized
    Vec bias;
    Activation activation = Activation::Softplus;
};

// Feedforward network a_k = act(W_k a_{k-1} + b_k). The gradient of the
// pairwise margin is reverse-mode exact, and the Hessian-vector product is
// computed analytically with the forward-over-reverse construction (a
// tangent pass through the forward recurrence followed by a differentiated
// backward pass), not by finite differences.
class Network final : public Classifier {
public:
    explicit Network(std::vector<Layer> layers);

    int input_dim() const override { return input_dim_; }
    int num_classes() const override { return num_classes_; }
    bool smooth() const override;

    Vec forward(const Vec& x) const override;
    Vec grad_margin(const Vec& x, int i, int j) const override;
    Vec hvp_margin(const Vec& x, int i, int j, const Vec& v) const override;

    const std::vector<Layer>& layers() const { return layers_; }

    // Forward pass retaining pre- and post-activation values; the training
    // loop and the margin derivatives share it.
    struct Trace {
        std::vector<Vec> pre;   // z_k
        std::vector<Vec> post;  // a_k, post[0] unused (input kept separately)
    };
    Trace trace(const Vec& x) const;

private:
    std::vector<Layer> layers_;
    int input_dim_ = 0;
    int num_classes_ = 0;
};

}  // namespace curvlab
