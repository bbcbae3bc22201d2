#pragma once

#include <Eigen/Core>

namespace curvlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Differentiable classifier f: R^d -> R^L. Evaluation is const and
// stateless, so instances may be shared across threads freely.
//
// The pairwise margin F(x) = f_i(x) - f_j(x) is the scalar whose zero level
// set is the decision boundary between classes i and j; grad_margin and
// hvp_margin expose its exact gradient and Hessian-vector product.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual int input_dim() const = 0;
    virtual int num_classes() const = 0;
    // True when every activation has continuous second derivatives;
    // required by all curvature operations.
    virtual bool smooth() const = 0;

    virtual Vec forward(const Vec& x) const = 0;
    virtual Vec grad_margin(const Vec& x, int i, int j) const = 0;
    virtual Vec hvp_margin(const Vec& x, int i, int j, const Vec& v) const = 0;

    double margin(const Vec& x, int i, int j) const;

    // argmax over logits; ties resolved to the lowest class index.
    int predict(const Vec& x) const;

protected:
    void check_input(const Vec& x) const;
    void check_pair(int i, int j) const;
};

// Two-class classifier built from a quadratic score
//   F(x) = x^T A x + b^T x + c,  f(x) = (F(x), 0),
// so the (0,1) pairwise margin is F itself with gradient 2Ax + b and
// constant Hessian 2A. Exists to give downstream modules closed-form
// curvature oracles; A is symmetrized on construction.
class QuadraticClassifier final : public Classifier {
public:
    QuadraticClassifier(Mat A, Vec b, double c);

    // F(x) = ||x||^2 - radius^2: the boundary is the sphere of the given
    // radius, every principal curvature of the (0,1) margin is 1/radius.
    static QuadraticClassifier sphere(int dim, double radius);

    int input_dim() const override { return static_cast<int>(A_.rows()); }
    int num_classes() const override { return 2; }
    bool smooth() const override { return true; }

    Vec forward(const Vec& x) const override;
    Vec grad_margin(const Vec& x, int i, int j) const override;
    Vec hvp_margin(const Vec& x, int i, int j, const Vec& v) const override;

    double score(const Vec& x) const;
    const Mat& quadratic_term() const { return A_; }
    const Vec& linear_term() const { return b_; }
    double constant_term() const { return c_; }

private:
    double pair_sign(int i, int j) const;

    Mat A_;
    Vec b_;
    double c_;
};

}  // namespace curvlab
