#include "curvlab/classifier.hpp"

#include <cmath>

#include "curvlab/errors.hpp"

namespace curvlab {

double Classifier::margin(const Vec& x, int i, int j) const {
    check_pair(i, j);
    const Vec logits = forward(x);
    return logits[i] - logits[j];
}

int Classifier::predict(const Vec& x) const {
    const Vec logits = forward(x);
    int best = 0;
    for (int k = 1; k < logits.size(); ++k) {
        if (logits[k] > logits[best]) best = k;
    }
    return best;
}

void Classifier::check_input(const Vec& x) const {
    if (x.size() != input_dim())
        throw DimensionMismatch("input has dimension " + std::to_string(x.size()) +
                                ", classifier expects " + std::to_string(input_dim()));
}

void Classifier::check_pair(int i, int j) const {
    const int L = num_classes();
    if (i < 0 || i >= L || j < 0 || j >= L)
        throw InvalidInput("class index out of range");
    if (i == j) throw InvalidInput("class pair must be distinct");
}

QuadraticClassifier::QuadraticClassifier(Mat A, Vec b, double c)
    : A_(0.5 * (A + A.transpose())), b_(std::move(b)), c_(c) {
    if (A_.rows() != A_.cols()) throw InvalidInput("quadratic term must be square");
    if (b_.size() != A_.rows()) throw DimensionMismatch("linear term dimension mismatch");
    if (!A_.allFinite() || !b_.allFinite() || !std::isfinite(c_))
        throw InvalidInput("quadratic classifier has non-finite coefficients");
}

QuadraticClassifier QuadraticClassifier::sphere(int dim, double radius) {
    return QuadraticClassifier(Mat::Identity(dim, dim), Vec::Zero(dim), -radius * radius);
}

double QuadraticClassifier::score(const Vec& x) const {
    check_input(x);
    return x.dot(A_ * x) + b_.dot(x) + c_;
}

Vec QuadraticClassifier::forward(const Vec& x) const {
    Vec logits(2);
    logits << score(x), 0.0;
    return logits;
}

double QuadraticClassifier::pair_sign(int i, int j) const {
    check_pair(i, j);
    return i == 0 ? 1.0 : -1.0;
}

Vec QuadraticClassifier::grad_margin(const Vec& x, int i, int j) const {
    check_input(x);
    return pair_sign(i, j) * (2.0 * (A_ * x) + b_);
}

Vec QuadraticClassifier::hvp_margin(const Vec& x, int i, int j, const Vec& v) const {
    check_input(x);
    if (v.size() != input_dim()) throw DimensionMismatch("direction dimension mismatch");
    return pair_sign(i, j) * (2.0 * (A_ * v));
}

}  // namespace curvlab
