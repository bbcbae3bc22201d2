#pragma once

#include <cmath>
#include <string>

#include "curvlab/errors.hpp"

namespace curvlab {

enum class Activation { Softplus, Tanh, Identity, Relu };

inline bool is_smooth(Activation a) { return a != Activation::Relu; }

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Value, first and second derivative of the scalar activation.
// Relu uses the convention relu'(0) = 0; its second derivative is 0
// everywhere it exists, and relu nets are rejected by curvature paths
// before this matters.
inline double act_value(Activation a, double t) {
    switch (a) {
        case Activation::Softplus:
            return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
        case Activation::Tanh:
            return std::tanh(t);
        case Activation::Identity:
            return t;
        case Activation::Relu:
            return t > 0.0 ? t : 0.0;
    }
    throw InvalidInput("unknown activation");
}

inline double act_deriv(Activation a, double t) {
    switch (a) {
        case Activation::Softplus: {
            // logistic sigmoid, stable on both tails
            if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
            const double e = std::exp(t);
            return e / (1.0 + e);
        }
        case Activation::Tanh: {
            const double y = std::tanh(t);
            return 1.0 - y * y;
        }
        case Activation::Identity:
            return 1.0;
        case Activation::Relu:
            return t > 0.0 ? 1.0 : 0.0;
    }
    throw InvalidInput("unknown activation");
}

inline double act_second_deriv(Activation a, double t) {
    switch (a) {
        case Activation::Softplus: {
            const double s = act_deriv(Activation::Softplus, t);
            return s * (1.0 - s);
        }
        case Activation::Tanh: {
            const double y = std::tanh(t);
            return -2.0 * y * (1.0 - y * y);
        }
        case Activation::Identity:
            return 0.0;
        case Activation::Relu:
            return 0.0;
    }
    throw InvalidInput("unknown activation");
}

}  // namespace curvlab
