#include "curvlab/activation.hpp"

namespace curvlab {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Softplus: return "softplus";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
    }
    throw InvalidInput("unknown activation");
}

Activation activation_from_name(const std::string& name) {
    if (name == "softplus") return Activation::Softplus;
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    throw InvalidInput("unknown activation name: " + name);
}

}  // namespace curvlab
