#include "curvlab/rng.hpp"

#include <cmath>

#include "curvlab/errors.hpp"

namespace curvlab {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t Rng::derive(std::uint64_t root, std::string_view purpose,
                          std::uint64_t counter) {
    return splitmix64(splitmix64(root ^ fnv1a64(purpose)) + counter);
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw InvalidInput("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
}

Eigen::VectorXd Rng::gaussian_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
}

Eigen::VectorXd Rng::unit_vector(int dim) {
    while (true) {
        Eigen::VectorXd v = gaussian_vector(dim);
        const double n = v.norm();
        if (n > 1e-30) return v / n;
    }
}

std::vector<double> Rng::simplex_weights(int k) {
    if (k <= 0) throw InvalidInput("simplex_weights: k must be positive");
    std::vector<double> w(static_cast<std::size_t>(k));
    double total = 0.0;
    for (auto& wi : w) {
        wi = -std::log(1.0 - uniform());
        total += wi;
    }
    for (auto& wi : w) wi /= total;
    return w;
}

}  // namespace curvlab
