#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace curvlab {

// Seeded random source with explicit bit-to-double mappings so that streams
// are reproducible independently of the standard library's distribution
// implementations. All experiment randomness is derived from a single root
// seed via derive(root, purpose, counter).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Child seed for a named purpose. Documented scheme:
    //   child = splitmix64(splitmix64(root ^ fnv1a64(purpose)) + counter)
    static std::uint64_t derive(std::uint64_t root, std::string_view purpose,
                                std::uint64_t counter = 0);

    static Rng for_purpose(std::uint64_t root, std::string_view purpose,
                           std::uint64_t counter = 0) {
        return Rng(derive(root, purpose, counter));
    }

    // Uniform in [0, 1), 53 mantissa bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n);

    // Standard normal via Box-Muller on the explicit uniform stream.
    double normal();

    Eigen::VectorXd gaussian_vector(int dim);

    // Uniform on the unit sphere S^{dim-1}.
    Eigen::VectorXd unit_vector(int dim);

    // Dirichlet(1,...,1): uniform weights on the simplex.
    std::vector<double> simplex_weights(int k);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace curvlab
