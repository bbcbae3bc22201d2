#include <doctest.h>

#include <cmath>

#include "curvlab/rng.hpp"

using curvlab::Rng;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("purpose derivation separates streams") {
    CHECK(Rng::derive(7, "alpha") != Rng::derive(7, "beta"));
    CHECK(Rng::derive(7, "alpha", 0) != Rng::derive(7, "alpha", 1));
    CHECK(Rng::derive(7, "alpha", 3) == Rng::derive(7, "alpha", 3));
}

TEST_CASE("unit vectors have unit norm") {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto v = rng.unit_vector(17);
        CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("simplex weights are convex") {
    Rng rng(9);
    for (int k : {1, 2, 7}) {
        const auto w = rng.simplex_weights(k);
        double sum = 0.0;
        for (double wi : w) {
            CHECK(wi >= 0.0);
            sum += wi;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    CHECK(rng.simplex_weights(1)[0] == 1.0);
}

TEST_CASE("normal moments are sane") {
    Rng rng(11);
    const int n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("uniform_int stays in range and shuffle is a permutation") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_int(7) < 7);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    rng.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 10; ++i) CHECK(sorted[i] == i);
}
