#pragma once

#include "finitopo/immersion.hpp"
#include "finitopo/surfaces.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace testing_support {

using finitopo::Vec;

inline constexpr double pi = std::numbers::pi;

/// Uniform point in the box [lo, hi] of the first two chart coordinates.
inline Vec random_point(std::mt19937_64& rng, double lo0, double hi0, double lo1, double hi1) {
    std::uniform_real_distribution<double> a(lo0, hi0), b(lo1, hi1);
    Vec u(2);
    u << a(rng), b(rng);
    return u;
}

/// Random g-unit chart vector.
inline Vec random_unit(std::mt19937_64& rng, const finitopo::MetricTensor& g) {
    std::normal_distribution<double> n;
    Vec v(g.g.rows());
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = n(rng);
    return v / g.norm(v);
}

inline Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

inline Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

}  // namespace testing_support
