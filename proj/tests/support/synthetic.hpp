#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "fiberatlas/cloud.hpp"

namespace fiberatlas::synthetic {

// Eight-fold oversampling thinned by farthest-point sampling, which gives the
// evenly spread clouds the fiber sampler produces.
template <class Draw>
PointCloud spread(std::size_t n, Draw&& draw) {
  PointCloud dense;
  for (std::size_t i = 0; i < 8 * n; ++i) dense.push_back(draw());
  return select(dense, farthest_point_indices(dense, n));
}

inline PointCloud circle_cloud(std::size_t n, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
  return spread(n, [&]() -> Point {
    double a = U(rng);
    return {radius * std::cos(a), radius * std::sin(a)};
  });
}

// Uniform by area on r in [r0, r1].
inline PointCloud annulus_cloud(std::size_t n, double r0, double r1, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  return spread(n, [&]() -> Point {
    double a = 2.0 * std::numbers::pi * U(rng);
    double r = std::sqrt(r0 * r0 + (r1 * r1 - r0 * r0) * U(rng));
    return {r * std::cos(a), r * std::sin(a)};
  });
}

inline PointCloud sphere_cloud(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  return spread(n, [&]() -> Point {
    double x = N(rng), y = N(rng), z = N(rng);
    double r = std::sqrt(x * x + y * y + z * z);
    return {x / r, y / r, z / r};
  });
}

inline PointCloud disk_cloud(std::size_t n, std::mt19937_64& rng) { return annulus_cloud(n, 0.0, 1.0, rng); }

}  // namespace fiberatlas::synthetic
