#pragma once

#include "reproj/types.hpp"

#include <Eigen/Geometry>

#include <random>

namespace reproj::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(0xABCDEF12345ull);
  return engine;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Mat3 random_rotation() {
  const Vec3 axis =
      Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)).normalized();
  return Eigen::AngleAxisd(uniform(-3.0, 3.0), axis).toRotationMatrix();
}

inline RigidTransform random_pose() {
  return RigidTransform(random_rotation(),
                        Vec3(uniform(-2, 2), uniform(-2, 2), uniform(-2, 2)));
}

}  // namespace reproj::testing
