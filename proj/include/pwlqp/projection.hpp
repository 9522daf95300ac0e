#pragma once

#include <algorithm>

#include "pwlqp/linalg.hpp"

namespace pwlqp {

/// Componentwise clamp onto [lower, upper]; infinite bounds are exact.
template <typename Derived>
Vector project_box(const Eigen::MatrixBase<Derived>& v, const Vector& lower,
                   const Vector& upper) {
  require_dims(v.size() == lower.size() && v.size() == upper.size(),
               "project_box: length mismatch");
  return v.cwiseMax(lower).cwiseMin(upper);
}

/// Clamp onto [0, 1]^l.
template <typename Derived>
Vector project_unit_box(const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseMax(0.0).cwiseMin(1.0);
}

inline double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace pwlqp
