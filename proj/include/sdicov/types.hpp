#pragma once

#include <Eigen/Dense>

#include "sdicov/error.hpp"

namespace sdicov {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void require_same_size(Eigen::Index expected, Eigen::Index actual, const char* where) {
  if (expected != actual) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(where) + ": expected length " + std::to_string(expected) +
                    ", got " + std::to_string(actual));
  }
}

/// ||a - b|| / max(||b||, floor); floor keeps zero references finite.
inline double relative_error(const Vector& a, const Vector& b, double floor = 1e-300) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

inline double relative_error(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

}  // namespace sdicov
