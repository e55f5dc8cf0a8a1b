#pragma once

#include <Eigen/Dense>

namespace magflow {

inline constexpr int kMaxAmbientDim = 4;

/// Ambient vector in R^q, q <= 4. Fixed capacity keeps the hot loops free of
/// heap traffic.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAmbientDim, 1>;

/// Small dense matrix with the same capacity bound (tangent frames, projectors).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxAmbientDim,
                          kMaxAmbientDim>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace magflow
