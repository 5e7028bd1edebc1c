#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace sqm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using SparseMat = Eigen::SparseMatrix<double>;

/// Error thrown on invalid input geometry, topology, or failed solves.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sqm
