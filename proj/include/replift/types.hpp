#pragma once

#include <Eigen/Dense>

namespace replift {

template <typename Scalar>
using Matrix2X = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;
template <typename Scalar>
using Matrix3X = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
template <typename Scalar>
using Camera = Eigen::Matrix<Scalar, 2, 3>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// 3 x n joint coordinates, one joint per column, root-centered (mm).
using Pose3D = Eigen::Matrix3Xd;
/// 2 x 3 weak-perspective projection.
using CameraMatrix = Camera<double>;
/// n x b incidence matrix, +1 at the bone's first joint, -1 at its second.
using BoneMap = Eigen::MatrixXd;
/// b x b Gram matrix of bone vectors.
using KcsMatrix = Eigen::MatrixXd;

using VisibilityMask = Eigen::Array<bool, 1, Eigen::Dynamic>;

/// Image-plane joints with a per-joint visibility flag.
struct Pose2D {
  Eigen::Matrix2Xd coords;
  VisibilityMask visible;

  Pose2D() = default;
  explicit Pose2D(Eigen::Matrix2Xd c)
      : coords(std::move(c)), visible(VisibilityMask::Constant(coords.cols(), true)) {}
  Pose2D(Eigen::Matrix2Xd c, VisibilityMask v) : coords(std::move(c)), visible(std::move(v)) {}

  [[nodiscard]] Eigen::Index joints() const { return coords.cols(); }
  [[nodiscard]] Eigen::Index visible_count() const { return visible.count(); }

  bool operator==(const Pose2D& o) const {
    return coords.cols() == o.coords.cols() && coords == o.coords && (visible == o.visible).all();
  }
};

}  // namespace replift
