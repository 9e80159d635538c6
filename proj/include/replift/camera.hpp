#pragma once

#include <cmath>
#include <span>
#include <string>

#include "replift/errors.hpp"
#include "replift/types.hpp"

// Weak-perspective camera algebra. Both losses use the plain (unsquared)
// Frobenius norm; their gradient at a zero residual is taken to be zero.

namespace replift {

/// Lower bound on trace(K K^T) inside camera_loss.
inline constexpr double kCameraTraceFloor = 1e-8;

/// W' = K X.
template <typename PoseDerived, typename CamDerived>
Matrix2X<typename PoseDerived::Scalar> reproject(const Eigen::MatrixBase<PoseDerived>& pose,
                                                 const Eigen::MatrixBase<CamDerived>& cam) {
  if (pose.rows() != 3) throw InputError("reproject: pose must have 3 rows");
  return cam * pose;
}

template <typename Scalar>
struct ReprojectionGrad {
  Scalar value = Scalar(0);
  Camera<Scalar> d_camera = Camera<Scalar>::Zero();
  Matrix3X<Scalar> d_pose;
};

/// || M (W - K X) ||_F where M zeroes the columns of hidden joints.
template <typename ObsDerived, typename PoseDerived, typename CamDerived>
typename PoseDerived::Scalar reprojection_loss(const Eigen::MatrixBase<ObsDerived>& observed,
                                               const VisibilityMask& visible,
                                               const Eigen::MatrixBase<PoseDerived>& pose,
                                               const Eigen::MatrixBase<CamDerived>& cam) {
  if (observed.cols() != pose.cols() || visible.size() != pose.cols())
    throw InputError("reprojection_loss: joint counts differ");
  using Scalar = typename PoseDerived::Scalar;
  Scalar sum(0);
  for (Eigen::Index j = 0; j < pose.cols(); ++j) {
    if (!visible(j)) continue;
    sum += (observed.col(j) - cam * pose.col(j)).squaredNorm();
  }
  return std::sqrt(sum);
}

inline double reprojection_loss(const Pose2D& observed, const Pose3D& pose, const CameraMatrix& cam) {
  return reprojection_loss(observed.coords, observed.visible, pose, cam);
}

/// Loss value plus d/dK and d/dX.
template <typename ObsDerived, typename PoseDerived, typename CamDerived>
ReprojectionGrad<typename PoseDerived::Scalar> reprojection_loss_grad(
    const Eigen::MatrixBase<ObsDerived>& observed, const VisibilityMask& visible,
    const Eigen::MatrixBase<PoseDerived>& pose, const Eigen::MatrixBase<CamDerived>& cam) {
  using Scalar = typename PoseDerived::Scalar;
  if (observed.cols() != pose.cols() || visible.size() != pose.cols())
    throw InputError("reprojection_loss: joint counts differ");
  Matrix2X<Scalar> residual = cam * pose - observed;
  for (Eigen::Index j = 0; j < pose.cols(); ++j)
    if (!visible(j)) residual.col(j).setZero();

  ReprojectionGrad<Scalar> out;
  out.value = residual.norm();
  if (out.value > Scalar(0)) {
    residual /= out.value;
    out.d_camera = residual * pose.transpose();
    out.d_pose = cam.transpose() * residual;
  } else {
    out.d_pose = Matrix3X<Scalar>::Zero(3, pose.cols());
  }
  return out;
}

/// sqrt(trace(K K^T) / 2).
template <typename CamDerived>
typename CamDerived::Scalar camera_scale(const Eigen::MatrixBase<CamDerived>& cam) {
  return std::sqrt(cam.squaredNorm() / typename CamDerived::Scalar(2));
}

template <typename Scalar>
struct CameraLossGrad {
  Scalar value = Scalar(0);
  Camera<Scalar> d_camera = Camera<Scalar>::Zero();
};

/// || 2 K K^T / trace(K K^T) - I ||_F with a floored trace.
template <typename CamDerived>
CameraLossGrad<typename CamDerived::Scalar> camera_loss_grad(const Eigen::MatrixBase<CamDerived>& cam) {
  using Scalar = typename CamDerived::Scalar;
  using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
  const Mat2 gram = cam * cam.transpose();
  const Scalar raw_trace = gram.trace();
  const bool floored = raw_trace < Scalar(kCameraTraceFloor);
  const Scalar trace = floored ? Scalar(kCameraTraceFloor) : raw_trace;
  const Mat2 normalized = (Scalar(2) / trace) * gram - Mat2::Identity();

  CameraLossGrad<Scalar> out;
  out.value = normalized.norm();
  if (out.value > Scalar(0)) {
    const Mat2 unit = normalized / out.value;
    Mat2 d_gram = (Scalar(2) / trace) * unit;
    if (!floored) d_gram -= (Scalar(2) / (trace * trace)) * unit.cwiseProduct(gram).sum() * Mat2::Identity();
    out.d_camera = (d_gram + d_gram.transpose()) * cam;
  }
  return out;
}

template <typename CamDerived>
typename CamDerived::Scalar camera_loss(const Eigen::MatrixBase<CamDerived>& cam) {
  return camera_loss_grad(cam).value;
}

/// Row-major reshape of the 6 camera outputs.
template <typename Scalar>
Camera<Scalar> camera_from_vector(std::span<const Scalar> v) {
  if (v.size() != 6) throw InputError("camera vector must have 6 entries, got " + std::to_string(v.size()));
  Camera<Scalar> k;
  k << v[0], v[1], v[2], v[3], v[4], v[5];
  return k;
}

/// Completes the two camera rows into a proper rotation (rows normalised,
/// orthogonalised, third row their cross product).
template <typename CamDerived>
Eigen::Matrix<typename CamDerived::Scalar, 3, 3> camera_rotation(const Eigen::MatrixBase<CamDerived>& cam) {
  using Scalar = typename CamDerived::Scalar;
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  Vec3 r0 = cam.row(0).transpose();
  Vec3 r1 = cam.row(1).transpose();
  if (!(r0.norm() > Scalar(0)) || !(r1.norm() > Scalar(0)))
    return Eigen::Matrix<Scalar, 3, 3>::Identity();
  r0.normalize();
  r1 = (r1 - r0 * r0.dot(r1));
  if (!(r1.norm() > Scalar(0))) return Eigen::Matrix<Scalar, 3, 3>::Identity();
  r1.normalize();
  Eigen::Matrix<Scalar, 3, 3> rot;
  rot.row(0) = r0.transpose();
  rot.row(1) = r1.transpose();
  rot.row(2) = r0.cross(r1).transpose();
  return rot;
}

}  // namespace replift
