#pragma once

#include <limits>
#include <vector>

#include "replift/errors.hpp"
#include "replift/types.hpp"

namespace replift {

template <typename Scalar>
struct Similarity {
  Eigen::Matrix<Scalar, 3, 3> rotation = Eigen::Matrix<Scalar, 3, 3>::Identity();
  Scalar scale = Scalar(1);
  Eigen::Matrix<Scalar, 3, 1> translation = Eigen::Matrix<Scalar, 3, 1>::Zero();

  template <typename Derived>
  Matrix3X<Scalar> apply(const Eigen::MatrixBase<Derived>& points) const {
    Matrix3X<Scalar> out = scale * (rotation * points);
    out.colwise() += translation;
    return out;
  }
};

template <typename Scalar>
struct ProcrustesResult {
  Matrix3X<Scalar> aligned;
  Similarity<Scalar> transform;
};

/// Least-squares similarity mapping `source` onto `target`:
///   min || s R source + t - target ||_F   with det(R) = +1.
/// When `with_translation` is false, t = 0 and the fit is about the origin,
/// which is what root-centred poses want.
template <typename SrcDerived, typename DstDerived>
Similarity<typename SrcDerived::Scalar> fit_similarity(const Eigen::MatrixBase<SrcDerived>& source,
                                                       const Eigen::MatrixBase<DstDerived>& target,
                                                       bool with_translation) {
  using Scalar = typename SrcDerived::Scalar;
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  if (source.rows() != 3 || target.rows() != 3 || source.cols() != target.cols())
    throw InputError("procrustes: poses must both be 3 x n with equal n");
  if (source.cols() == 0) throw InputError("procrustes: empty pose");

  Vec3 src_mean = Vec3::Zero();
  Vec3 dst_mean = Vec3::Zero();
  if (with_translation) {
    src_mean = source.rowwise().mean();
    dst_mean = target.rowwise().mean();
  }
  const Matrix3X<Scalar> a = source.colwise() - src_mean;
  const Matrix3X<Scalar> b = target.colwise() - dst_mean;

  const Scalar dst_spread = b.squaredNorm();
  const Scalar tiny = std::numeric_limits<Scalar>::epsilon() * std::numeric_limits<Scalar>::epsilon();
  if (!(dst_spread > tiny)) throw DegenerateError("procrustes: reference joints are coincident");

  Similarity<Scalar> sim;
  const Scalar src_spread = a.squaredNorm();
  if (!(src_spread > tiny)) {
    // A collapsed estimate is best matched by the reference centroid.
    sim.scale = Scalar(0);
    sim.translation = dst_mean;
    return sim;
  }

  const Mat3 cov = b * a.transpose();
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 d = Vec3::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < Scalar(0)) d(2) = Scalar(-1);

  sim.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  sim.scale = svd.singularValues().dot(d) / src_spread;
  sim.translation = dst_mean - sim.scale * sim.rotation * src_mean;
  return sim;
}

/// Similarity-aligns `estimate` onto `reference` (rotation, uniform scale and
/// centroid translation).
template <typename EstDerived, typename RefDerived>
ProcrustesResult<typename EstDerived::Scalar> procrustes_align(
    const Eigen::MatrixBase<EstDerived>& estimate, const Eigen::MatrixBase<RefDerived>& reference) {
  ProcrustesResult<typename EstDerived::Scalar> result;
  result.transform = fit_similarity(estimate, reference, true);
  result.aligned = result.transform.apply(estimate);
  return result;
}

/// Fits rotation and scale about the origin on the `joints` subset only and
/// applies the transform to the whole pose.
template <typename PoseDerived, typename TplDerived>
Matrix3X<typename PoseDerived::Scalar> align_to_template(const Eigen::MatrixBase<PoseDerived>& pose,
                                                         const Eigen::MatrixBase<TplDerived>& tmpl,
                                                         const std::vector<int>& joints) {
  using Scalar = typename PoseDerived::Scalar;
  if (pose.rows() != 3 || tmpl.rows() != 3 || pose.cols() != tmpl.cols())
    throw InputError("align_to_template: pose and template shapes differ");
  if (joints.empty()) throw InputError("align_to_template: no alignment joints");
  Matrix3X<Scalar> src(3, static_cast<Eigen::Index>(joints.size()));
  Matrix3X<Scalar> dst(3, static_cast<Eigen::Index>(joints.size()));
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const int j = joints[i];
    if (j < 0 || j >= pose.cols()) throw InputError("align_to_template: joint index out of range");
    src.col(static_cast<Eigen::Index>(i)) = pose.col(j);
    dst.col(static_cast<Eigen::Index>(i)) = tmpl.col(j);
  }
  const Scalar tiny = std::numeric_limits<Scalar>::epsilon() * std::numeric_limits<Scalar>::epsilon();
  if (!(src.squaredNorm() > tiny)) throw DegenerateError("align_to_template: shoulder/hip joints are coincident");
  return fit_similarity(src, dst, false).apply(pose);
}

}  // namespace replift
