#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "replift/errors.hpp"
#include "replift/types.hpp"

namespace replift {

/// A directed bone b = p[first] - p[second].
struct Bone {
  int first = 0;
  int second = 0;
  bool operator==(const Bone&) const = default;
};

struct SkeletonSpec {
  std::vector<std::string> joint_names;
  std::vector<Bone> bones;
  /// (left bone index, right bone index) pairs used by the symmetry error.
  std::vector<std::pair<int, int>> left_right_pairs;
  int root_index = 0;
  /// Joint that the 2D detector never reports.
  std::optional<int> spine_index;
  /// Joints zeroed in every 2D observation. Defaults to the spine.
  std::vector<int> masked_joints;
  /// Shoulder and hip joints used for template alignment.
  std::vector<int> alignment_joints;

  [[nodiscard]] int joints() const { return static_cast<int>(joint_names.size()); }
  [[nodiscard]] int bone_count() const { return static_cast<int>(bones.size()); }
  [[nodiscard]] int joint_index(const std::string& name) const;

  /// Throws InputError if any invariant is violated.
  void validate() const;

  bool operator==(const SkeletonSpec&) const = default;
};

/// 17 joints in Human3.6M order, 16 bones pointing from parent to child,
/// spine masked, 4 symmetric limb pairs.
SkeletonSpec default_skeleton();

void to_json(nlohmann::json& j, const SkeletonSpec& spec);
void from_json(const nlohmann::json& j, SkeletonSpec& spec);

/// Builds C so that X * C stacks the bone vectors.
BoneMap bone_map(const SkeletonSpec& spec);

namespace detail {
template <typename PoseDerived, typename MapDerived>
void check_bone_shapes(const Eigen::MatrixBase<PoseDerived>& pose,
                       const Eigen::MatrixBase<MapDerived>& bmap) {
  if (pose.rows() != 3) throw InputError("pose must have 3 rows");
  if (pose.cols() != bmap.rows())
    throw InputError("bone map has " + std::to_string(bmap.rows()) + " joints, pose has " +
                     std::to_string(pose.cols()));
}
}  // namespace detail

/// B = X C, one bone vector per column.
template <typename PoseDerived, typename MapDerived>
Matrix3X<typename PoseDerived::Scalar> bone_matrix(const Eigen::MatrixBase<PoseDerived>& pose,
                                                   const Eigen::MatrixBase<MapDerived>& bmap) {
  detail::check_bone_shapes(pose, bmap);
  return pose * bmap.template cast<typename PoseDerived::Scalar>();
}

/// Psi = B^T B. Diagonal holds squared bone lengths.
template <typename PoseDerived, typename MapDerived>
MatrixX<typename PoseDerived::Scalar> kcs(const Eigen::MatrixBase<PoseDerived>& pose,
                                          const Eigen::MatrixBase<MapDerived>& bmap) {
  const auto bones = bone_matrix(pose, bmap);
  return bones.transpose() * bones;
}

/// Sum over left/right pairs of |len(left) - len(right)|.
template <typename PoseDerived>
typename PoseDerived::Scalar symmetry_error(const Eigen::MatrixBase<PoseDerived>& pose,
                                            const SkeletonSpec& spec) {
  if (pose.rows() != 3 || pose.cols() != spec.joints())
    throw InputError("pose does not match skeleton joint count");
  using Scalar = typename PoseDerived::Scalar;
  auto length = [&](int bone) {
    const Bone& b = spec.bones[static_cast<std::size_t>(bone)];
    return (pose.col(b.first) - pose.col(b.second)).norm();
  };
  Scalar total(0);
  for (const auto& [left, right] : spec.left_right_pairs) total += std::abs(length(left) - length(right));
  return total;
}

/// Subtracts the root column from every joint.
template <typename PoseDerived>
Matrix3X<typename PoseDerived::Scalar> root_centered(const Eigen::MatrixBase<PoseDerived>& pose,
                                                     int root_index) {
  if (root_index < 0 || root_index >= pose.cols()) throw InputError("root index out of range");
  Matrix3X<typename PoseDerived::Scalar> out = pose;
  out.colwise() -= Eigen::Matrix<typename PoseDerived::Scalar, 3, 1>(pose.col(root_index));
  return out;
}

}  // namespace replift
