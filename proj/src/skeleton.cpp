#include "replift/skeleton.hpp"

#include <algorithm>
#include <set>

namespace replift {

int SkeletonSpec::joint_index(const std::string& name) const {
  const auto it = std::find(joint_names.begin(), joint_names.end(), name);
  if (it == joint_names.end()) throw InputError("unknown joint '" + name + "'");
  return static_cast<int>(it - joint_names.begin());
}

void SkeletonSpec::validate() const {
  const int n = joints();
  if (n < 2) throw InputError("skeleton needs at least two joints");
  auto valid_joint = [n](int j) { return j >= 0 && j < n; };
  for (std::size_t k = 0; k < bones.size(); ++k) {
    const Bone& b = bones[k];
    if (!valid_joint(b.first) || !valid_joint(b.second))
      throw InputError("bone " + std::to_string(k) + " references an invalid joint");
    if (b.first == b.second) throw InputError("bone " + std::to_string(k) + " joins a joint to itself");
  }
  std::set<int> used;
  for (const auto& [left, right] : left_right_pairs) {
    for (int bone : {left, right}) {
      if (bone < 0 || bone >= bone_count()) throw InputError("symmetry pair references an invalid bone");
      if (!used.insert(bone).second) throw InputError("symmetry pairs must be disjoint");
    }
  }
  if (!valid_joint(root_index)) throw InputError("root index out of range");
  if (spine_index && !valid_joint(*spine_index)) throw InputError("spine index out of range");
  for (int j : masked_joints)
    if (!valid_joint(j)) throw InputError("masked joint out of range");
  for (int j : alignment_joints)
    if (!valid_joint(j)) throw InputError("alignment joint out of range");
}

SkeletonSpec default_skeleton() {
  SkeletonSpec s;
  s.joint_names = {"pelvis",     "r_hip",      "r_knee",  "r_ankle", "l_hip",      "l_knee",
                   "l_ankle",    "spine",      "neck",    "nose",    "head",       "l_shoulder",
                   "l_elbow",    "l_wrist",    "r_shoulder", "r_elbow", "r_wrist"};
  // Bone vectors point from parent to child: b = p[child] - p[parent].
  s.bones = {{1, 0},  {2, 1},  {3, 2},   {4, 0},   {5, 4},   {6, 5},   {7, 0},   {8, 7},
             {9, 8},  {10, 9}, {11, 8},  {12, 11}, {13, 12}, {14, 8},  {15, 14}, {16, 15}};
  // upper arm, lower arm, upper leg, lower leg
  s.left_right_pairs = {{11, 14}, {12, 15}, {4, 1}, {5, 2}};
  s.root_index = 0;
  s.spine_index = 7;
  s.masked_joints = {7};
  s.alignment_joints = {11, 14, 4, 1};
  return s;
}

void to_json(nlohmann::json& j, const SkeletonSpec& spec) {
  nlohmann::json bones = nlohmann::json::array();
  for (const Bone& b : spec.bones) bones.push_back({b.first, b.second});
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [l, r] : spec.left_right_pairs) pairs.push_back({l, r});
  j = nlohmann::json{{"joint_names", spec.joint_names},
                     {"bones", bones},
                     {"left_right_pairs", pairs},
                     {"root_index", spec.root_index},
                     {"masked_joints", spec.masked_joints},
                     {"alignment_joints", spec.alignment_joints}};
  j["spine_index"] = spec.spine_index ? nlohmann::json(*spec.spine_index) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, SkeletonSpec& spec) {
  try {
    spec = SkeletonSpec{};
    j.at("joint_names").get_to(spec.joint_names);
    for (const auto& b : j.at("bones")) spec.bones.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
    for (const auto& p : j.at("left_right_pairs"))
      spec.left_right_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    spec.root_index = j.at("root_index").get<int>();
    if (j.contains("spine_index") && !j.at("spine_index").is_null()) spec.spine_index = j.at("spine_index").get<int>();
    if (j.contains("masked_joints")) j.at("masked_joints").get_to(spec.masked_joints);
    if (j.contains("alignment_joints")) j.at("alignment_joints").get_to(spec.alignment_joints);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("skeleton config: ") + e.what());
  }
  spec.validate();
}

BoneMap bone_map(const SkeletonSpec& spec) {
  spec.validate();
  BoneMap c = BoneMap::Zero(spec.joints(), spec.bone_count());
  for (int k = 0; k < spec.bone_count(); ++k) {
    c(spec.bones[static_cast<std::size_t>(k)].first, k) = 1.0;
    c(spec.bones[static_cast<std::size_t>(k)].second, k) = -1.0;
  }
  return c;
}

}  // namespace replift
