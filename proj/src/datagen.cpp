#include "replift/datagen.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "replift/camera.hpp"
#include "replift/procrustes.hpp"

namespace replift {
namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

Matrix3d rot_x(double t) { return Eigen::AngleAxisd(t, Vector3d::UnitX()).toRotationMatrix(); }
Matrix3d rot_y(double t) { return Eigen::AngleAxisd(t, Vector3d::UnitY()).toRotationMatrix(); }
Matrix3d rot_z(double t) { return Eigen::AngleAxisd(t, Vector3d::UnitZ()).toRotationMatrix(); }

// Per-sample generator so samples can be produced in any order.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, const Range& r) {
  if (r.min == r.max) return r.min;
  return std::uniform_real_distribution<double>(r.min, r.max)(rng);
}

constexpr int kDefaultJoints = 17;
constexpr int kDefaultBones = 16;

Range angle(double lo, double hi) { return {lo, hi}; }

PoseFamily family(std::string name, std::initializer_list<std::pair<Articulation, Range>> overrides) {
  PoseFamily f;
  f.name = std::move(name);
  auto set = [&f](Articulation a, Range r) { f.ranges[static_cast<std::size_t>(a)] = r; };
  set(Articulation::kTorsoPitch, angle(-0.1, 0.25));
  set(Articulation::kTorsoYaw, angle(-0.3, 0.3));
  set(Articulation::kTorsoRoll, angle(-0.1, 0.1));
  set(Articulation::kNeckPitch, angle(-0.3, 0.4));
  set(Articulation::kNeckYaw, angle(-0.6, 0.6));
  set(Articulation::kHipFlex, angle(-0.3, 0.4));
  set(Articulation::kHipAbduct, angle(-0.05, 0.25));
  set(Articulation::kKneeFlex, angle(0.0, 0.5));
  set(Articulation::kShoulderFlex, angle(-0.4, 0.9));
  set(Articulation::kShoulderAbduct, angle(0.0, 0.7));
  set(Articulation::kShoulderTwist, angle(-0.6, 0.6));
  set(Articulation::kElbowFlex, angle(0.0, 1.6));
  for (const auto& [a, r] : overrides) set(a, r);
  return f;
}

}  // namespace

const char* articulation_name(Articulation a) {
  switch (a) {
    case Articulation::kTorsoPitch: return "torso_pitch";
    case Articulation::kTorsoYaw: return "torso_yaw";
    case Articulation::kTorsoRoll: return "torso_roll";
    case Articulation::kNeckPitch: return "neck_pitch";
    case Articulation::kNeckYaw: return "neck_yaw";
    case Articulation::kHipFlex: return "hip_flex";
    case Articulation::kHipAbduct: return "hip_abduct";
    case Articulation::kKneeFlex: return "knee_flex";
    case Articulation::kShoulderFlex: return "shoulder_flex";
    case Articulation::kShoulderAbduct: return "shoulder_abduct";
    case Articulation::kShoulderTwist: return "shoulder_twist";
    case Articulation::kElbowFlex: return "elbow_flex";
    case Articulation::kCount: break;
  }
  return "?";
}

std::vector<double> default_limb_lengths() {
  // r_hip, r_thigh, r_shin, l_hip, l_thigh, l_shin, spine, chest, neck, head,
  // l_clavicle, l_upper_arm, l_forearm, r_clavicle, r_upper_arm, r_forearm
  return {130, 445, 440, 130, 445, 440, 230, 250, 110, 115, 150, 280, 250, 150, 280, 250};
}

std::vector<PoseFamily> default_pose_families() {
  using A = Articulation;
  return {
      family("standing", {}),
      family("walking", {{A::kTorsoPitch, angle(0.0, 0.15)},
                         {A::kHipFlex, angle(-0.5, 0.7)},
                         {A::kKneeFlex, angle(0.0, 1.1)},
                         {A::kShoulderFlex, angle(-0.6, 0.6)},
                         {A::kShoulderAbduct, angle(0.0, 0.3)},
                         {A::kElbowFlex, angle(0.1, 1.0)}}),
      family("sitting", {{A::kTorsoPitch, angle(-0.2, 0.4)},
                         {A::kHipFlex, angle(1.3, 1.8)},
                         {A::kHipAbduct, angle(0.0, 0.35)},
                         {A::kKneeFlex, angle(1.2, 1.9)}}),
      family("reaching", {{A::kTorsoPitch, angle(0.0, 0.7)},
                          {A::kTorsoYaw, angle(-0.5, 0.5)},
                          {A::kShoulderFlex, angle(0.9, 2.8)},
                          {A::kShoulderAbduct, angle(0.0, 1.6)},
                          {A::kElbowFlex, angle(0.0, 0.8)}}),
  };
}

SyntheticPoseConfig default_synthetic_config() {
  SyntheticPoseConfig c;
  c.limb_lengths = default_limb_lengths();
  c.families = default_pose_families();
  return c;
}

void SyntheticPoseConfig::validate(const SkeletonSpec& spec) const {
  if (count <= 0) throw InputError("synthetic config: count must be positive");
  if (spec.joints() != kDefaultJoints || spec.bone_count() != kDefaultBones)
    throw InputError("synthetic generator drives the default 17-joint skeleton only");
  if (static_cast<int>(limb_lengths.size()) != spec.bone_count())
    throw InputError("synthetic config: expected " + std::to_string(spec.bone_count()) + " limb lengths");
  for (double l : limb_lengths)
    if (!(l > 0.0) || !std::isfinite(l)) throw InputError("synthetic config: limb lengths must be positive");
  if (families.empty()) throw InputError("synthetic config: no pose families");
  for (const auto& f : families)
    for (const auto& r : f.ranges)
      if (!r.valid()) throw InputError("synthetic config: empty angle range in family '" + f.name + "'");
  for (const Range* r : {&body_yaw, &camera_elevation, &camera_azimuth, &scale})
    if (!r->valid()) throw InputError("synthetic config: empty range");
  if (!(scale.min > 0.0)) throw InputError("synthetic config: camera scale must be positive");
}

Pose3D forward_kinematics(const std::vector<double>& len, const PoseAngles& angles, double body_yaw) {
  if (len.size() != kDefaultBones) throw InputError("forward_kinematics: expected 16 limb lengths");
  auto at = [](const std::array<double, kArticulationCount>& a, Articulation k) {
    return a[static_cast<std::size_t>(k)];
  };
  using A = Articulation;
  const auto& body = angles.left;

  Pose3D x = Pose3D::Zero(3, kDefaultJoints);
  const Matrix3d root = rot_y(body_yaw);
  const Vector3d down(0, -1, 0);

  struct LegJoints {
    double side;
    int hip, knee, ankle, hip_bone, thigh_bone, shin_bone;
    const std::array<double, kArticulationCount>* angles;
  };
  for (const LegJoints& leg : {LegJoints{-1.0, 1, 2, 3, 0, 1, 2, &angles.right},
                               LegJoints{1.0, 4, 5, 6, 3, 4, 5, &angles.left}}) {
    const Vector3d hip = root * Vector3d(leg.side * len[leg.hip_bone], 0, 0);
    const Matrix3d thigh = root * rot_x(-at(*leg.angles, A::kHipFlex)) * rot_z(leg.side * at(*leg.angles, A::kHipAbduct));
    const Vector3d knee = hip + thigh * down * len[leg.thigh_bone];
    const Matrix3d shin = thigh * rot_x(at(*leg.angles, A::kKneeFlex));
    x.col(leg.hip) = hip;
    x.col(leg.knee) = knee;
    x.col(leg.ankle) = knee + shin * down * len[leg.shin_bone];
  }

  const Matrix3d lower_back = root * rot_x(at(body, A::kTorsoPitch));
  const Vector3d spine = lower_back * Vector3d(0, len[6], 0);
  const Matrix3d chest = lower_back * rot_y(at(body, A::kTorsoYaw)) * rot_z(at(body, A::kTorsoRoll));
  const Vector3d neck = spine + chest * Vector3d(0, len[7], 0);
  const Matrix3d head = chest * rot_x(-at(body, A::kNeckPitch)) * rot_y(at(body, A::kNeckYaw));
  const Vector3d nose = neck + head * Vector3d(0, 0.8, 0.6) * len[8];
  x.col(7) = spine;
  x.col(8) = neck;
  x.col(9) = nose;
  x.col(10) = nose + head * Vector3d(0, 0.9, -0.3).normalized() * len[9];

  struct ArmJoints {
    double side;
    int shoulder, elbow, wrist, clav_bone, upper_bone, fore_bone;
    const std::array<double, kArticulationCount>* angles;
  };
  for (const ArmJoints& arm : {ArmJoints{1.0, 11, 12, 13, 10, 11, 12, &angles.left},
                               ArmJoints{-1.0, 14, 15, 16, 13, 14, 15, &angles.right}}) {
    const Vector3d shoulder = neck + chest * Vector3d(arm.side * len[arm.clav_bone], 0, 0);
    const Matrix3d upper = chest * rot_x(-at(*arm.angles, A::kShoulderFlex)) *
                           rot_z(arm.side * at(*arm.angles, A::kShoulderAbduct)) *
                           rot_y(arm.side * at(*arm.angles, A::kShoulderTwist));
    const Vector3d elbow = shoulder + upper * down * len[arm.upper_bone];
    const Matrix3d fore = upper * rot_x(-at(*arm.angles, A::kElbowFlex));
    x.col(arm.shoulder) = shoulder;
    x.col(arm.elbow) = elbow;
    x.col(arm.wrist) = elbow + fore * down * len[arm.fore_bone];
  }
  return x;
}

CameraMatrix make_camera(double elevation, double azimuth, double scale) {
  const Matrix3d r = rot_x(elevation) * rot_y(azimuth);
  return scale * r.topRows<2>();
}

PoseDataset generate_synthetic(const SyntheticPoseConfig& config, const SkeletonSpec& spec) {
  config.validate(spec);
  PoseDataset out;
  out.pairing = Pairing::kPaired;
  out.joints = spec.joints();
  const auto count = static_cast<std::size_t>(config.count);
  const std::size_t families = config.families.size();
  out.poses3d.resize(count);
  out.cameras.resize(count);
  out.poses2d.resize(count);

  for (std::size_t f = 0; f < families; ++f) {
    const std::size_t begin = f * count / families;
    const std::size_t end = (f + 1) * count / families;
    if (end > begin) out.actions.push_back({config.families[f].name, begin, end});
    for (std::size_t i = begin; i < end; ++i) {
      auto rng = sample_rng(config.seed, 0, i);
      PoseAngles angles;
      for (int a = 0; a < kArticulationCount; ++a) {
        const Range& r = config.families[f].ranges[static_cast<std::size_t>(a)];
        angles.left[static_cast<std::size_t>(a)] = uniform(rng, r);
        angles.right[static_cast<std::size_t>(a)] = uniform(rng, r);
      }
      const double yaw = uniform(rng, config.body_yaw);
      const double elevation = uniform(rng, config.camera_elevation);
      const double azimuth = uniform(rng, config.camera_azimuth);
      const double scale = uniform(rng, config.scale);

      out.poses3d[i] = forward_kinematics(config.limb_lengths, angles, yaw);
      out.cameras[i] = make_camera(elevation, azimuth, scale);
      out.poses2d[i] = Pose2D(reproject(out.poses3d[i], out.cameras[i]));
    }
  }
  apply_mask(out, spec);
  return out;
}

void apply_mask(PoseDataset& dataset, const SkeletonSpec& spec) {
  for (Pose2D& p : dataset.poses2d) {
    if (p.joints() != spec.joints()) throw InputError("2D pose does not match skeleton joint count");
    for (int j : spec.masked_joints) p.visible(j) = false;
  }
}

Pose3D preprocess_3d(const Pose3D& pose, const Pose3D& tmpl, const SkeletonSpec& spec) {
  if (pose.cols() != spec.joints()) throw InputError("preprocess_3d: pose does not match skeleton");
  return align_to_template(root_centered(pose, spec.root_index), tmpl, spec.alignment_joints);
}

Pose2D preprocess_2d(const Pose2D& pose, int root_index) {
  const Eigen::Index n = pose.joints();
  if (pose.visible.size() != n) throw InputError("preprocess_2d: mask size differs from joint count");
  if (root_index < 0 || root_index >= n) throw InputError("preprocess_2d: root index out of range");
  if (!pose.visible(root_index)) throw InputError("preprocess_2d: root joint is not visible");
  const Eigen::Index visible = pose.visible_count();
  if (visible < 2) throw DegenerateError("preprocess_2d: fewer than two visible joints");

  Pose2D out(Eigen::Matrix2Xd::Zero(2, n), pose.visible);
  const Eigen::Vector2d root = pose.coords.col(root_index);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!pose.visible(j)) continue;
    out.coords.col(j) = pose.coords.col(j) - root;
    sum += out.coords.col(j).sum();
  }
  const double entries = 2.0 * static_cast<double>(visible);
  const double mean = sum / entries;
  double ss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    if (pose.visible(j)) ss += (out.coords.col(j).array() - mean).square().sum();
  const double stddev = std::sqrt(ss / entries);
  if (!(stddev > 0.0) || !std::isfinite(stddev)) throw DegenerateError("preprocess_2d: zero spread");
  out.coords /= stddev;
  return out;
}

PoseDataset add_noise(const PoseDataset& dataset, const NoiseSpec& noise) {
  if (!(noise.sigma >= 0.0)) throw InputError("noise sigma must be non-negative");
  if (dataset.normalized2d && noise.sigma > 0.0)
    throw InputError("noise is specified in pixels; add it before 2D normalisation");
  PoseDataset out = dataset;
  out.noise_sigma = noise.sigma;
  if (noise.sigma == 0.0) return out;
  for (std::size_t i = 0; i < out.poses2d.size(); ++i) {
    auto rng = sample_rng(noise.seed, 1, i);
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    Pose2D& p = out.poses2d[i];
    for (Eigen::Index j = 0; j < p.joints(); ++j) {
      if (!p.visible(j)) continue;
      p.coords(0, j) += gauss(rng);
      p.coords(1, j) += gauss(rng);
    }
  }
  return out;
}

Pose3D compute_template(const std::vector<Pose3D>& poses, const SkeletonSpec& spec, int iterations) {
  if (poses.empty()) throw InputError("compute_template: no poses");
  std::vector<Pose3D> centered;
  centered.reserve(poses.size());
  double mean_size = 0.0;
  for (const Pose3D& p : poses) {
    centered.push_back(root_centered(p, spec.root_index));
    mean_size += centered.back().norm();
  }
  mean_size /= static_cast<double>(poses.size());

  Pose3D reference = centered.front();
  for (int it = 0; it < iterations; ++it) {
    Pose3D sum = Pose3D::Zero(3, reference.cols());
    for (const Pose3D& p : centered) sum += fit_similarity(p, reference, false).apply(p);
    reference = sum / static_cast<double>(centered.size());
    const double size = reference.norm();
    if (!(size > 0.0)) throw DegenerateError("compute_template: mean pose collapsed");
    reference *= mean_size / size;
  }
  return reference;
}

PoseDataset prepare_training_pools(PoseDataset dataset, const SkeletonSpec& spec) {
  if (!dataset.normalized2d) {
    for (Pose2D& p : dataset.poses2d) p = preprocess_2d(p, spec.root_index);
    dataset.normalized2d = true;
  }
  if (!dataset.aligned3d && !dataset.poses3d.empty()) {
    if (!dataset.template_pose) dataset.template_pose = compute_template(dataset.poses3d, spec);
    for (Pose3D& p : dataset.poses3d) p = preprocess_3d(p, *dataset.template_pose, spec);
    dataset.aligned3d = true;
  }
  return dataset;
}

void ExperimentConfig::validate(const SkeletonSpec& spec) const {
  if (train_2d_count <= 0 || train_3d_count <= 0 || test_count <= 0)
    throw InputError("experiment config: counts must be positive");
  if (subjects_per_split <= 0) throw InputError("experiment config: subjects_per_split must be positive");
  if (!(subject_scale_jitter >= 0.0 && subject_scale_jitter < 1.0) || !(limb_jitter >= 0.0 && limb_jitter < 1.0))
    throw InputError("experiment config: jitter must lie in [0, 1)");
  SyntheticPoseConfig probe = base;
  probe.count = 1;
  probe.validate(spec);
}

namespace {

// Bone whose joints are the left/right mirror of bone k, or k itself.
std::vector<int> mirror_bones(const SkeletonSpec& spec) {
  auto mirror_joint = [&spec](int j) {
    std::string name = spec.joint_names[static_cast<std::size_t>(j)];
    if (name.rfind("l_", 0) == 0) name[0] = 'r';
    else if (name.rfind("r_", 0) == 0) name[0] = 'l';
    else return j;
    return spec.joint_index(name);
  };
  std::vector<int> out(spec.bones.size());
  for (std::size_t k = 0; k < spec.bones.size(); ++k) {
    const Bone m{mirror_joint(spec.bones[k].first), mirror_joint(spec.bones[k].second)};
    out[k] = static_cast<int>(k);
    for (std::size_t o = 0; o < spec.bones.size(); ++o)
      if (spec.bones[o] == m) out[k] = static_cast<int>(o);
  }
  return out;
}

PoseDataset generate_split(const ExperimentConfig& config, const SkeletonSpec& spec, std::uint64_t split,
                           int count) {
  const std::vector<int> mirror = mirror_bones(spec);
  PoseDataset all;
  all.joints = spec.joints();
  for (int s = 0; s < config.subjects_per_split; ++s) {
    const int begin = s * count / config.subjects_per_split;
    const int end = (s + 1) * count / config.subjects_per_split;
    if (end == begin) continue;
    auto rng = sample_rng(config.seed, 100 + split, static_cast<std::uint64_t>(s));
    SyntheticPoseConfig subject = config.base;
    subject.count = end - begin;
    subject.seed = std::uniform_int_distribution<std::uint64_t>()(rng);
    const double body = 1.0 + uniform(rng, {-config.subject_scale_jitter, config.subject_scale_jitter});
    std::vector<double> factor(subject.limb_lengths.size(), 1.0);
    for (std::size_t k = 0; k < factor.size(); ++k) {
      const auto m = static_cast<std::size_t>(mirror[k]);
      factor[k] = m < k ? factor[m] : 1.0 + uniform(rng, {-config.limb_jitter, config.limb_jitter});
    }
    for (std::size_t k = 0; k < factor.size(); ++k) subject.limb_lengths[k] *= body * factor[k];

    PoseDataset part = generate_synthetic(subject, spec);
    const std::size_t offset = all.poses3d.size();
    for (ActionSegment a : part.actions) {
      a.begin += offset;
      a.end += offset;
      all.actions.push_back(a);
    }
    all.poses3d.insert(all.poses3d.end(), part.poses3d.begin(), part.poses3d.end());
    all.poses2d.insert(all.poses2d.end(), part.poses2d.begin(), part.poses2d.end());
    all.cameras.insert(all.cameras.end(), part.cameras.begin(), part.cameras.end());
  }
  return all;
}

}  // namespace

ExperimentData build_experiment(const ExperimentConfig& config, const SkeletonSpec& spec) {
  config.validate(spec);
  const PoseDataset pool2d = generate_split(config, spec, 0, config.train_2d_count);
  const PoseDataset pool3d = generate_split(config, spec, 1, config.train_3d_count);

  ExperimentData data;
  data.train.pairing = Pairing::kUnpaired;
  data.train.joints = spec.joints();
  data.train.poses2d = pool2d.poses2d;
  data.train.poses3d = pool3d.poses3d;
  data.train = prepare_training_pools(std::move(data.train), spec);

  data.test = generate_split(config, spec, 2, config.test_count);
  data.test.pairing = Pairing::kPaired;
  data.test.template_pose = data.train.template_pose;
  return data;
}

namespace {

nlohmann::json range_json(const Range& r) { return {r.min, r.max}; }
Range range_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

void to_json(nlohmann::json& j, const SyntheticPoseConfig& c) {
  nlohmann::json families = nlohmann::json::array();
  for (const auto& f : c.families) {
    nlohmann::json ranges = nlohmann::json::object();
    for (int a = 0; a < kArticulationCount; ++a)
      ranges[articulation_name(static_cast<Articulation>(a))] = range_json(f.ranges[static_cast<std::size_t>(a)]);
    families.push_back({{"name", f.name}, {"angles", ranges}});
  }
  j = nlohmann::json{{"seed", c.seed},
                     {"count", c.count},
                     {"limb_lengths", c.limb_lengths},
                     {"families", families},
                     {"body_yaw", range_json(c.body_yaw)},
                     {"camera_elevation", range_json(c.camera_elevation)},
                     {"camera_azimuth", range_json(c.camera_azimuth)},
                     {"scale", range_json(c.scale)}};
}

void from_json(const nlohmann::json& j, SyntheticPoseConfig& c) {
  c = default_synthetic_config();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("count")) c.count = j.at("count").get<int>();
  if (j.contains("limb_lengths")) j.at("limb_lengths").get_to(c.limb_lengths);
  if (j.contains("families")) {
    c.families.clear();
    for (const auto& jf : j.at("families")) {
      PoseFamily f = family(jf.at("name").get<std::string>(), {});
      if (jf.contains("angles")) {
        for (int a = 0; a < kArticulationCount; ++a) {
          const char* name = articulation_name(static_cast<Articulation>(a));
          if (jf.at("angles").contains(name)) f.ranges[static_cast<std::size_t>(a)] = range_from(jf.at("angles").at(name));
        }
      }
      c.families.push_back(std::move(f));
    }
  }
  if (j.contains("body_yaw")) c.body_yaw = range_from(j.at("body_yaw"));
  if (j.contains("camera_elevation")) c.camera_elevation = range_from(j.at("camera_elevation"));
  if (j.contains("camera_azimuth")) c.camera_azimuth = range_from(j.at("camera_azimuth"));
  if (j.contains("scale")) c.scale = range_from(j.at("scale"));
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"seed", c.seed},
                     {"train_2d_count", c.train_2d_count},
                     {"train_3d_count", c.train_3d_count},
                     {"test_count", c.test_count},
                     {"subjects_per_split", c.subjects_per_split},
                     {"subject_scale_jitter", c.subject_scale_jitter},
                     {"limb_jitter", c.limb_jitter},
                     {"synthetic", c.base}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("train_2d_count")) c.train_2d_count = j.at("train_2d_count").get<int>();
  if (j.contains("train_3d_count")) c.train_3d_count = j.at("train_3d_count").get<int>();
  if (j.contains("test_count")) c.test_count = j.at("test_count").get<int>();
  if (j.contains("subjects_per_split")) c.subjects_per_split = j.at("subjects_per_split").get<int>();
  if (j.contains("subject_scale_jitter")) c.subject_scale_jitter = j.at("subject_scale_jitter").get<double>();
  if (j.contains("limb_jitter")) c.limb_jitter = j.at("limb_jitter").get<double>();
  if (j.contains("synthetic")) c.base = j.at("synthetic").get<SyntheticPoseConfig>();
}

}  // namespace replift
