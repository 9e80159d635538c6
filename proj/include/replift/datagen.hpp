#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "replift/skeleton.hpp"
#include "replift/types.hpp"

namespace replift {

struct Range {
  double min = 0.0;
  double max = 0.0;
  [[nodiscard]] bool valid() const { return min <= max; }
  bool operator==(const Range&) const = default;
};

/// Joint angles (radians) driving the forward kinematics. Angles named with
/// a side are sampled independently per side.
enum class Articulation : int {
  kTorsoPitch,
  kTorsoYaw,
  kTorsoRoll,
  kNeckPitch,
  kNeckYaw,
  kHipFlex,
  kHipAbduct,
  kKneeFlex,
  kShoulderFlex,
  kShoulderAbduct,
  kShoulderTwist,
  kElbowFlex,
  kCount
};

inline constexpr int kArticulationCount = static_cast<int>(Articulation::kCount);
const char* articulation_name(Articulation a);

/// A named family of poses (standing, sitting, ...) and its angle ranges.
struct PoseFamily {
  std::string name;
  std::array<Range, kArticulationCount> ranges{};
  bool operator==(const PoseFamily&) const = default;
};

struct SyntheticPoseConfig {
  std::uint64_t seed = 1;
  int count = 1000;
  /// One length per bone of the default skeleton, mm.
  std::vector<double> limb_lengths;
  /// Samples are split evenly across families, in order.
  std::vector<PoseFamily> families;
  Range body_yaw{-0.5, 0.5};
  Range camera_elevation{-0.1, 0.5};
  Range camera_azimuth{-3.14159265358979, 3.14159265358979};
  /// Pixels per millimetre.
  Range scale{0.10, 0.14};

  /// Throws InputError on an invalid configuration.
  void validate(const SkeletonSpec& spec) const;
  bool operator==(const SyntheticPoseConfig&) const = default;
};

/// Limb lengths of a mid-sized adult for the default skeleton (mm).
std::vector<double> default_limb_lengths();
std::vector<PoseFamily> default_pose_families();
SyntheticPoseConfig default_synthetic_config();

struct NoiseSpec {
  double sigma = 0.0;  // pixels
  std::uint64_t seed = 0;
};

enum class Pairing { kPaired, kUnpaired };

/// Frames [begin, end) that belong to one action / sequence.
struct ActionSegment {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const ActionSegment&) const = default;
};

struct PoseDataset {
  std::vector<Pose2D> poses2d;
  std::vector<Pose3D> poses3d;
  std::vector<CameraMatrix> cameras;
  Pairing pairing = Pairing::kPaired;
  int joints = 0;
  bool normalized2d = false;
  bool aligned3d = false;
  std::optional<Pose3D> template_pose;
  std::vector<ActionSegment> actions;
  double noise_sigma = 0.0;

  bool operator==(const PoseDataset&) const = default;
};

/// Angles of one sample. Torso and neck entries are read from `left`.
struct PoseAngles {
  std::array<double, kArticulationCount> left{};
  std::array<double, kArticulationCount> right{};
};

/// Forward kinematics of the default 17-joint skeleton. Body frame: x to the
/// subject's left, y up, z forward; pelvis at the origin.
Pose3D forward_kinematics(const std::vector<double>& limb_lengths, const PoseAngles& angles, double body_yaw);

/// s * (top two rows of Rx(elevation) Ry(azimuth)).
CameraMatrix make_camera(double elevation, double azimuth, double scale);

/// Paired dataset of world-frame 3D poses, weak-perspective cameras
/// s * (top two rows of a rotation) and their exact 2D projections.
PoseDataset generate_synthetic(const SyntheticPoseConfig& config, const SkeletonSpec& spec = default_skeleton());

/// Root-centres the pose then aligns it to the template on the skeleton's
/// alignment joints.
Pose3D preprocess_3d(const Pose3D& pose, const Pose3D& tmpl, const SkeletonSpec& spec = default_skeleton());

/// Root-centres the visible joints, divides them by the standard deviation of
/// all visible coordinates and zeroes hidden joints.
Pose2D preprocess_2d(const Pose2D& pose, int root_index = 0);

/// I.i.d. Gaussian noise on visible 2D coordinates (pixels).
PoseDataset add_noise(const PoseDataset& dataset, const NoiseSpec& noise);

/// Iterative mean of root-centred poses under similarity alignment.
Pose3D compute_template(const std::vector<Pose3D>& poses, const SkeletonSpec& spec, int iterations = 3);

/// Hides the skeleton's masked joints in every 2D pose.
void apply_mask(PoseDataset& dataset, const SkeletonSpec& spec);

struct ExperimentConfig {
  std::uint64_t seed = 7;
  int train_2d_count = 5000;
  int train_3d_count = 5000;
  int test_count = 1000;
  int subjects_per_split = 4;
  /// Per-subject multiplicative spread of the overall body scale.
  double subject_scale_jitter = 0.08;
  /// Per-bone multiplicative spread, symmetric between sides.
  double limb_jitter = 0.05;
  SyntheticPoseConfig base = default_synthetic_config();

  void validate(const SkeletonSpec& spec) const;
};

struct ExperimentData {
  /// Unpaired: normalised 2D pool and template-aligned 3D pool from disjoint subjects.
  PoseDataset train;
  /// Paired: raw pixel 2D, world-frame 3D and ground-truth cameras.
  PoseDataset test;
};

ExperimentData build_experiment(const ExperimentConfig& config, const SkeletonSpec& spec = default_skeleton());

/// Turns a raw paired/unpaired dataset into training pools: 2D normalised,
/// 3D aligned to `tmpl` (computed from the 3D pool when absent).
PoseDataset prepare_training_pools(PoseDataset dataset, const SkeletonSpec& spec);

void to_json(nlohmann::json& j, const SyntheticPoseConfig& c);
void from_json(const nlohmann::json& j, SyntheticPoseConfig& c);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

// Dataset files: one record per line, comma separated, with a header line
//   #replift v1 joints=<n> kind=<2d|3d|cam> normalized=<0|1>
// 2D records end with a visibility bitmask (bit j set = joint j visible).
// A directory holds one file per kind plus manifest.json.

enum class RecordKind { k2d, k3d, kCam };

void write_pose2d_file(const std::filesystem::path& path, const std::vector<Pose2D>& poses, bool normalized);
void write_pose3d_file(const std::filesystem::path& path, const std::vector<Pose3D>& poses, bool normalized = false);
void write_camera_file(const std::filesystem::path& path, const std::vector<CameraMatrix>& cameras);

std::vector<Pose2D> read_pose2d_file(const std::filesystem::path& path, bool* normalized = nullptr);
std::vector<Pose3D> read_pose3d_file(const std::filesystem::path& path, bool* normalized = nullptr);
std::vector<CameraMatrix> read_camera_file(const std::filesystem::path& path);

void save_dataset(const PoseDataset& dataset, const std::filesystem::path& dir);
PoseDataset load_dataset(const std::filesystem::path& dir);

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

}  // namespace replift
