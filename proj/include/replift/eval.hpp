#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "replift/datagen.hpp"
#include "replift/nets.hpp"
#include "replift/procrustes.hpp"
#include "replift/skeleton.hpp"

namespace replift {

enum class Protocol { kI, kII };

inline constexpr double kPckThresholdMm = 150.0;
inline constexpr double kAucStepMm = 5.0;

/// Mean per-joint Euclidean distance. Protocol-II first aligns the estimate
/// to the truth by a similarity transform. With `root_index` >= 0, Protocol-I
/// root-centres both poses first.
template <typename EstDerived, typename TruthDerived>
double mpjpe(const Eigen::MatrixBase<EstDerived>& estimate, const Eigen::MatrixBase<TruthDerived>& truth,
             Protocol protocol, int root_index = -1) {
  if (estimate.rows() != 3 || truth.rows() != 3 || estimate.cols() != truth.cols() || truth.cols() == 0)
    throw InputError("mpjpe: joint counts differ");
  Pose3D est = estimate.template cast<double>();
  Pose3D gt = truth.template cast<double>();
  if (protocol == Protocol::kII) {
    est = procrustes_align(est, gt).aligned;
  } else if (root_index >= 0) {
    est = root_centered(est, root_index);
    gt = root_centered(gt, root_index);
  }
  return (est - gt).colwise().norm().mean();
}

/// Percentage of joints within `threshold_mm`, over already aligned pairs.
double pck3d(const std::vector<Pose3D>& estimates, const std::vector<Pose3D>& truths,
             double threshold_mm = kPckThresholdMm);
/// Mean PCK over thresholds 0, 5, ..., 150 mm, as a percentage.
double auc(const std::vector<Pose3D>& estimates, const std::vector<Pose3D>& truths);
/// Middle element, or the mean of the two middle elements.
double median(std::vector<double> values);

struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;  // population
  double max = 0.0;
  bool operator==(const ErrorStats&) const = default;
};
ErrorStats error_stats(const std::vector<double>& values);

struct ActionRow {
  std::string name;
  std::size_t frames = 0;
  double mpjpe_p1 = 0.0;
  double mpjpe_p2 = 0.0;
  bool operator==(const ActionRow&) const = default;
};

struct EvalReport {
  std::vector<ActionRow> actions;
  /// Cross-action means.
  double mpjpe_p1 = 0.0;
  double mpjpe_p2 = 0.0;
  /// Median of the per-frame Protocol-II errors.
  double median_p2 = 0.0;
  double pck3d = 0.0;
  double auc = 0.0;
  ErrorStats symmetry;
  std::size_t frames = 0;
  std::string checkpoint_id;
  std::string dataset_id;
  double noise_sigma = 0.0;

  // Per-frame values in dataset order.
  std::vector<double> frame_p1, frame_p2, frame_symmetry;

  bool operator==(const EvalReport&) const = default;
};

struct LiftedSet {
  std::vector<Pose3D> poses;  // mm, root-centred
  std::vector<CameraMatrix> cameras;
};

/// Normalises the 2D poses (unless already normalised) and lifts them.
LiftedSet lift_dataset(const Lifter<float>& lifter, const ParameterSet<float>& params, const PoseDataset& data);

/// Scores estimates against a paired split. Protocol-I compares both poses
/// in their camera frames: estimate rotated by the estimated camera, truth by
/// the ground-truth camera, both root-centred.
EvalReport evaluate_lifted(const LiftedSet& lifted, const PoseDataset& truth, const SkeletonSpec& spec);

EvalReport evaluate(const Lifter<float>& lifter, const ParameterSet<float>& params, const PoseDataset& test,
                    const SkeletonSpec& spec);

struct SweepRow {
  double sigma = 0.0;
  EvalReport report;
  bool operator==(const SweepRow&) const = default;
};

/// add_noise -> preprocess -> lift -> evaluate for each sigma (pixels).
std::vector<SweepRow> noise_sweep(const Lifter<float>& lifter, const ParameterSet<float>& params,
                                  const PoseDataset& test, const SkeletonSpec& spec,
                                  const std::vector<double>& sigmas, std::uint64_t noise_seed);

/// Mean-pose baseline: Protocol-II error of a fixed pose against every test pose.
double mean_pose_baseline(const Pose3D& mean_pose, const PoseDataset& test);

// Report files. Action columns follow the order of first appearance.
std::string report_csv(const EvalReport& r);
std::string summary_csv(const EvalReport& r);
std::string report_table(const EvalReport& r);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_table(const std::vector<SweepRow>& rows);
nlohmann::json report_json(const EvalReport& r);

/// Least-squares line fit; returns the coefficient of determination.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace replift
