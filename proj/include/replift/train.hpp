#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "replift/datagen.hpp"
#include "replift/nets.hpp"

namespace replift {

struct LossWeights {
  double rep = 1.0;
  double cam = 1.0;
  double adv = 1.0;
  bool operator==(const LossWeights&) const = default;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  /// Multiplied into the learning rate once every `decay_every` epochs.
  double decay = 0.95;
  int decay_every = 10;
  int critic_iters = 5;
  double gp_weight = 10.0;
  LossWeights loss_weights;
  int batch_size = 32;
  int epochs = 30;
  std::uint64_t seed = 1;
  bool kcs_enabled = true;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  double adam_epsilon = 1e-8;
  /// Periodic checkpoint cadence in epochs (0 disables periodic ones).
  int checkpoint_every = 10;
  bool keep_all_checkpoints = false;
  LifterArch lifter;
  CriticArch critic;

  /// Throws InputError.
  void validate() const;
  [[nodiscard]] double lr_at(int epoch) const;
  /// Critic architecture with kcs_enabled applied.
  [[nodiscard]] CriticArch critic_arch() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochMetrics {
  int epoch = 0;
  std::int64_t step = 0;
  double lr = 0.0;
  double w_loss = 0.0;
  double rep_loss = 0.0;
  double cam_loss = 0.0;
  double adv_loss = 0.0;
  double gp = 0.0;
  std::optional<double> eval_mpjpe_p1;
  std::optional<double> eval_mpjpe_p2;
  bool operator==(const EpochMetrics&) const = default;
};

template <typename Scalar>
struct AdamState {
  ParameterSet<Scalar> m, v;
  std::int64_t step = 0;
};

struct AdamHyper {
  double beta1 = 0.0;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

template <typename Scalar>
void adam_update(ParameterSet<Scalar>& params, const ParameterSet<Scalar>& grads, AdamState<Scalar>& state,
                 double lr, const AdamHyper& hyper);

/// Everything needed to continue a run. Randomness is derived from
/// (seed, epoch) at every epoch start, so no generator state is stored.
struct TrainState {
  TrainConfig config;
  ParameterSet<float> lifter;
  ParameterSet<float> critic;
  AdamState<float> lifter_opt;
  AdamState<float> critic_opt;
  /// Completed epochs.
  int epoch = 0;
  std::int64_t step = 0;
  std::vector<EpochMetrics> history;
};

TrainState init_train_state(const TrainConfig& config);

struct CriticStepResult {
  double w_loss = 0.0;  // mean critic(real) - mean critic(fake)
  double gp = 0.0;
  double loss = 0.0;
};

struct LifterStepResult {
  double adv = 0.0;
  double rep = 0.0;
  double cam = 0.0;
  double loss = 0.0;
};

/// Normalised 2D inputs (2n x B, hidden joints zero) with their visibility (n x B).
struct LifterBatch {
  MatrixX<float> inputs;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> visible;
};

/// Owns the networks of one run and performs single optimisation steps.
class Trainer {
 public:
  explicit Trainer(TrainState state);

  [[nodiscard]] const TrainState& state() const { return state_; }
  TrainState& state() { return state_; }
  [[nodiscard]] const Lifter<float>& lifter() const { return lifter_; }
  [[nodiscard]] const Critic<float>& critic() const { return critic_; }

  /// One critic update on real/fake batches (3n x B, network units).
  /// Interpolation weights are drawn from `rng`.
  CriticStepResult critic_step(const MatrixX<float>& real, const MatrixX<float>& fake, std::mt19937_64& rng,
                               double lr);
  /// One lifter update against the frozen critic.
  LifterStepResult lifter_step(const LifterBatch& batch, double lr);

 private:
  TrainState state_;
  Lifter<float> lifter_;
  Critic<float> critic_;
};

/// Training pools in network layout.
struct TrainPools {
  LifterBatch pool2d;
  MatrixX<float> pool3d;  // 3n x N, network units
};

/// Rejects datasets that do not fit the configured architecture.
TrainPools make_train_pools(const PoseDataset& train, const TrainConfig& config);

struct TrainOptions {
  /// Checkpoints and metrics.csv go here when non-empty.
  std::filesystem::path out_dir;
  /// Held-out paired split for per-epoch evaluation.
  const PoseDataset* eval_set = nullptr;
  const SkeletonSpec* skeleton = nullptr;
  /// Returns early after this many completed epochs, as if interrupted.
  std::optional<int> stop_after_epoch;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  TrainState state;
  /// Manifest of the last checkpoint written (empty without out_dir).
  std::filesystem::path final_checkpoint;
};

/// Runs (or continues) training until state.config.epochs epochs are done.
TrainResult train(TrainState state, const PoseDataset& train_pools, const TrainOptions& options = {});
TrainResult train(const TrainConfig& config, const PoseDataset& train_pools, const TrainOptions& options = {});

// Checkpoints are a tensor archive "<stem>.tensors" plus a JSON manifest
// "<stem>.json" holding configuration, counters and the loss history.

/// Returns the SHA-256 of the tensor archive.
std::string save_checkpoint(const TrainState& state, const std::filesystem::path& manifest_path);
TrainState load_checkpoint(const std::filesystem::path& manifest_path);

inline constexpr const char* kMetricsHeader = "epoch,step,lr,w_loss,rep_loss,cam_loss,gp,eval_mpjpe_p1,eval_mpjpe_p2";
std::string metrics_row(const EpochMetrics& m);
std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path);

}  // namespace replift
