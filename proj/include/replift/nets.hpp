#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "replift/skeleton.hpp"
#include "replift/types.hpp"

namespace replift {

/// Ordered collection of named weight and bias tensors.
template <typename Scalar>
class ParameterSet {
 public:
  using Tensor = MatrixX<Scalar>;

  std::size_t add(std::string name, Tensor value);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool contains(std::string_view name) const;
  [[nodiscard]] std::size_t index(std::string_view name) const;
  [[nodiscard]] const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor& operator[](std::size_t i) { return values_[i]; }
  const Tensor& operator[](std::size_t i) const { return values_[i]; }
  Tensor& at(std::string_view name) { return values_[index(name)]; }
  const Tensor& at(std::string_view name) const { return values_[index(name)]; }

  [[nodiscard]] std::size_t scalar_count() const;
  [[nodiscard]] bool all_finite() const;
  [[nodiscard]] ParameterSet zeros_like() const;
  void set_zero();

  template <typename Other>
  [[nodiscard]] ParameterSet<Other> cast() const {
    ParameterSet<Other> out;
    for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], values_[i].template cast<Other>());
    return out;
  }

  bool operator==(const ParameterSet& o) const { return names_ == o.names_ && values_ == o.values_; }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct LifterArch {
  int joints = 17;
  int root_index = 0;
  int width = 1000;
  int blocks = 2;
  double leaky_slope = 0.2;
  /// Camera branch reuses the pose branch's input layer and first block.
  bool share_first_block = false;
  /// Network pose outputs are in units of this many millimetres.
  double pose_unit_mm = 300.0;

  bool operator==(const LifterArch&) const = default;
};

struct CriticArch {
  int joints = 17;
  std::vector<Bone> bones = default_skeleton().bones;
  bool kcs_enabled = true;
  int kcs_width = 100;
  int kcs_layers = 2;
  int pose_width = 100;
  int pose_layers = 2;
  double leaky_slope = 0.2;
  double pose_unit_mm = 300.0;

  bool operator==(const CriticArch&) const = default;
};

void to_json(nlohmann::json& j, const LifterArch& a);
void from_json(const nlohmann::json& j, LifterArch& a);
void to_json(nlohmann::json& j, const CriticArch& a);
void from_json(const nlohmann::json& j, CriticArch& a);

/// Fan-in scaled normal initialisation for leaky-ReLU layers.
inline double init_variance(int fan_in, double slope) {
  return 2.0 / ((1.0 + slope * slope) * static_cast<double>(fan_in));
}

/// Pose and camera regression from a normalised 2D pose. Batches are stored
/// one sample per column: inputs 2n x B, poses 3n x B, cameras 6 x B.
template <typename Scalar>
class Lifter {
 public:
  using Mat = MatrixX<Scalar>;

  struct Output {
    Mat poses;
    Mat cameras;
  };

  struct BlockTape {
    Mat input, pre0, act0, pre1;
  };
  struct BranchTape {
    Mat input, stem_pre;
    std::vector<BlockTape> blocks;
    Mat features;
  };
  struct Tape {
    BranchTape pose, camera;
  };

  explicit Lifter(LifterArch arch);

  [[nodiscard]] const LifterArch& arch() const { return arch_; }
  [[nodiscard]] int input_width() const { return 2 * arch_.joints; }
  [[nodiscard]] int pose_width() const { return 3 * arch_.joints; }

  [[nodiscard]] ParameterSet<Scalar> init_parameters(std::uint64_t seed) const;
  /// Throws InputError if `params` does not match this architecture.
  void check(const ParameterSet<Scalar>& params) const;

  /// Poses come out root-centred, in network units (see pose_unit_mm).
  Output forward(const ParameterSet<Scalar>& params, const Mat& input, Tape* tape = nullptr) const;
  /// Accumulates parameter gradients into `grads`.
  void backward(const ParameterSet<Scalar>& params, const Tape& tape, const Mat& d_poses, const Mat& d_cameras,
                ParameterSet<Scalar>& grads) const;

  /// Parameters in the pose branch alone (input layer, blocks, output layer).
  [[nodiscard]] std::size_t pose_branch_parameter_count() const;

 private:
  struct Dense {
    std::string weight, bias;
  };
  struct Branch {
    bool has_stem = true;
    Dense stem;
    std::vector<std::pair<Dense, Dense>> blocks;
    Dense out;
  };

  Mat run_branch(const ParameterSet<Scalar>& p, const Branch& b, const Mat& x, std::size_t first_block,
                 BranchTape* t, Mat* after_first_block) const;
  Mat back_branch(const ParameterSet<Scalar>& p, const Branch& b, const BranchTape& t, std::size_t first_block,
                  const Mat& d_out, const Mat* extra_after_first_block, ParameterSet<Scalar>& g) const;
  [[nodiscard]] std::vector<std::pair<std::string, std::pair<int, int>>> layout() const;

  LifterArch arch_;
  Branch pose_, camera_;
};

/// Wasserstein critic: a KCS path and a raw-pose path, concatenated into a
/// linear output. Inputs are 3n x B poses in network units.
template <typename Scalar>
class Critic {
 public:
  using Mat = MatrixX<Scalar>;

  struct StackTape {
    std::vector<Mat> inputs, pre;
  };
  struct Tape {
    Mat input;
    std::vector<Matrix3X<Scalar>> bone_vectors;  // per sample, 3 x b
    StackTape kcs, pose;
    Mat features;
  };

  struct PenaltyResult {
    Scalar value = Scalar(0);
    /// Input-gradient norm per sample.
    std::vector<Scalar> grad_norms;
  };

  explicit Critic(CriticArch arch);

  [[nodiscard]] const CriticArch& arch() const { return arch_; }
  [[nodiscard]] ParameterSet<Scalar> init_parameters(std::uint64_t seed) const;
  void check(const ParameterSet<Scalar>& params) const;

  /// 1 x B critic values.
  Mat forward(const ParameterSet<Scalar>& params, const Mat& poses, Tape* tape = nullptr) const;
  /// Back-propagates d_out (1 x B). Parameter gradients are accumulated into
  /// `grads` when non-null; returns the input gradient (3n x B).
  Mat backward(const ParameterSet<Scalar>& params, const Tape& tape, const Mat& d_out,
               ParameterSet<Scalar>* grads) const;
  /// Input gradient of the critic value for each sample.
  Mat input_gradient(const ParameterSet<Scalar>& params, const Mat& poses) const;

  /// weight * mean_i (||grad_x critic(x_i)||_2 - 1)^2 and its parameter
  /// gradient, accumulated into `grads` when non-null.
  PenaltyResult gradient_penalty(const ParameterSet<Scalar>& params, const Mat& points, Scalar weight,
                                 ParameterSet<Scalar>* grads) const;

  /// Flattened KCS matrices (b*b x B) of a batch.
  Mat kcs_features(const Mat& poses, std::vector<Matrix3X<Scalar>>* bones = nullptr) const;

 private:
  struct Dense {
    std::string weight, bias;
  };
  [[nodiscard]] std::vector<std::pair<std::string, std::pair<int, int>>> layout() const;
  Mat stack_forward(const ParameterSet<Scalar>& p, const std::vector<Dense>& layers, const Mat& x,
                    StackTape* t) const;
  Mat stack_tangent(const ParameterSet<Scalar>& p, const std::vector<Dense>& layers, const StackTape& primal,
                    const Mat& x_dot, StackTape* tangent) const;
  Mat stack_backward(const ParameterSet<Scalar>& p, const std::vector<Dense>& layers, const std::vector<Mat>& inputs,
                     const std::vector<Mat>& pre, const Mat& d_out, ParameterSet<Scalar>* g, bool with_bias) const;

  CriticArch arch_;
  MatrixX<Scalar> bone_map_;
  std::vector<Dense> kcs_layers_, pose_layers_;
  Dense out_;
};

/// Flattens a 2D pose column-major (x0, y0, x1, y1, ...), hidden joints zeroed.
template <typename Scalar>
VectorX<Scalar> lifter_input(const Pose2D& normalized);

struct LiftResult {
  Pose3D pose;  // mm, root-centred
  /// Maps the millimetre pose onto the normalised 2D input.
  CameraMatrix camera;
};

/// Single-frame lift of a normalised 2D pose.
template <typename Scalar>
LiftResult lifter_forward(const Lifter<Scalar>& lifter, const ParameterSet<Scalar>& params, const Pose2D& normalized);

/// Batched lift; `inputs` is 2n x B.
template <typename Scalar>
std::vector<LiftResult> lift_batch(const Lifter<Scalar>& lifter, const ParameterSet<Scalar>& params,
                                   const MatrixX<Scalar>& inputs);

/// Critic value of one millimetre pose.
template <typename Scalar>
Scalar critic_forward(const Critic<Scalar>& critic, const ParameterSet<Scalar>& params, const Pose3D& pose_mm);

}  // namespace replift
