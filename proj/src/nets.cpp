#include "replift/nets.hpp"

#include <cmath>
#include <random>

#include "replift/camera.hpp"
#include "replift/errors.hpp"

namespace replift {

// ---------------------------------------------------------------------------
// ParameterSet

template <typename Scalar>
std::size_t ParameterSet<Scalar>::add(std::string name, Tensor value) {
  if (index_.count(name) != 0) throw InputError("duplicate parameter '" + name + "'");
  const std::size_t i = values_.size();
  index_.emplace(name, i);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return i;
}

template <typename Scalar>
bool ParameterSet<Scalar>::contains(std::string_view name) const {
  return index_.find(name) != index_.end();
}

template <typename Scalar>
std::size_t ParameterSet<Scalar>::index(std::string_view name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw InputError("missing parameter '" + std::string(name) + "'");
  return it->second;
}

template <typename Scalar>
std::size_t ParameterSet<Scalar>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

template <typename Scalar>
bool ParameterSet<Scalar>::all_finite() const {
  for (const auto& v : values_)
    if (!v.allFinite()) return false;
  return true;
}

template <typename Scalar>
ParameterSet<Scalar> ParameterSet<Scalar>::zeros_like() const {
  ParameterSet out;
  for (std::size_t i = 0; i < values_.size(); ++i)
    out.add(names_[i], Tensor::Zero(values_[i].rows(), values_[i].cols()));
  return out;
}

template <typename Scalar>
void ParameterSet<Scalar>::set_zero() {
  for (auto& v : values_) v.setZero();
}

template class ParameterSet<float>;
template class ParameterSet<double>;

// ---------------------------------------------------------------------------

namespace {

template <typename Derived>
auto leaky(const Eigen::MatrixBase<Derived>& z, double slope) {
  using S = typename Derived::Scalar;
  return (z.array() > S(0)).select(z.array(), S(slope) * z.array()).matrix();
}

// Multiplies `d` by the leaky-ReLU derivative at `z`.
template <typename DerivedD, typename DerivedZ>
auto leaky_grad(const Eigen::MatrixBase<DerivedD>& d, const Eigen::MatrixBase<DerivedZ>& z, double slope) {
  using S = typename DerivedZ::Scalar;
  return (z.array() > S(0)).select(d.array(), S(slope) * d.array()).matrix();
}

template <typename Scalar>
ParameterSet<Scalar> init_from_layout(const std::vector<std::pair<std::string, std::pair<int, int>>>& layout,
                                      std::uint64_t seed, double slope) {
  std::mt19937_64 rng(seed);
  ParameterSet<Scalar> params;
  for (const auto& [name, shape] : layout) {
    MatrixX<Scalar> t = MatrixX<Scalar>::Zero(shape.first, shape.second);
    if (name.size() > 2 && name.compare(name.size() - 2, 2, ".W") == 0) {
      std::normal_distribution<double> gauss(0.0, std::sqrt(init_variance(shape.second, slope)));
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = static_cast<Scalar>(gauss(rng));
    }
    params.add(name, std::move(t));
  }
  return params;
}

template <typename Scalar>
void check_layout(const std::vector<std::pair<std::string, std::pair<int, int>>>& layout,
                  const ParameterSet<Scalar>& params) {
  for (const auto& [name, shape] : layout) {
    const auto& t = params.at(name);
    if (t.rows() != shape.first || t.cols() != shape.second)
      throw InputError("parameter '" + name + "' has shape " + std::to_string(t.rows()) + "x" +
                       std::to_string(t.cols()) + ", expected " + std::to_string(shape.first) + "x" +
                       std::to_string(shape.second));
  }
}

std::string layer(const std::string& prefix, const char* leaf) { return prefix + "." + leaf; }

}  // namespace

// ---------------------------------------------------------------------------
// Lifter

template <typename Scalar>
Lifter<Scalar>::Lifter(LifterArch arch) : arch_(arch) {
  if (arch_.joints < 2 || arch_.width < 1 || arch_.blocks < 0) throw InputError("invalid lifter architecture");
  if (arch_.share_first_block && arch_.blocks < 1) throw InputError("sharing needs at least one residual block");
  if (arch_.root_index < 0 || arch_.root_index >= arch_.joints) throw InputError("lifter root index out of range");
  if (!(arch_.pose_unit_mm > 0.0)) throw InputError("pose unit must be positive");

  auto make = [this](const std::string& prefix, bool stem, int first) {
    Branch b;
    b.has_stem = stem;
    b.stem = {layer(prefix, "stem.W"), layer(prefix, "stem.b")};
    for (int k = first; k < arch_.blocks; ++k) {
      const std::string blk = prefix + ".block" + std::to_string(k);
      b.blocks.push_back({{blk + ".fc0.W", blk + ".fc0.b"}, {blk + ".fc1.W", blk + ".fc1.b"}});
    }
    b.out = {layer(prefix, "out.W"), layer(prefix, "out.b")};
    return b;
  };
  pose_ = make("pose", true, 0);
  camera_ = arch_.share_first_block ? make("camera", false, 1) : make("camera", true, 0);
}

template <typename Scalar>
std::vector<std::pair<std::string, std::pair<int, int>>> Lifter<Scalar>::layout() const {
  std::vector<std::pair<std::string, std::pair<int, int>>> out;
  const int w = arch_.width;
  auto add_branch = [&](const Branch& b, int out_width) {
    if (b.has_stem) {
      out.push_back({b.stem.weight, {w, input_width()}});
      out.push_back({b.stem.bias, {w, 1}});
    }
    for (const auto& [fc0, fc1] : b.blocks) {
      out.push_back({fc0.weight, {w, w}});
      out.push_back({fc0.bias, {w, 1}});
      out.push_back({fc1.weight, {w, w}});
      out.push_back({fc1.bias, {w, 1}});
    }
    out.push_back({b.out.weight, {out_width, w}});
    out.push_back({b.out.bias, {out_width, 1}});
  };
  add_branch(pose_, pose_width());
  add_branch(camera_, 6);
  return out;
}

template <typename Scalar>
ParameterSet<Scalar> Lifter<Scalar>::init_parameters(std::uint64_t seed) const {
  return init_from_layout<Scalar>(layout(), seed, arch_.leaky_slope);
}

template <typename Scalar>
void Lifter<Scalar>::check(const ParameterSet<Scalar>& params) const {
  check_layout(layout(), params);
}

template <typename Scalar>
std::size_t Lifter<Scalar>::pose_branch_parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, shape] : layout())
    if (name.rfind("pose.", 0) == 0) n += static_cast<std::size_t>(shape.first) * static_cast<std::size_t>(shape.second);
  return n;
}

template <typename Scalar>
typename Lifter<Scalar>::Mat Lifter<Scalar>::run_branch(const ParameterSet<Scalar>& p, const Branch& b, const Mat& x,
                                                        std::size_t first_block, BranchTape* t,
                                                        Mat* after_first_block) const {
  const double slope = arch_.leaky_slope;
  Mat h;
  if (b.has_stem) {
    Mat z = p.at(b.stem.weight) * x;
    z.colwise() += p.at(b.stem.bias).col(0);
    h = leaky(z, slope);
    if (t) {
      t->input = x;
      t->stem_pre = std::move(z);
    }
  } else {
    h = x;
  }
  if (t) t->blocks.clear();
  for (std::size_t k = 0; k < b.blocks.size(); ++k) {
    const auto& [fc0, fc1] = b.blocks[k];
    Mat pre0 = p.at(fc0.weight) * h;
    pre0.colwise() += p.at(fc0.bias).col(0);
    Mat act0 = leaky(pre0, slope);
    Mat pre1 = p.at(fc1.weight) * act0;
    pre1.colwise() += p.at(fc1.bias).col(0);
    Mat next = h + leaky(pre1, slope);
    if (t) t->blocks.push_back({std::move(h), std::move(pre0), std::move(act0), std::move(pre1)});
    h = std::move(next);
    if (first_block + k == 0 && after_first_block) *after_first_block = h;
  }
  Mat out = p.at(b.out.weight) * h;
  out.colwise() += p.at(b.out.bias).col(0);
  if (t) t->features = std::move(h);
  return out;
}

template <typename Scalar>
typename Lifter<Scalar>::Mat Lifter<Scalar>::back_branch(const ParameterSet<Scalar>& p, const Branch& b,
                                                         const BranchTape& t, std::size_t first_block,
                                                         const Mat& d_out, const Mat* extra_after_first_block,
                                                         ParameterSet<Scalar>& g) const {
  const double slope = arch_.leaky_slope;
  g.at(b.out.weight).noalias() += d_out * t.features.transpose();
  g.at(b.out.bias) += d_out.rowwise().sum();
  Mat dh = p.at(b.out.weight).transpose() * d_out;

  for (std::size_t k = b.blocks.size(); k-- > 0;) {
    if (first_block + k == 0 && extra_after_first_block) dh += *extra_after_first_block;
    const auto& [fc0, fc1] = b.blocks[k];
    const BlockTape& bt = t.blocks[k];
    const Mat d_pre1 = leaky_grad(dh, bt.pre1, slope);
    g.at(fc1.weight).noalias() += d_pre1 * bt.act0.transpose();
    g.at(fc1.bias) += d_pre1.rowwise().sum();
    const Mat d_act0 = p.at(fc1.weight).transpose() * d_pre1;
    const Mat d_pre0 = leaky_grad(d_act0, bt.pre0, slope);
    g.at(fc0.weight).noalias() += d_pre0 * bt.input.transpose();
    g.at(fc0.bias) += d_pre0.rowwise().sum();
    dh.noalias() += p.at(fc0.weight).transpose() * d_pre0;
  }
  if (!b.has_stem) return dh;
  const Mat d_z = leaky_grad(dh, t.stem_pre, slope);
  g.at(b.stem.weight).noalias() += d_z * t.input.transpose();
  g.at(b.stem.bias) += d_z.rowwise().sum();
  return p.at(b.stem.weight).transpose() * d_z;
}

template <typename Scalar>
typename Lifter<Scalar>::Output Lifter<Scalar>::forward(const ParameterSet<Scalar>& params, const Mat& input,
                                                        Tape* tape) const {
  if (input.rows() != input_width())
    throw InputError("lifter input has " + std::to_string(input.rows()) + " rows, expected " +
                     std::to_string(input_width()));
  Output out;
  Mat shared;
  out.poses = run_branch(params, pose_, input, 0, tape ? &tape->pose : nullptr,
                         arch_.share_first_block ? &shared : nullptr);
  const Eigen::Index r = 3 * arch_.root_index;
  for (Eigen::Index c = 0; c < out.poses.cols(); ++c) {
    const Eigen::Matrix<Scalar, 3, 1> root = out.poses.col(c).template segment<3>(r);
    for (int j = 0; j < arch_.joints; ++j) out.poses.col(c).template segment<3>(3 * j) -= root;
  }
  if (arch_.share_first_block) {
    out.cameras = run_branch(params, camera_, shared, 1, tape ? &tape->camera : nullptr, nullptr);
  } else {
    out.cameras = run_branch(params, camera_, input, 0, tape ? &tape->camera : nullptr, nullptr);
  }
  return out;
}

template <typename Scalar>
void Lifter<Scalar>::backward(const ParameterSet<Scalar>& params, const Tape& tape, const Mat& d_poses,
                              const Mat& d_cameras, ParameterSet<Scalar>& grads) const {
  // Undo the root subtraction: the root output receives minus the sum over joints.
  Mat d_raw = d_poses;
  const Eigen::Index r = 3 * arch_.root_index;
  for (Eigen::Index c = 0; c < d_poses.cols(); ++c) {
    Eigen::Matrix<Scalar, 3, 1> sum = Eigen::Matrix<Scalar, 3, 1>::Zero();
    for (int j = 0; j < arch_.joints; ++j) sum += d_poses.col(c).template segment<3>(3 * j);
    d_raw.col(c).template segment<3>(r) -= sum;
  }
  if (arch_.share_first_block) {
    const Mat d_shared = back_branch(params, camera_, tape.camera, 1, d_cameras, nullptr, grads);
    back_branch(params, pose_, tape.pose, 0, d_raw, &d_shared, grads);
  } else {
    back_branch(params, camera_, tape.camera, 0, d_cameras, nullptr, grads);
    back_branch(params, pose_, tape.pose, 0, d_raw, nullptr, grads);
  }
}

template class Lifter<float>;
template class Lifter<double>;

// ---------------------------------------------------------------------------
// Critic

template <typename Scalar>
Critic<Scalar>::Critic(CriticArch arch) : arch_(std::move(arch)) {
  if (arch_.joints < 2 || arch_.bones.empty()) throw InputError("invalid critic architecture");
  if (arch_.pose_layers < 1 || arch_.pose_width < 1) throw InputError("critic needs at least one raw-pose layer");
  if (arch_.kcs_enabled && (arch_.kcs_layers < 1 || arch_.kcs_width < 1))
    throw InputError("critic KCS path needs at least one layer");
  if (!(arch_.pose_unit_mm > 0.0)) throw InputError("pose unit must be positive");
  bone_map_ = MatrixX<Scalar>::Zero(arch_.joints, static_cast<Eigen::Index>(arch_.bones.size()));
  for (std::size_t k = 0; k < arch_.bones.size(); ++k) {
    const Bone& b = arch_.bones[k];
    if (b.first < 0 || b.first >= arch_.joints || b.second < 0 || b.second >= arch_.joints || b.first == b.second)
      throw InputError("critic bone " + std::to_string(k) + " is invalid");
    bone_map_(b.first, static_cast<Eigen::Index>(k)) = Scalar(1);
    bone_map_(b.second, static_cast<Eigen::Index>(k)) = Scalar(-1);
  }
  if (arch_.kcs_enabled)
    for (int i = 0; i < arch_.kcs_layers; ++i)
      kcs_layers_.push_back({"critic.kcs.fc" + std::to_string(i) + ".W", "critic.kcs.fc" + std::to_string(i) + ".b"});
  for (int i = 0; i < arch_.pose_layers; ++i)
    pose_layers_.push_back({"critic.pose.fc" + std::to_string(i) + ".W", "critic.pose.fc" + std::to_string(i) + ".b"});
  out_ = {"critic.out.W", "critic.out.b"};
}

template <typename Scalar>
std::vector<std::pair<std::string, std::pair<int, int>>> Critic<Scalar>::layout() const {
  std::vector<std::pair<std::string, std::pair<int, int>>> out;
  const int bones = static_cast<int>(arch_.bones.size());
  for (std::size_t i = 0; i < kcs_layers_.size(); ++i) {
    const int in = i == 0 ? bones * bones : arch_.kcs_width;
    out.push_back({kcs_layers_[i].weight, {arch_.kcs_width, in}});
    out.push_back({kcs_layers_[i].bias, {arch_.kcs_width, 1}});
  }
  for (std::size_t i = 0; i < pose_layers_.size(); ++i) {
    const int in = i == 0 ? 3 * arch_.joints : arch_.pose_width;
    out.push_back({pose_layers_[i].weight, {arch_.pose_width, in}});
    out.push_back({pose_layers_[i].bias, {arch_.pose_width, 1}});
  }
  const int features = (arch_.kcs_enabled ? arch_.kcs_width : 0) + arch_.pose_width;
  out.push_back({out_.weight, {1, features}});
  out.push_back({out_.bias, {1, 1}});
  return out;
}

template <typename Scalar>
ParameterSet<Scalar> Critic<Scalar>::init_parameters(std::uint64_t seed) const {
  return init_from_layout<Scalar>(layout(), seed, arch_.leaky_slope);
}

template <typename Scalar>
void Critic<Scalar>::check(const ParameterSet<Scalar>& params) const {
  check_layout(layout(), params);
}

template <typename Scalar>
typename Critic<Scalar>::Mat Critic<Scalar>::kcs_features(const Mat& poses,
                                                          std::vector<Matrix3X<Scalar>>* bones) const {
  const Eigen::Index b = bone_map_.cols();
  Mat out(b * b, poses.cols());
  if (bones) bones->resize(static_cast<std::size_t>(poses.cols()));
  for (Eigen::Index c = 0; c < poses.cols(); ++c) {
    const Eigen::Map<const Matrix3X<Scalar>> x(poses.col(c).data(), 3, arch_.joints);
    Matrix3X<Scalar> bv = x * bone_map_;
    Eigen::Map<MatrixX<Scalar>>(out.col(c).data(), b, b).noalias() = bv.transpose() * bv;
    if (bones) (*bones)[static_cast<std::size_t>(c)] = std::move(bv);
  }
  return out;
}

template <typename Scalar>
typename Critic<Scalar>::Mat Critic<Scalar>::stack_forward(const ParameterSet<Scalar>& p,
                                                           const std::vector<Dense>& layers, const Mat& x,
                                                           StackTape* t) const {
  Mat a = x;
  for (const Dense& l : layers) {
    Mat z = p.at(l.weight) * a;
    z.colwise() += p.at(l.bias).col(0);
    Mat next = leaky(z, arch_.leaky_slope);
    if (t) {
      t->inputs.push_back(std::move(a));
      t->pre.push_back(std::move(z));
    }
    a = std::move(next);
  }
  return a;
}

template <typename Scalar>
typename Critic<Scalar>::Mat Critic<Scalar>::stack_tangent(const ParameterSet<Scalar>& p,
                                                           const std::vector<Dense>& layers,
                                                           const StackTape& primal, const Mat& x_dot,
                                                           StackTape* tangent) const {
  // Leaky-ReLU derivatives are piecewise constant, so the tangent map is the
  // linear network with the primal activation pattern frozen.
  Mat a = x_dot;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Mat next = leaky_grad(p.at(layers[i].weight) * a, primal.pre[i], arch_.leaky_slope);
    if (tangent) tangent->inputs.push_back(std::move(a));
    a = std::move(next);
  }
  return a;
}

template <typename Scalar>
typename Critic<Scalar>::Mat Critic<Scalar>::stack_backward(const ParameterSet<Scalar>& p,
                                                            const std::vector<Dense>& layers,
                                                            const std::vector<Mat>& inputs,
                                                            const std::vector<Mat>& pre, const Mat& d_out,
                                                            ParameterSet<Scalar>* g, bool with_bias) const {
  Mat d = d_out;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const Mat dz = leaky_grad(d, pre[i], arch_.leaky_slope);
    if (g) {
      g->at(layers[i].weight).noalias() += dz * inputs[i].transpose();
      if (with_bias) g->at(layers[i].bias) += dz.rowwise().sum();
    }
    d = p.at(layers[i].weight).transpose() * dz;
  }
  return d;
}

template <typename Scalar>
typename Critic<Scalar>::Mat Critic<Scalar>::forward(const ParameterSet<Scalar>& params, const Mat& poses,
                                                     Tape* tape) const {
  if (poses.rows() != 3 * arch_.joints)
    throw InputError("critic input has " + std::to_string(poses.rows()) + " rows, expected " +
                     std::to_string(3 * arch_.joints));
  const Eigen::Index batch = poses.cols();
  Mat pose_feat = stack_forward(params, pose_layers_, poses, tape ? &tape->pose : nullptr);
  Mat features(static_cast<Eigen::Index>(params.at(out_.weight).cols()), batch);
  if (arch_.kcs_enabled) {
    const Mat psi = kcs_features(poses, tape ? &tape->bone_vectors : nullptr);
    features.topRows(arch_.kcs_width) = stack_forward(params, kcs_layers_, psi, tape ? &tape->kcs : nullptr);
  }
  features.bottomRows(arch_.pose_width) = pose_feat;
  Mat out = params.at(out_.weight) * features;
  out.array() += params.at(out_.bias)(0, 0);
  if (tape) {
    tape->input = poses;
    tape->features = std::move(features);
  }
  return out;
}

template <typename Scalar>
typename Critic<Scalar>::Mat Critic<Scalar>::backward(const ParameterSet<Scalar>& params, const Tape& tape,
                                                      const Mat& d_out, ParameterSet<Scalar>* grads) const {
  if (grads) {
    grads->at(out_.weight).noalias() += d_out * tape.features.transpose();
    grads->at(out_.bias)(0, 0) += d_out.sum();
  }
  const Mat d_features = params.at(out_.weight).transpose() * d_out;
  Mat d_input = stack_backward(params, pose_layers_, tape.pose.inputs, tape.pose.pre,
                               d_features.bottomRows(arch_.pose_width), grads, true);
  if (arch_.kcs_enabled) {
    const Mat d_psi = stack_backward(params, kcs_layers_, tape.kcs.inputs, tape.kcs.pre,
                                     d_features.topRows(arch_.kcs_width), grads, true);
    const Eigen::Index b = bone_map_.cols();
    for (Eigen::Index c = 0; c < d_input.cols(); ++c) {
      const Eigen::Map<const MatrixX<Scalar>> g(d_psi.col(c).data(), b, b);
      const auto& bv = tape.bone_vectors[static_cast<std::size_t>(c)];
      const Matrix3X<Scalar> d_bones = bv * (g + g.transpose());
      Eigen::Map<Matrix3X<Scalar>>(d_input.col(c).data(), 3, arch_.joints).noalias() +=
          d_bones * bone_map_.transpose();
    }
  }
  return d_input;
}

template <typename Scalar>
typename Critic<Scalar>::Mat Critic<Scalar>::input_gradient(const ParameterSet<Scalar>& params,
                                                            const Mat& poses) const {
  Tape tape;
  const Mat out = forward(params, poses, &tape);
  return backward(params, tape, Mat::Ones(1, out.cols()), nullptr);
}

template <typename Scalar>
typename Critic<Scalar>::PenaltyResult Critic<Scalar>::gradient_penalty(const ParameterSet<Scalar>& params,
                                                                        const Mat& points, Scalar weight,
                                                                        ParameterSet<Scalar>* grads) const {
  const Eigen::Index batch = points.cols();
  if (batch == 0) throw InputError("gradient penalty needs a non-empty batch");
  Tape tape;
  forward(params, points, &tape);
  const Mat g = backward(params, tape, Mat::Ones(1, batch), nullptr);

  PenaltyResult result;
  result.grad_norms.resize(static_cast<std::size_t>(batch));
  // d penalty / d g_i, the direction along which the input gradient moves.
  Mat direction(g.rows(), batch);
  const Scalar per_sample = weight / Scalar(batch);
  for (Eigen::Index c = 0; c < batch; ++c) {
    const Scalar norm = g.col(c).norm();
    result.grad_norms[static_cast<std::size_t>(c)] = norm;
    result.value += per_sample * (norm - Scalar(1)) * (norm - Scalar(1));
    if (norm > Scalar(0)) direction.col(c) = g.col(c) * (Scalar(2) * per_sample * (norm - Scalar(1)) / norm);
    else direction.col(c).setZero();
  }
  if (!grads) return result;

  // The penalty gradient equals the parameter gradient of the directional
  // derivative <grad_x critic, direction> with the direction held fixed:
  // push the direction through the tangent network, then back-propagate the
  // tangent output to the weights.
  StackTape pose_tangent, kcs_tangent;
  Mat features_dot(tape.features.rows(), batch);
  features_dot.bottomRows(arch_.pose_width) =
      stack_tangent(params, pose_layers_, tape.pose, direction, &pose_tangent);
  if (arch_.kcs_enabled) {
    const Eigen::Index b = bone_map_.cols();
    Mat psi_dot(b * b, batch);
    for (Eigen::Index c = 0; c < batch; ++c) {
      const Eigen::Map<const Matrix3X<Scalar>> u(direction.col(c).data(), 3, arch_.joints);
      const Matrix3X<Scalar> bones_dot = u * bone_map_;
      const auto& bv = tape.bone_vectors[static_cast<std::size_t>(c)];
      const MatrixX<Scalar> cross = bones_dot.transpose() * bv;
      Eigen::Map<MatrixX<Scalar>>(psi_dot.col(c).data(), b, b) = cross + cross.transpose();
    }
    features_dot.topRows(arch_.kcs_width) = stack_tangent(params, kcs_layers_, tape.kcs, psi_dot, &kcs_tangent);
  }

  grads->at(out_.weight) += features_dot.rowwise().sum().transpose();
  const Mat d_features = params.at(out_.weight).transpose() * Mat::Ones(1, batch);
  stack_backward(params, pose_layers_, pose_tangent.inputs, tape.pose.pre, d_features.bottomRows(arch_.pose_width),
                 grads, false);
  if (arch_.kcs_enabled)
    stack_backward(params, kcs_layers_, kcs_tangent.inputs, tape.kcs.pre, d_features.topRows(arch_.kcs_width),
                   grads, false);
  return result;
}

template class Critic<float>;
template class Critic<double>;

// ---------------------------------------------------------------------------

template <typename Scalar>
VectorX<Scalar> lifter_input(const Pose2D& normalized) {
  VectorX<Scalar> v = VectorX<Scalar>::Zero(2 * normalized.joints());
  for (Eigen::Index j = 0; j < normalized.joints(); ++j) {
    if (!normalized.visible(j)) continue;
    v(2 * j) = static_cast<Scalar>(normalized.coords(0, j));
    v(2 * j + 1) = static_cast<Scalar>(normalized.coords(1, j));
  }
  return v;
}

template <typename Scalar>
std::vector<LiftResult> lift_batch(const Lifter<Scalar>& lifter, const ParameterSet<Scalar>& params,
                                   const MatrixX<Scalar>& inputs) {
  const auto out = lifter.forward(params, inputs);
  const double unit = lifter.arch().pose_unit_mm;
  const int n = lifter.arch().joints;
  std::vector<LiftResult> results(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
    LiftResult& r = results[static_cast<std::size_t>(c)];
    r.pose = Eigen::Map<const Matrix3X<Scalar>>(out.poses.col(c).data(), 3, n).template cast<double>() * unit;
    const VectorX<double> cam = out.cameras.col(c).template cast<double>();
    r.camera = camera_from_vector<double>(std::span<const double>(cam.data(), 6)) / unit;
  }
  return results;
}

template <typename Scalar>
LiftResult lifter_forward(const Lifter<Scalar>& lifter, const ParameterSet<Scalar>& params, const Pose2D& normalized) {
  if (normalized.joints() != lifter.arch().joints)
    throw InputError("2D pose has " + std::to_string(normalized.joints()) + " joints, lifter expects " +
                     std::to_string(lifter.arch().joints));
  const MatrixX<Scalar> input = lifter_input<Scalar>(normalized);
  return lift_batch(lifter, params, input).front();
}

template <typename Scalar>
Scalar critic_forward(const Critic<Scalar>& critic, const ParameterSet<Scalar>& params, const Pose3D& pose_mm) {
  if (pose_mm.cols() != critic.arch().joints) throw InputError("pose does not match critic joint count");
  const Pose3D scaled = pose_mm / critic.arch().pose_unit_mm;
  const MatrixX<Scalar> input =
      Eigen::Map<const VectorX<double>>(scaled.data(), scaled.size()).template cast<Scalar>();
  return critic.forward(params, input)(0, 0);
}

template VectorX<float> lifter_input<float>(const Pose2D&);
template VectorX<double> lifter_input<double>(const Pose2D&);
template std::vector<LiftResult> lift_batch(const Lifter<float>&, const ParameterSet<float>&, const MatrixX<float>&);
template std::vector<LiftResult> lift_batch(const Lifter<double>&, const ParameterSet<double>&, const MatrixX<double>&);
template LiftResult lifter_forward(const Lifter<float>&, const ParameterSet<float>&, const Pose2D&);
template LiftResult lifter_forward(const Lifter<double>&, const ParameterSet<double>&, const Pose2D&);
template float critic_forward(const Critic<float>&, const ParameterSet<float>&, const Pose3D&);
template double critic_forward(const Critic<double>&, const ParameterSet<double>&, const Pose3D&);

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const LifterArch& a) {
  j = nlohmann::json{{"joints", a.joints},
                     {"root_index", a.root_index},
                     {"width", a.width},
                     {"blocks", a.blocks},
                     {"leaky_slope", a.leaky_slope},
                     {"share_first_block", a.share_first_block},
                     {"pose_unit_mm", a.pose_unit_mm}};
}

void from_json(const nlohmann::json& j, LifterArch& a) {
  a = LifterArch{};
  a.joints = j.value("joints", a.joints);
  a.root_index = j.value("root_index", a.root_index);
  a.width = j.value("width", a.width);
  a.blocks = j.value("blocks", a.blocks);
  a.leaky_slope = j.value("leaky_slope", a.leaky_slope);
  a.share_first_block = j.value("share_first_block", a.share_first_block);
  a.pose_unit_mm = j.value("pose_unit_mm", a.pose_unit_mm);
}

void to_json(nlohmann::json& j, const CriticArch& a) {
  nlohmann::json bones = nlohmann::json::array();
  for (const Bone& b : a.bones) bones.push_back({b.first, b.second});
  j = nlohmann::json{{"joints", a.joints},         {"bones", bones},
                     {"kcs_enabled", a.kcs_enabled}, {"kcs_width", a.kcs_width},
                     {"kcs_layers", a.kcs_layers},   {"pose_width", a.pose_width},
                     {"pose_layers", a.pose_layers}, {"leaky_slope", a.leaky_slope},
                     {"pose_unit_mm", a.pose_unit_mm}};
}

void from_json(const nlohmann::json& j, CriticArch& a) {
  a = CriticArch{};
  a.joints = j.value("joints", a.joints);
  if (j.contains("bones")) {
    a.bones.clear();
    for (const auto& b : j.at("bones")) a.bones.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
  }
  a.kcs_enabled = j.value("kcs_enabled", a.kcs_enabled);
  a.kcs_width = j.value("kcs_width", a.kcs_width);
  a.kcs_layers = j.value("kcs_layers", a.kcs_layers);
  a.pose_width = j.value("pose_width", a.pose_width);
  a.pose_layers = j.value("pose_layers", a.pose_layers);
  a.leaky_slope = j.value("leaky_slope", a.leaky_slope);
  a.pose_unit_mm = j.value("pose_unit_mm", a.pose_unit_mm);
}

}  // namespace replift
