#include "replift/train.hpp"

#include <cmath>
#include <fstream>
#include <span>
#include <sstream>

#include "replift/camera.hpp"
#include "replift/checkpoint.hpp"
#include "replift/digest.hpp"
#include "replift/errors.hpp"
#include "replift/eval.hpp"

namespace replift {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InputError("train config: " + msg); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (!(decay > 0.0) || !std::isfinite(decay)) fail("decay must be > 0");
  if (decay_every <= 0) fail("decay_every must be > 0");
  if (critic_iters < 0) fail("critic_iters must be >= 0");
  if (!(gp_weight >= 0.0)) fail("gp_weight must be >= 0");
  if (!(loss_weights.rep >= 0.0) || !(loss_weights.cam >= 0.0) || !(loss_weights.adv >= 0.0))
    fail("loss weights must be >= 0");
  if (batch_size <= 0) fail("batch_size must be > 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    fail("adam betas must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) fail("adam_epsilon must be > 0");
  if (lifter.joints != critic.joints) fail("lifter and critic joint counts differ");
  if (lifter.width <= 0 || lifter.blocks < 0) fail("bad lifter architecture");
}

double TrainConfig::lr_at(int epoch) const {
  return learning_rate * std::pow(decay, epoch / decay_every);
}

CriticArch TrainConfig::critic_arch() const {
  CriticArch a = critic;
  a.kcs_enabled = kcs_enabled;
  return a;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{
      {"learning_rate", c.learning_rate},
      {"decay", c.decay},
      {"decay_every", c.decay_every},
      {"critic_iters", c.critic_iters},
      {"gp_weight", c.gp_weight},
      {"loss_weights", {{"rep", c.loss_weights.rep}, {"cam", c.loss_weights.cam}, {"adv", c.loss_weights.adv}}},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"seed", c.seed},
      {"kcs_enabled", c.kcs_enabled},
      {"adam", {{"beta1", c.adam_beta1}, {"beta2", c.adam_beta2}, {"epsilon", c.adam_epsilon}}},
      {"checkpoint_every", c.checkpoint_every},
      {"keep_all_checkpoints", c.keep_all_checkpoints},
      {"lifter", c.lifter},
      {"critic", c.critic},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c = TrainConfig{};
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.decay = j.value("decay", c.decay);
  c.decay_every = j.value("decay_every", c.decay_every);
  c.critic_iters = j.value("critic_iters", c.critic_iters);
  c.gp_weight = j.value("gp_weight", c.gp_weight);
  if (j.contains("loss_weights")) {
    const auto& w = j.at("loss_weights");
    c.loss_weights.rep = w.value("rep", c.loss_weights.rep);
    c.loss_weights.cam = w.value("cam", c.loss_weights.cam);
    c.loss_weights.adv = w.value("adv", c.loss_weights.adv);
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.kcs_enabled = j.value("kcs_enabled", c.kcs_enabled);
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    c.adam_beta1 = a.value("beta1", c.adam_beta1);
    c.adam_beta2 = a.value("beta2", c.adam_beta2);
    c.adam_epsilon = a.value("epsilon", c.adam_epsilon);
  }
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.keep_all_checkpoints = j.value("keep_all_checkpoints", c.keep_all_checkpoints);
  if (j.contains("lifter")) c.lifter = j.at("lifter").get<LifterArch>();
  if (j.contains("critic")) c.critic = j.at("critic").get<CriticArch>();
}

// ---------------------------------------------------------------------------
// Optimiser

template <typename Scalar>
void adam_update(ParameterSet<Scalar>& params, const ParameterSet<Scalar>& grads, AdamState<Scalar>& state,
                 double lr, const AdamHyper& hyper) {
  if (state.m.size() != params.size()) {
    state.m = params.zeros_like();
    state.v = params.zeros_like();
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  const auto b1 = static_cast<Scalar>(hyper.beta1);
  const auto b2 = static_cast<Scalar>(hyper.beta2);
  const auto step = static_cast<Scalar>(lr / c1);
  const auto root_c2 = static_cast<Scalar>(std::sqrt(c2));
  const auto eps = static_cast<Scalar>(hyper.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = grads[i].array();
    auto m = state.m[i].array();
    auto v = state.v[i].array();
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    params[i].array() -= step * m / (v.sqrt() / root_c2 + eps);
  }
}

template void adam_update(ParameterSet<float>&, const ParameterSet<float>&, AdamState<float>&, double,
                          const AdamHyper&);
template void adam_update(ParameterSet<double>&, const ParameterSet<double>&, AdamState<double>&, double,
                          const AdamHyper&);

namespace {

AdamHyper hyper_of(const TrainConfig& c) { return {c.adam_beta1, c.adam_beta2, c.adam_epsilon}; }

std::mt19937_64 epoch_rng(std::uint64_t seed, int epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x7261696eU};
  return std::mt19937_64(seq);
}

std::vector<Eigen::Index> draw_indices(std::mt19937_64& rng, Eigen::Index pool, int count) {
  std::uniform_int_distribution<Eigen::Index> pick(0, pool - 1);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
  for (auto& i : idx) i = pick(rng);
  return idx;
}

LifterBatch gather(const LifterBatch& pool, const std::vector<Eigen::Index>& idx) {
  return {pool.inputs(Eigen::all, idx), pool.visible(Eigen::all, idx)};
}

}  // namespace

TrainState init_train_state(const TrainConfig& config) {
  config.validate();
  TrainState s;
  s.config = config;
  // Distinct streams for the two networks.
  s.lifter = Lifter<float>(config.lifter).init_parameters(config.seed * 2 + 0);
  s.critic = Critic<float>(config.critic_arch()).init_parameters(config.seed * 2 + 1);
  s.lifter_opt = {s.lifter.zeros_like(), s.lifter.zeros_like(), 0};
  s.critic_opt = {s.critic.zeros_like(), s.critic.zeros_like(), 0};
  return s;
}

// ---------------------------------------------------------------------------
// Steps

Trainer::Trainer(TrainState state)
    : state_(std::move(state)), lifter_(state_.config.lifter), critic_(state_.config.critic_arch()) {
  lifter_.check(state_.lifter);
  critic_.check(state_.critic);
}

CriticStepResult Trainer::critic_step(const MatrixX<float>& real, const MatrixX<float>& fake, std::mt19937_64& rng,
                                      double lr) {
  if (real.rows() != fake.rows() || real.cols() != fake.cols() || real.cols() == 0)
    throw InputError("critic_step: real and fake batches must have equal non-zero shape");
  const auto batch = static_cast<float>(real.cols());
  std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
  Eigen::RowVectorXf eps(real.cols());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = uniform(rng);
  const MatrixX<float> interp =
      (real.array().rowwise() * eps.array() + fake.array().rowwise() * (1.0f - eps.array())).matrix();

  const auto& p = state_.critic;
  ParameterSet<float> grads = p.zeros_like();
  typename Critic<float>::Tape tape_fake, tape_real;
  const MatrixX<float> c_fake = critic_.forward(p, fake, &tape_fake);
  critic_.backward(p, tape_fake, MatrixX<float>::Constant(1, fake.cols(), 1.0f / batch), &grads);
  const MatrixX<float> c_real = critic_.forward(p, real, &tape_real);
  critic_.backward(p, tape_real, MatrixX<float>::Constant(1, real.cols(), -1.0f / batch), &grads);
  const auto penalty = critic_.gradient_penalty(p, interp, static_cast<float>(state_.config.gp_weight), &grads);

  CriticStepResult r;
  r.w_loss = static_cast<double>(c_real.mean()) - static_cast<double>(c_fake.mean());
  r.gp = static_cast<double>(penalty.value);
  r.loss = -r.w_loss + r.gp;
  if (!std::isfinite(r.loss) || !grads.all_finite())
    throw NumericalError("non-finite critic loss at step " + std::to_string(state_.step) +
                         " (w_loss=" + std::to_string(r.w_loss) + ", gp=" + std::to_string(r.gp) + ")");
  adam_update(state_.critic, grads, state_.critic_opt, lr, hyper_of(state_.config));
  return r;
}

LifterStepResult Trainer::lifter_step(const LifterBatch& batch, double lr) {
  const int n = state_.config.lifter.joints;
  const Eigen::Index count = batch.inputs.cols();
  if (batch.inputs.rows() != 2 * n || batch.visible.rows() != n || batch.visible.cols() != count || count == 0)
    throw InputError("lifter_step: batch shape does not match the lifter");
  const auto& w = state_.config.loss_weights;
  const double inv_b = 1.0 / static_cast<double>(count);

  typename Lifter<float>::Tape tape;
  const auto out = lifter_.forward(state_.lifter, batch.inputs, &tape);

  LifterStepResult r;
  MatrixX<float> d_poses;
  if (w.adv > 0.0) {
    typename Critic<float>::Tape ctape;
    const MatrixX<float> scores = critic_.forward(state_.critic, out.poses, &ctape);
    r.adv = -static_cast<double>(scores.mean());
    d_poses = critic_.backward(state_.critic, ctape,
                               MatrixX<float>::Constant(1, count, static_cast<float>(-w.adv * inv_b)), nullptr);
  } else {
    d_poses = MatrixX<float>::Zero(out.poses.rows(), count);
  }
  MatrixX<float> d_cams = MatrixX<float>::Zero(6, count);

  const auto rep_scale = static_cast<float>(w.rep * inv_b);
  const auto cam_scale = static_cast<float>(w.cam * inv_b);
  for (Eigen::Index s = 0; s < count; ++s) {
    const auto pose = out.poses.col(s).reshaped(3, n);
    const auto observed = batch.inputs.col(s).reshaped(2, n);
    const VisibilityMask visible = batch.visible.col(s).transpose();
    const Camera<float> cam =
        camera_from_vector<float>(std::span<const float>(out.cameras.col(s).data(), 6));
    const auto rg = reprojection_loss_grad(observed, visible, pose, cam);
    const auto cg = camera_loss_grad(cam);
    r.rep += static_cast<double>(rg.value);
    r.cam += static_cast<double>(cg.value);
    d_poses.col(s).reshaped(3, n) += rep_scale * rg.d_pose;
    const Camera<float> d_cam = rep_scale * rg.d_camera + cam_scale * cg.d_camera;
    for (int row = 0; row < 2; ++row)
      for (int col = 0; col < 3; ++col) d_cams(3 * row + col, s) = d_cam(row, col);
  }
  r.rep *= inv_b;
  r.cam *= inv_b;
  r.loss = w.adv * r.adv + w.rep * r.rep + w.cam * r.cam;

  ParameterSet<float> grads = state_.lifter.zeros_like();
  lifter_.backward(state_.lifter, tape, d_poses, d_cams, grads);
  if (!std::isfinite(r.loss) || !grads.all_finite())
    throw NumericalError("non-finite lifter loss at step " + std::to_string(state_.step) +
                         " (adv=" + std::to_string(r.adv) + ", rep=" + std::to_string(r.rep) +
                         ", cam=" + std::to_string(r.cam) + ")");
  adam_update(state_.lifter, grads, state_.lifter_opt, lr, hyper_of(state_.config));
  return r;
}

// ---------------------------------------------------------------------------
// Pools

TrainPools make_train_pools(const PoseDataset& train, const TrainConfig& config) {
  const int n = config.lifter.joints;
  if (train.joints != n)
    throw InputError("dataset has " + std::to_string(train.joints) + " joints, model expects " + std::to_string(n));
  if (!train.normalized2d) throw InputError("training 2D pool must be normalised");
  if (!train.aligned3d) throw InputError("training 3D pool must be template-aligned");
  if (train.poses2d.empty() || train.poses3d.empty()) throw InputError("training pools must be non-empty");

  TrainPools pools;
  const auto n2 = static_cast<Eigen::Index>(train.poses2d.size());
  pools.pool2d.inputs.resize(2 * n, n2);
  pools.pool2d.visible.resize(n, n2);
  for (Eigen::Index i = 0; i < n2; ++i) {
    const Pose2D& p = train.poses2d[static_cast<std::size_t>(i)];
    if (p.joints() != n) throw InputError("2D pose " + std::to_string(i) + " has the wrong joint count");
    pools.pool2d.inputs.col(i) = lifter_input<float>(p);
    pools.pool2d.visible.col(i) = p.visible.transpose();
  }
  const auto n3 = static_cast<Eigen::Index>(train.poses3d.size());
  pools.pool3d.resize(3 * n, n3);
  for (Eigen::Index i = 0; i < n3; ++i) {
    const Pose3D& p = train.poses3d[static_cast<std::size_t>(i)];
    if (p.cols() != n) throw InputError("3D pose " + std::to_string(i) + " has the wrong joint count");
    const Pose3D scaled = root_centered(p, config.lifter.root_index) / config.lifter.pose_unit_mm;
    pools.pool3d.col(i) = scaled.reshaped().cast<float>();
  }
  if (!pools.pool2d.inputs.allFinite() || !pools.pool3d.allFinite())
    throw InputError("training pools contain non-finite values");
  return pools;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

nlohmann::json metrics_to_json(const EpochMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"epoch", m.epoch},       {"step", m.step},         {"lr", m.lr},
          {"w_loss", m.w_loss},     {"rep_loss", m.rep_loss}, {"cam_loss", m.cam_loss},
          {"adv_loss", m.adv_loss}, {"gp", m.gp},             {"eval_mpjpe_p1", opt(m.eval_mpjpe_p1)},
          {"eval_mpjpe_p2", opt(m.eval_mpjpe_p2)}};
}

EpochMetrics metrics_from_json(const nlohmann::json& j) {
  EpochMetrics m;
  m.epoch = j.at("epoch").get<int>();
  m.step = j.at("step").get<std::int64_t>();
  m.lr = j.at("lr").get<double>();
  m.w_loss = j.at("w_loss").get<double>();
  m.rep_loss = j.at("rep_loss").get<double>();
  m.cam_loss = j.at("cam_loss").get<double>();
  m.adv_loss = j.value("adv_loss", 0.0);
  m.gp = j.at("gp").get<double>();
  if (!j.at("eval_mpjpe_p1").is_null()) m.eval_mpjpe_p1 = j.at("eval_mpjpe_p1").get<double>();
  if (!j.at("eval_mpjpe_p2").is_null()) m.eval_mpjpe_p2 = j.at("eval_mpjpe_p2").get<double>();
  return m;
}

fs::path tensors_path_for(const fs::path& manifest) {
  fs::path p = manifest;
  p.replace_extension(".tensors");
  return p;
}

}  // namespace

std::string save_checkpoint(const TrainState& state, const fs::path& manifest_path) {
  ParameterSet<float> all;
  put_prefixed(all, state.lifter, "lifter/");
  put_prefixed(all, state.critic, "critic/");
  put_prefixed(all, state.lifter_opt.m, "opt.lifter.m/");
  put_prefixed(all, state.lifter_opt.v, "opt.lifter.v/");
  put_prefixed(all, state.critic_opt.m, "opt.critic.m/");
  put_prefixed(all, state.critic_opt.v, "opt.critic.v/");
  const fs::path tensors = tensors_path_for(manifest_path);
  write_tensor_archive(tensors, all);
  const std::string digest = sha256_file(tensors);

  nlohmann::json history = nlohmann::json::array();
  for (const auto& m : state.history) history.push_back(metrics_to_json(m));
  nlohmann::json j{{"format", "replift-checkpoint"},
                   {"version", 1},
                   {"tensors", tensors.filename().string()},
                   {"tensors_sha256", digest},
                   {"config", state.config},
                   {"epoch", state.epoch},
                   {"step", state.step},
                   {"lifter_opt_step", state.lifter_opt.step},
                   {"critic_opt_step", state.critic_opt.step},
                   {"rng", "mt19937_64 seeded per epoch from (seed, epoch)"},
                   {"history", history}};
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + manifest_path.string());
  out << j.dump(2) << '\n';
  return digest;
}

TrainState load_checkpoint(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open checkpoint manifest", manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid checkpoint manifest: ") + e.what(), manifest_path.string());
  }
  if (j.value("format", "") != "replift-checkpoint") throw ParseError("not a checkpoint manifest", manifest_path.string());
  const fs::path tensors = manifest_path.parent_path() / j.at("tensors").get<std::string>();
  if (sha256_file(tensors) != j.at("tensors_sha256").get<std::string>())
    throw ParseError("tensor archive digest mismatch", tensors.string());
  const ParameterSet<float> all = read_tensor_archive(tensors);

  TrainState s;
  s.config = j.at("config").get<TrainConfig>();
  s.lifter = take_prefixed(all, "lifter/");
  s.critic = take_prefixed(all, "critic/");
  s.lifter_opt = {take_prefixed(all, "opt.lifter.m/"), take_prefixed(all, "opt.lifter.v/"),
                  j.at("lifter_opt_step").get<std::int64_t>()};
  s.critic_opt = {take_prefixed(all, "opt.critic.m/"), take_prefixed(all, "opt.critic.v/"),
                  j.at("critic_opt_step").get<std::int64_t>()};
  s.epoch = j.at("epoch").get<int>();
  s.step = j.at("step").get<std::int64_t>();
  for (const auto& m : j.at("history")) s.history.push_back(metrics_from_json(m));
  Lifter<float>(s.config.lifter).check(s.lifter);
  Critic<float>(s.config.critic_arch()).check(s.critic);
  return s;
}

// ---------------------------------------------------------------------------
// Metrics log

std::string metrics_row(const EpochMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::ostringstream row;
  row << m.epoch << ',' << m.step << ',' << format_double(m.lr) << ',' << format_double(m.w_loss) << ','
      << format_double(m.rep_loss) << ',' << format_double(m.cam_loss) << ',' << format_double(m.gp) << ','
      << opt(m.eval_mpjpe_p1) << ',' << opt(m.eval_mpjpe_p2);
  return row.str();
}

std::vector<EpochMetrics> read_metrics_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open metrics log", path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMetricsHeader) throw ParseError("unexpected metrics header", path.string(), 1);
  std::vector<EpochMetrics> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw ParseError("expected 9 fields", path.string(), line_no);
    EpochMetrics m;
    m.epoch = std::stoi(f[0]);
    m.step = std::stoll(f[1]);
    m.lr = std::stod(f[2]);
    m.w_loss = std::stod(f[3]);
    m.rep_loss = std::stod(f[4]);
    m.cam_loss = std::stod(f[5]);
    m.gp = std::stod(f[6]);
    if (!f[7].empty()) m.eval_mpjpe_p1 = std::stod(f[7]);
    if (!f[8].empty()) m.eval_mpjpe_p2 = std::stod(f[8]);
    out.push_back(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loop

namespace {

std::string epoch_stem(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04d", epoch);
  return buf;
}

void rewrite_metrics(const fs::path& path, const std::vector<EpochMetrics>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kMetricsHeader << '\n';
  for (const auto& m : history) out << metrics_row(m) << '\n';
}

void remove_checkpoint(const fs::path& manifest) {
  std::error_code ec;
  fs::remove(tensors_path_for(manifest), ec);
  fs::remove(manifest, ec);
}

}  // namespace

TrainResult train(TrainState state, const PoseDataset& train_set, const TrainOptions& options) {
  const TrainConfig config = state.config;
  config.validate();
  const TrainPools pools = make_train_pools(train_set, config);
  if (options.eval_set && options.eval_set->joints != config.lifter.joints)
    throw InputError("evaluation split does not match the model joint count");
  const SkeletonSpec skeleton = options.skeleton ? *options.skeleton : default_skeleton();
  if (skeleton.joints() != config.lifter.joints) throw InputError("skeleton does not match the model joint count");

  Trainer trainer(std::move(state));
  TrainResult result;
  const bool write_files = !options.out_dir.empty();
  const fs::path ckpt_dir = options.out_dir / "checkpoints";
  const fs::path metrics_path = options.out_dir / "metrics.csv";
  if (write_files) {
    fs::create_directories(ckpt_dir);
    // The log is rebuilt from the stored history so a resumed run ends with
    // exactly the rows of an uninterrupted one.
    rewrite_metrics(metrics_path, trainer.state().history);
  }

  auto snapshot_on_failure = [&](const NumericalError&) {
    if (!write_files) return;
    try {
      save_checkpoint(trainer.state(), ckpt_dir / "nan_snapshot.json");
    } catch (...) {
    }
  };

  const Eigen::Index n2 = pools.pool2d.inputs.cols();
  const Eigen::Index n3 = pools.pool3d.cols();
  const int batch = static_cast<int>(std::min<Eigen::Index>(config.batch_size, n2));
  const Eigen::Index steps_per_epoch = n2 / batch;
  fs::path last_periodic;

  bool interrupted = false;
  while (trainer.state().epoch < config.epochs) {
    if (options.stop_after_epoch && trainer.state().epoch >= *options.stop_after_epoch) {
      interrupted = true;
      break;
    }
    TrainState& st = trainer.state();
    const int epoch = st.epoch;
    const double lr = config.lr_at(epoch);
    std::mt19937_64 rng = epoch_rng(config.seed, epoch);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n2));
    for (Eigen::Index i = 0; i < n2; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.lr = lr;
    std::int64_t critic_steps = 0;
    try {
      for (Eigen::Index b = 0; b < steps_per_epoch; ++b) {
        for (int c = 0; c < config.critic_iters; ++c) {
          const auto fake_idx = draw_indices(rng, n2, batch);
          const auto real_idx = draw_indices(rng, n3, batch);
          const MatrixX<float> fake =
              trainer.lifter().forward(st.lifter, pools.pool2d.inputs(Eigen::all, fake_idx)).poses;
          const MatrixX<float> real = pools.pool3d(Eigen::all, real_idx);
          const auto cr = trainer.critic_step(real, fake, rng, lr);
          m.w_loss += cr.w_loss;
          m.gp += cr.gp;
          ++critic_steps;
        }
        const std::vector<Eigen::Index> idx(order.begin() + b * batch, order.begin() + (b + 1) * batch);
        const auto lr_res = trainer.lifter_step(gather(pools.pool2d, idx), lr);
        m.rep_loss += lr_res.rep;
        m.cam_loss += lr_res.cam;
        m.adv_loss += lr_res.adv;
        ++st.step;
      }
    } catch (const NumericalError& e) {
      snapshot_on_failure(e);
      throw;
    }
    if (critic_steps > 0) {
      m.w_loss /= static_cast<double>(critic_steps);
      m.gp /= static_cast<double>(critic_steps);
    }
    if (steps_per_epoch > 0) {
      const auto s = static_cast<double>(steps_per_epoch);
      m.rep_loss /= s;
      m.cam_loss /= s;
      m.adv_loss /= s;
    }
    m.step = st.step;
    for (double v : {m.w_loss, m.gp, m.rep_loss, m.cam_loss, m.adv_loss}) {
      if (!std::isfinite(v)) {
        NumericalError err("non-finite epoch loss at epoch " + std::to_string(m.epoch));
        snapshot_on_failure(err);
        throw err;
      }
    }
    if (options.eval_set) {
      // Evaluation works on a snapshot, never on the live parameters.
      const ParameterSet<float> snapshot = st.lifter;
      const EvalReport report = evaluate(trainer.lifter(), snapshot, *options.eval_set, skeleton);
      m.eval_mpjpe_p1 = report.mpjpe_p1;
      m.eval_mpjpe_p2 = report.mpjpe_p2;
    }
    st.epoch = epoch + 1;
    st.history.push_back(m);
    if (write_files) {
      std::ofstream log(metrics_path, std::ios::app);
      log << metrics_row(m) << '\n';
      if (config.checkpoint_every > 0 && st.epoch % config.checkpoint_every == 0) {
        const fs::path p = ckpt_dir / (epoch_stem(st.epoch) + ".json");
        save_checkpoint(st, p);
        if (!config.keep_all_checkpoints && !last_periodic.empty() && last_periodic != p) remove_checkpoint(last_periodic);
        last_periodic = p;
      }
    }
    if (options.on_epoch) options.on_epoch(m);
  }

  if (write_files && !interrupted) {
    result.final_checkpoint = ckpt_dir / "final.json";
    save_checkpoint(trainer.state(), result.final_checkpoint);
  }
  result.state = std::move(trainer.state());
  return result;
}

TrainResult train(const TrainConfig& config, const PoseDataset& train_set, const TrainOptions& options) {
  return train(init_train_state(config), train_set, options);
}

}  // namespace replift
