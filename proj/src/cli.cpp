#include "replift/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "replift/datagen.hpp"
#include "replift/digest.hpp"
#include "replift/errors.hpp"
#include "replift/eval.hpp"
#include "replift/plot.hpp"
#include "replift/train.hpp"

namespace replift {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

nlohmann::json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), path.string());
  }
}

/// Records what a command consumed and produced.
struct Manifest {
  std::string command;
  std::string started = utc_now();
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  std::optional<std::uint64_t> seed;

  void add_input(const std::string& key, const fs::path& p) {
    inputs[key] = {{"path", p.string()}, {"sha256", fs::is_directory(p) ? directory_digest(p) : sha256_file(p)}};
  }
  void add_output(const std::string& key, const fs::path& p) {
    outputs[key] = {{"path", p.string()}, {"sha256", fs::is_directory(p) ? directory_digest(p) : sha256_file(p)}};
  }
  void write(const fs::path& dir) const {
    nlohmann::json j{{"command", command},
                     {"tool_version", kToolVersion},
                     {"config", config},
                     {"config_sha256", sha256_hex(config.dump())},
                     {"inputs", inputs},
                     {"outputs", outputs},
                     {"started", started},
                     {"finished", utc_now()}};
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    write_text(dir / "run_manifest.json", j.dump(2) + "\n");
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InputError("not a number in list: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty list '" + text + "'");
  return out;
}

/// Directory with train/ and test/ subsets, or a single dataset directory.
fs::path subset(const fs::path& dir, const std::string& name) {
  if (fs::exists(dir / name / "manifest.json")) return dir / name;
  if (fs::exists(dir / "manifest.json")) return dir;
  throw ParseError("no dataset found (expected manifest.json or " + name + "/manifest.json)", dir.string());
}

std::string checkpoint_id(const fs::path& manifest) {
  return read_json(manifest).value("tensors_sha256", "");
}

// ---------------------------------------------------------------------------

struct Context {
  fs::path workdir = ".";
  std::ostream& out;
  std::ostream& err;

  [[nodiscard]] fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : workdir / p; }
};

int cmd_gen(const Context& ctx, const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
  ExperimentConfig config;
  if (!config_path.empty()) {
    const nlohmann::json j = read_json(ctx.resolve(config_path));
    try {
      config = j.get<ExperimentConfig>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad experiment config: ") + e.what(), ctx.resolve(config_path).string());
    }
  }
  if (seed) config.seed = *seed;
  const SkeletonSpec spec = default_skeleton();
  config.validate(spec);
  const fs::path out = ctx.resolve(out_dir);
  fs::create_directories(out);

  const ExperimentData data = build_experiment(config, spec);
  save_dataset(data.train, out / "train");
  save_dataset(data.test, out / "test");

  Manifest m;
  m.command = "gen";
  m.config = config;
  m.seed = config.seed;
  if (!config_path.empty()) m.add_input("config", ctx.resolve(config_path));
  m.add_output("train", out / "train");
  m.add_output("test", out / "test");
  m.write(out);
  ctx.out << "wrote " << data.train.poses2d.size() << " 2D / " << data.train.poses3d.size() << " 3D training poses and "
          << data.test.poses3d.size() << " test poses to " << out.string() << '\n';
  return kExitOk;
}

struct TrainFlags {
  std::string config, data, out, resume;
  std::optional<double> lr, decay, gp_weight;
  std::optional<int> critic_iters, epochs, batch, width, checkpoint_every, stop_after;
  std::optional<std::uint64_t> seed;
  bool no_kcs = false;
  bool no_eval = false;
};

int cmd_train(const Context& ctx, const TrainFlags& f) {
  TrainState state;
  const fs::path out = ctx.resolve(f.out);
  if (!f.resume.empty()) {
    state = load_checkpoint(ctx.resolve(f.resume));
    if (f.epochs) state.config.epochs = *f.epochs;
    ctx.out << "resuming from epoch " << state.epoch << '\n';
  } else {
    TrainConfig config;
    if (!f.config.empty()) {
      const nlohmann::json j = read_json(ctx.resolve(f.config));
      try {
        config = j.get<TrainConfig>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad train config: ") + e.what(), ctx.resolve(f.config).string());
      }
    }
    if (f.lr) config.learning_rate = *f.lr;
    if (f.decay) config.decay = *f.decay;
    if (f.gp_weight) config.gp_weight = *f.gp_weight;
    if (f.critic_iters) config.critic_iters = *f.critic_iters;
    if (f.epochs) config.epochs = *f.epochs;
    if (f.batch) config.batch_size = *f.batch;
    if (f.width) config.lifter.width = *f.width;
    if (f.checkpoint_every) config.checkpoint_every = *f.checkpoint_every;
    if (f.seed) config.seed = *f.seed;
    if (f.no_kcs) config.kcs_enabled = false;
    state = init_train_state(config);
  }

  const fs::path data_dir = ctx.resolve(f.data);
  const fs::path train_dir = subset(data_dir, "train");
  PoseDataset pools = load_dataset(train_dir);
  const SkeletonSpec spec = default_skeleton();
  if (!pools.normalized2d || !pools.aligned3d) pools = prepare_training_pools(std::move(pools), spec);
  std::optional<PoseDataset> eval_set;
  if (!f.no_eval && fs::exists(data_dir / "test" / "manifest.json")) eval_set = load_dataset(data_dir / "test");

  fs::create_directories(out);
  write_text(out / "train_config.json", nlohmann::json(state.config).dump(2) + "\n");

  TrainOptions options;
  options.out_dir = out;
  options.skeleton = &spec;
  options.eval_set = eval_set ? &*eval_set : nullptr;
  options.stop_after_epoch = f.stop_after;
  options.on_epoch = [&](const EpochMetrics& m) {
    ctx.out << "epoch " << m.epoch << " step " << m.step << " lr " << m.lr << " w " << m.w_loss << " rep "
            << m.rep_loss << " cam " << m.cam_loss << " gp " << m.gp;
    if (m.eval_mpjpe_p2) ctx.out << " eval P-I " << *m.eval_mpjpe_p1 << " P-II " << *m.eval_mpjpe_p2;
    ctx.out << std::endl;
  };
  const TrainResult result = train(std::move(state), pools, options);

  Manifest m;
  m.command = "train";
  m.config = result.state.config;
  m.seed = result.state.config.seed;
  if (!f.config.empty()) m.add_input("config", ctx.resolve(f.config));
  if (!f.resume.empty()) m.add_input("resume", ctx.resolve(f.resume));
  m.add_input("train", train_dir);
  if (eval_set) m.add_input("test", data_dir / "test");
  m.add_output("metrics", out / "metrics.csv");
  if (!result.final_checkpoint.empty()) {
    m.add_output("checkpoint", result.final_checkpoint);
    m.add_output("checkpoint_tensors", fs::path(result.final_checkpoint).replace_extension(".tensors"));
    ctx.out << "final checkpoint " << result.final_checkpoint.string() << '\n';
  } else {
    ctx.out << "stopped after epoch " << result.state.epoch << '\n';
  }
  m.write(out);
  return kExitOk;
}

struct LoadedModel {
  TrainState state;
  std::string id;
};

LoadedModel load_model(const Context& ctx, const std::string& path) {
  const fs::path p = ctx.resolve(path);
  return {load_checkpoint(p), checkpoint_id(p)};
}

int cmd_eval(const Context& ctx, const std::string& ckpt, const std::string& data, const std::string& out_dir) {
  const LoadedModel model = load_model(ctx, ckpt);
  const fs::path test_dir = subset(ctx.resolve(data), "test");
  const PoseDataset test = load_dataset(test_dir);
  const SkeletonSpec spec = default_skeleton();
  const Lifter<float> lifter(model.state.config.lifter);
  EvalReport report = evaluate(lifter, model.state.lifter, test, spec);
  report.checkpoint_id = model.id;
  report.dataset_id = directory_digest(test_dir);

  const fs::path out = ctx.resolve(out_dir);
  fs::create_directories(out);
  write_text(out / "report.csv", report_csv(report));
  write_text(out / "summary.csv", summary_csv(report));
  write_text(out / "report.txt", report_table(report));
  write_text(out / "report.json", report_json(report).dump(2) + "\n");
  Manifest m;
  m.command = "eval";
  m.add_input("checkpoint", ctx.resolve(ckpt));
  m.add_input("test", test_dir);
  for (const char* f : {"report.csv", "summary.csv", "report.txt", "report.json"}) m.add_output(f, out / f);
  m.write(out);
  ctx.out << report_table(report);
  return kExitOk;
}

int cmd_sweep(const Context& ctx, const std::string& ckpt, const std::string& data, const std::string& out_dir,
              const std::string& sigmas_text, std::uint64_t noise_seed) {
  const std::vector<double> sigmas = parse_list(sigmas_text);
  const LoadedModel model = load_model(ctx, ckpt);
  const fs::path test_dir = subset(ctx.resolve(data), "test");
  const PoseDataset test = load_dataset(test_dir);
  const SkeletonSpec spec = default_skeleton();
  const Lifter<float> lifter(model.state.config.lifter);
  auto rows = noise_sweep(lifter, model.state.lifter, test, spec, sigmas, noise_seed);
  const std::string dataset_id = directory_digest(test_dir);
  for (auto& r : rows) {
    r.report.checkpoint_id = model.id;
    r.report.dataset_id = dataset_id;
  }
  const fs::path out = ctx.resolve(out_dir);
  fs::create_directories(out);
  write_text(out / "sweep.csv", sweep_csv(rows));
  write_text(out / "sweep.txt", sweep_table(rows));
  Manifest m;
  m.command = "sweep";
  m.config = {{"sigmas", sigmas}, {"noise_seed", noise_seed}};
  m.seed = noise_seed;
  m.add_input("checkpoint", ctx.resolve(ckpt));
  m.add_input("test", test_dir);
  m.add_output("sweep.csv", out / "sweep.csv");
  m.add_output("sweep.txt", out / "sweep.txt");
  m.write(out);
  ctx.out << sweep_table(rows);
  return kExitOk;
}

LatencyStats bench_lift(const Lifter<float>& lifter, const ParameterSet<float>& params, const MatrixX<float>& inputs,
                        int batch, std::size_t min_frames) {
  MatrixX<float> block(inputs.rows(), batch);
  for (int b = 0; b < batch; ++b) block.col(b) = inputs.col(b % inputs.cols());
  // Warm-up.
  for (int i = 0; i < 3; ++i) (void)lifter.forward(params, block);
  const std::size_t calls = (min_frames + static_cast<std::size_t>(batch) - 1) / static_cast<std::size_t>(batch);
  std::vector<double> per_frame(calls);
  volatile float sink = 0.0f;
  for (std::size_t c = 0; c < calls; ++c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = lifter.forward(params, block);
    const auto t1 = std::chrono::steady_clock::now();
    sink = sink + out.poses(0, 0);
    per_frame[c] = std::chrono::duration<double, std::milli>(t1 - t0).count() / batch;
  }
  LatencyStats s;
  s.batch = batch;
  s.frames = calls * static_cast<std::size_t>(batch);
  double sum = 0.0;
  for (double v : per_frame) sum += v;
  s.mean_ms = sum / static_cast<double>(calls);
  std::sort(per_frame.begin(), per_frame.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(calls))) - 1;
  s.p99_ms = per_frame[std::min(rank, calls - 1)];
  return s;
}

struct LiftFlags {
  std::string checkpoint, input, out, camera_out;
  bool bench = false;
  int bench_batch = 1;
  int bench_frames = 10000;
};

int cmd_lift(const Context& ctx, const LiftFlags& f) {
  const LoadedModel model = load_model(ctx, f.checkpoint);
  const Lifter<float> lifter(model.state.config.lifter);
  const int n = lifter.arch().joints;

  std::vector<Pose2D> poses;
  bool normalized = false;
  if (!f.input.empty()) {
    poses = read_pose2d_file(ctx.resolve(f.input), &normalized);
    for (std::size_t i = 0; i < poses.size(); ++i)
      if (poses[i].joints() != n)
        throw InputError("input pose " + std::to_string(i) + " has " + std::to_string(poses[i].joints()) +
                         " joints, checkpoint expects " + std::to_string(n));
  }

  if (!f.input.empty() && !f.out.empty()) {
    PoseDataset d;
    d.poses2d = poses;
    d.joints = n;
    d.normalized2d = normalized;
    const LiftedSet lifted = lift_dataset(lifter, model.state.lifter, d);
    const fs::path out = ctx.resolve(f.out);
    fs::path cam_out = f.camera_out.empty() ? fs::path(out).replace_extension(".cameras.csv") : ctx.resolve(f.camera_out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_pose3d_file(out, lifted.poses);
    write_camera_file(cam_out, lifted.cameras);
    Manifest m;
    m.command = "lift";
    m.add_input("checkpoint", ctx.resolve(f.checkpoint));
    m.add_input("keypoints", ctx.resolve(f.input));
    m.add_output("poses3d", out);
    m.add_output("cameras", cam_out);
    m.write(out.has_parent_path() ? out.parent_path() : fs::path("."));
    ctx.out << "lifted " << lifted.poses.size() << " frames to " << out.string() << '\n';
  }

  if (f.bench) {
    if (f.bench_batch <= 0) throw InputError("--bench-batch must be positive");
    MatrixX<float> inputs;
    if (!poses.empty()) {
      inputs.resize(2 * n, static_cast<Eigen::Index>(poses.size()));
      for (std::size_t i = 0; i < poses.size(); ++i)
        inputs.col(static_cast<Eigen::Index>(i)) =
            lifter_input<float>(normalized ? poses[i] : preprocess_2d(poses[i], lifter.arch().root_index));
    } else {
      std::mt19937_64 rng(12345);
      std::normal_distribution<float> g(0.0f, 1.0f);
      inputs.resize(2 * n, 64);
      for (Eigen::Index i = 0; i < inputs.size(); ++i) inputs.data()[i] = g(rng);
    }
    const LatencyStats s = bench_lift(lifter, model.state.lifter, inputs, f.bench_batch,
                                      static_cast<std::size_t>(std::max(f.bench_frames, 1)));
    ctx.out << std::fixed << std::setprecision(4) << "lift bench: batch " << s.batch << ", frames " << s.frames
            << ", mean " << s.mean_ms << " ms/frame, p99 " << s.p99_ms << " ms/frame" << std::defaultfloat << '\n';
  }
  return kExitOk;
}

struct PlotFlags {
  std::string pose, metrics, sweep, out;
  int max_frames = 16;
};

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double cell_value(const std::string& s, const fs::path& path, std::size_t line) {
  if (s.empty()) return NAN;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ParseError("not a number '" + s + "'", path.string(), static_cast<long>(line));
  }
}

int cmd_plot(const Context& ctx, const PlotFlags& f) {
  if (f.pose.empty() && f.metrics.empty() && f.sweep.empty())
    throw InputError("nothing to plot: give --pose, --metrics or --sweep");
  const fs::path out = ctx.resolve(f.out);
  fs::create_directories(out);
  Manifest m;
  m.command = "plot";
  std::size_t written = 0;

  if (!f.pose.empty()) {
    const fs::path p = ctx.resolve(f.pose);
    const auto poses = read_pose3d_file(p);
    const SkeletonSpec spec = default_skeleton();
    m.add_input("pose", p);
    const auto count = std::min<std::size_t>(poses.size(), static_cast<std::size_t>(std::max(f.max_frames, 0)));
    for (std::size_t i = 0; i < count; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "skeleton_%04zu.svg", i);
      write_text(out / name, skeleton_svg(poses[i], spec, "frame " + std::to_string(i)));
      m.add_output(name, out / name);
      ++written;
    }
  }
  if (!f.metrics.empty()) {
    const fs::path p = ctx.resolve(f.metrics);
    const auto rows = read_csv_rows(p);
    if (rows.empty() || rows.front().size() < 7) throw ParseError("not a metrics log", p.string(), 1);
    const auto& header = rows.front();
    std::vector<Series> losses, evals;
    for (std::size_t c = 3; c < header.size(); ++c) {
      Series s{header[c], {}, {}};
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) throw ParseError("ragged metrics row", p.string(), static_cast<long>(r + 1));
        s.x.push_back(cell_value(rows[r][0], p, r + 1));
        s.y.push_back(cell_value(rows[r][c], p, r + 1));
      }
      (header[c].rfind("eval_", 0) == 0 ? evals : losses).push_back(std::move(s));
    }
    m.add_input("metrics", p);
    write_text(out / "loss_curves.svg", line_chart_svg("Training losses", "epoch", "loss", losses));
    m.add_output("loss_curves.svg", out / "loss_curves.svg");
    ++written;
    const bool any_eval = std::any_of(evals.begin(), evals.end(), [](const Series& s) {
      return std::any_of(s.y.begin(), s.y.end(), [](double v) { return std::isfinite(v); });
    });
    if (any_eval) {
      write_text(out / "eval_curves.svg", line_chart_svg("Held-out MPJPE", "epoch", "mm", evals));
      m.add_output("eval_curves.svg", out / "eval_curves.svg");
      ++written;
    }
  }
  if (!f.sweep.empty()) {
    const fs::path p = ctx.resolve(f.sweep);
    const auto rows = read_csv_rows(p);
    if (rows.empty() || rows.front().empty() || rows.front().front() != "sigma")
      throw ParseError("not a noise-sweep table", p.string(), 1);
    const auto& header = rows.front();
    std::vector<Series> series;
    for (const char* col : {"avg_p2", "sym_mean"}) {
      const auto it = std::find(header.begin(), header.end(), col);
      if (it == header.end()) throw ParseError(std::string("missing column ") + col, p.string(), 1);
      const auto c = static_cast<std::size_t>(it - header.begin());
      Series s{std::string(col) == "avg_p2" ? "MPJPE P-II" : "symmetry mean", {}, {}};
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) throw ParseError("ragged sweep row", p.string(), static_cast<long>(r + 1));
        s.x.push_back(cell_value(rows[r][0], p, r + 1));
        s.y.push_back(cell_value(rows[r][c], p, r + 1));
      }
      series.push_back(std::move(s));
    }
    m.add_input("sweep", p);
    write_text(out / "noise_sweep.svg", line_chart_svg("Noise robustness", "sigma (px)", "mm", series));
    m.add_output("noise_sweep.svg", out / "noise_sweep.svg");
    ++written;
  }
  m.write(out);
  ctx.out << "wrote " << written << " figure(s) to " << out.string() << '\n';
  return kExitOk;
}

}  // namespace

std::string directory_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "run_manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) listing += fs::relative(f, dir).generic_string() + ":" + sha256_file(f) + "\n";
  return sha256_hex(listing);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly supervised 2D-to-3D human pose lifting", "replift"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::string workdir = ".";
  app.add_option("--workdir", workdir, "Root for relative paths");

  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("gen", "Generate the synthetic experiment datasets");
  gen->add_option("--config", gen_config, "Experiment config (JSON)");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Override the config seed");

  TrainFlags tf;
  auto* tr = app.add_subcommand("train", "Adversarial training");
  tr->add_option("--config", tf.config, "Train config (JSON)");
  tr->add_option("--data", tf.data, "Dataset directory (train/ and optional test/)")->required();
  tr->add_option("--out", tf.out, "Run directory")->required();
  tr->add_option("--resume", tf.resume, "Checkpoint manifest to continue from");
  tr->add_option("--lr", tf.lr, "Initial learning rate");
  tr->add_option("--decay", tf.decay, "Learning-rate factor applied every 10 epochs");
  tr->add_option("--critic-iters", tf.critic_iters, "Critic updates per lifter update");
  tr->add_option("--gp-weight", tf.gp_weight, "Gradient-penalty weight");
  tr->add_option("--epochs", tf.epochs, "Epochs");
  tr->add_option("--batch", tf.batch, "Batch size");
  tr->add_option("--seed", tf.seed, "Seed");
  tr->add_option("--width", tf.width, "Lifter hidden width");
  tr->add_option("--checkpoint-every", tf.checkpoint_every, "Periodic checkpoint cadence (epochs)");
  tr->add_option("--stop-after-epoch", tf.stop_after, "Stop early after this epoch, as if interrupted");
  tr->add_flag("--no-kcs", tf.no_kcs, "Disable the critic's KCS path");
  tr->add_flag("--no-eval", tf.no_eval, "Skip per-epoch evaluation");

  std::string ev_ckpt, ev_data, ev_out;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a paired split");
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint manifest")->required();
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--out", ev_out, "Report directory")->required();

  std::string sw_ckpt, sw_data, sw_out, sw_sigmas = "0,5,10,15,20";
  std::uint64_t sw_seed = 99;
  auto* sw = app.add_subcommand("sweep", "Noise-robustness sweep");
  sw->add_option("--checkpoint", sw_ckpt, "Checkpoint manifest")->required();
  sw->add_option("--data", sw_data, "Dataset directory")->required();
  sw->add_option("--out", sw_out, "Report directory")->required();
  sw->add_option("--sigmas", sw_sigmas, "Comma-separated pixel sigmas")->capture_default_str();
  sw->add_option("--noise-seed", sw_seed, "Noise seed")->capture_default_str();

  LiftFlags lf;
  auto* lift = app.add_subcommand("lift", "Lift a 2D keypoint file");
  lift->add_option("--checkpoint", lf.checkpoint, "Checkpoint manifest")->required();
  lift->add_option("--input", lf.input, "2D keypoint file");
  lift->add_option("--out", lf.out, "3D pose output file");
  lift->add_option("--camera-out", lf.camera_out, "Camera output file");
  lift->add_flag("--bench", lf.bench, "Report per-frame forward latency");
  lift->add_option("--bench-batch", lf.bench_batch, "Frames per forward call")->capture_default_str();
  lift->add_option("--bench-frames", lf.bench_frames, "Frames to time")->capture_default_str();

  PlotFlags pf;
  auto* plot = app.add_subcommand("plot", "Render SVG figures");
  plot->add_option("--pose", pf.pose, "3D pose file");
  plot->add_option("--metrics", pf.metrics, "Training metrics CSV");
  plot->add_option("--sweep", pf.sweep, "Noise-sweep CSV");
  plot->add_option("--out", pf.out, "Figure directory")->required();
  plot->add_option("--max-frames", pf.max_frames, "Skeleton images per pose file")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Context ctx{workdir, out, err};
  try {
    if (*gen) return cmd_gen(ctx, gen_config, gen_out, gen_seed);
    if (*tr) return cmd_train(ctx, tf);
    if (*ev) return cmd_eval(ctx, ev_ckpt, ev_data, ev_out);
    if (*sw) return cmd_sweep(ctx, sw_ckpt, sw_data, sw_out, sw_sigmas, sw_seed);
    if (*lift) {
      if (lf.input.empty() && !lf.bench) throw InputError("lift needs --input or --bench");
      if (!lf.input.empty() && lf.out.empty() && !lf.bench) throw InputError("lift needs --out");
      return cmd_lift(ctx, lf);
    }
    if (*plot) return cmd_plot(ctx, pf);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace replift
