#include "replift/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "replift/camera.hpp"
#include "replift/errors.hpp"
#include "replift/parallel.hpp"

namespace replift {

namespace {

void check_pairs(const std::vector<Pose3D>& estimates, const std::vector<Pose3D>& truths) {
  if (estimates.empty()) throw InputError("pck3d: no poses");
  if (estimates.size() != truths.size()) throw InputError("pck3d: estimate and truth counts differ");
  for (std::size_t i = 0; i < estimates.size(); ++i)
    if (estimates[i].cols() != truths[i].cols() || estimates[i].rows() != 3 || truths[i].rows() != 3)
      throw InputError("pck3d: joint counts differ at pose " + std::to_string(i));
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

double pck3d(const std::vector<Pose3D>& estimates, const std::vector<Pose3D>& truths, double threshold_mm) {
  check_pairs(estimates, truths);
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const Eigen::RowVectorXd d = (estimates[i] - truths[i]).colwise().norm();
    hits += static_cast<std::size_t>((d.array() <= threshold_mm).count());
    total += static_cast<std::size_t>(d.size());
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

double auc(const std::vector<Pose3D>& estimates, const std::vector<Pose3D>& truths) {
  check_pairs(estimates, truths);
  std::vector<double> dist;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const Eigen::RowVectorXd d = (estimates[i] - truths[i]).colwise().norm();
    dist.insert(dist.end(), d.data(), d.data() + d.size());
  }
  std::sort(dist.begin(), dist.end());
  const int steps = static_cast<int>(std::lround(kPckThresholdMm / kAucStepMm));
  double sum = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = kAucStepMm * k;
    const auto within = std::upper_bound(dist.begin(), dist.end(), t) - dist.begin();
    sum += 100.0 * static_cast<double>(within) / static_cast<double>(dist.size());
  }
  return sum / (steps + 1);
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

ErrorStats error_stats(const std::vector<double>& values) {
  ErrorStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  s.max = *std::max_element(values.begin(), values.end());
  return s;
}

// ---------------------------------------------------------------------------

LiftedSet lift_dataset(const Lifter<float>& lifter, const ParameterSet<float>& params, const PoseDataset& data) {
  const int n = lifter.arch().joints;
  if (!data.poses2d.empty() && data.joints != n)
    throw InputError("dataset has " + std::to_string(data.joints) + " joints, checkpoint expects " +
                     std::to_string(n));
  const std::size_t count = data.poses2d.size();
  MatrixX<float> inputs(2 * n, static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const Pose2D& raw = data.poses2d[i];
    if (raw.joints() != n) throw InputError("2D pose " + std::to_string(i) + " has the wrong joint count");
    const Pose2D norm = data.normalized2d ? raw : preprocess_2d(raw, lifter.arch().root_index);
    inputs.col(static_cast<Eigen::Index>(i)) = lifter_input<float>(norm);
  }

  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  LiftedSet out;
  out.poses.resize(count);
  out.cameras.resize(count);
  parallel_for(chunks, [&](std::size_t c) {
    const auto begin = static_cast<Eigen::Index>(c * kChunk);
    const auto len = static_cast<Eigen::Index>(std::min(kChunk, count - c * kChunk));
    const auto lifted = lift_batch(lifter, params, MatrixX<float>(inputs.middleCols(begin, len)));
    for (Eigen::Index k = 0; k < len; ++k) {
      out.poses[static_cast<std::size_t>(begin + k)] = lifted[static_cast<std::size_t>(k)].pose;
      out.cameras[static_cast<std::size_t>(begin + k)] = lifted[static_cast<std::size_t>(k)].camera;
    }
  });
  return out;
}

EvalReport evaluate_lifted(const LiftedSet& lifted, const PoseDataset& truth, const SkeletonSpec& spec) {
  const std::size_t count = truth.poses3d.size();
  if (count == 0) throw InputError("evaluation split has no 3D poses");
  if (lifted.poses.size() != count) throw InputError("estimate count does not match the evaluation split");
  const bool with_cameras = truth.cameras.size() == count && lifted.cameras.size() == count;
  const int root = spec.root_index;

  EvalReport r;
  r.frames = count;
  r.noise_sigma = truth.noise_sigma;
  r.frame_p1.resize(count);
  r.frame_p2.resize(count);
  r.frame_symmetry.resize(count);
  std::vector<Pose3D> aligned(count), truths(count);
  parallel_for(count, [&](std::size_t i) {
    const Pose3D& est = lifted.poses[i];
    const Pose3D& gt = truth.poses3d[i];
    if (est.cols() != gt.cols() || est.cols() != spec.joints())
      throw InputError("pose " + std::to_string(i) + " does not match the skeleton");
    if (with_cameras) {
      const Pose3D est_cam = camera_rotation(lifted.cameras[i]) * est;
      const Pose3D gt_cam = camera_rotation(truth.cameras[i]) * gt;
      r.frame_p1[i] = mpjpe(est_cam, gt_cam, Protocol::kI, root);
    } else {
      r.frame_p1[i] = mpjpe(est, gt, Protocol::kI, root);
    }
    const auto fit = procrustes_align(est, gt);
    aligned[i] = fit.aligned;
    truths[i] = gt;
    r.frame_p2[i] = (fit.aligned - gt).colwise().norm().mean();
    r.frame_symmetry[i] = symmetry_error(est, spec);
  });

  // Group frames by action name, in order of first appearance.
  std::vector<int> frame_action(count, -1);
  std::vector<std::string> names;
  auto name_index = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it != names.end()) return static_cast<int>(it - names.begin());
    names.push_back(name);
    return static_cast<int>(names.size()) - 1;
  };
  for (const auto& seg : truth.actions) {
    if (seg.begin > seg.end || seg.end > count) throw InputError("action segment '" + seg.name + "' out of range");
    const int a = name_index(seg.name);
    for (std::size_t i = seg.begin; i < seg.end; ++i) frame_action[i] = a;
  }
  for (std::size_t i = 0; i < count; ++i)
    if (frame_action[i] < 0) frame_action[i] = name_index(truth.actions.empty() ? "all" : "unassigned");

  r.actions.resize(names.size());
  for (std::size_t a = 0; a < names.size(); ++a) r.actions[a].name = names[a];
  for (std::size_t i = 0; i < count; ++i) {
    ActionRow& row = r.actions[static_cast<std::size_t>(frame_action[i])];
    ++row.frames;
    row.mpjpe_p1 += r.frame_p1[i];
    row.mpjpe_p2 += r.frame_p2[i];
  }
  for (ActionRow& row : r.actions) {
    row.mpjpe_p1 /= static_cast<double>(row.frames);
    row.mpjpe_p2 /= static_cast<double>(row.frames);
    r.mpjpe_p1 += row.mpjpe_p1;
    r.mpjpe_p2 += row.mpjpe_p2;
  }
  r.mpjpe_p1 /= static_cast<double>(r.actions.size());
  r.mpjpe_p2 /= static_cast<double>(r.actions.size());
  r.median_p2 = median(r.frame_p2);
  r.pck3d = pck3d(aligned, truths);
  r.auc = auc(aligned, truths);
  r.symmetry = error_stats(r.frame_symmetry);
  return r;
}

EvalReport evaluate(const Lifter<float>& lifter, const ParameterSet<float>& params, const PoseDataset& test,
                    const SkeletonSpec& spec) {
  if (test.pairing != Pairing::kPaired) throw InputError("evaluation needs a paired split");
  if (test.poses2d.size() != test.poses3d.size()) throw InputError("paired split has unequal 2D/3D counts");
  return evaluate_lifted(lift_dataset(lifter, params, test), test, spec);
}

std::vector<SweepRow> noise_sweep(const Lifter<float>& lifter, const ParameterSet<float>& params,
                                  const PoseDataset& test, const SkeletonSpec& spec,
                                  const std::vector<double>& sigmas, std::uint64_t noise_seed) {
  if (sigmas.empty()) throw InputError("noise sweep needs at least one sigma");
  std::vector<SweepRow> rows;
  for (double sigma : sigmas) {
    const PoseDataset noisy = add_noise(test, {sigma, noise_seed});
    rows.push_back({sigma, evaluate(lifter, params, noisy, spec)});
  }
  return rows;
}

double mean_pose_baseline(const Pose3D& mean_pose, const PoseDataset& test) {
  if (test.poses3d.empty()) throw InputError("baseline needs test poses");
  LiftedSet constant;
  constant.poses.assign(test.poses3d.size(), mean_pose);
  SkeletonSpec spec = default_skeleton();
  if (spec.joints() != mean_pose.cols()) throw InputError("baseline pose does not match the default skeleton");
  return evaluate_lifted(constant, test, spec).mpjpe_p2;
}

// ---------------------------------------------------------------------------
// Report files

std::string report_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "metric";
  for (const auto& a : r.actions) out << ',' << a.name;
  out << ",avg\n";
  out << "mpjpe_p1";
  for (const auto& a : r.actions) out << ',' << fixed(a.mpjpe_p1, 4);
  out << ',' << fixed(r.mpjpe_p1, 4) << '\n';
  out << "mpjpe_p2";
  for (const auto& a : r.actions) out << ',' << fixed(a.mpjpe_p2, 4);
  out << ',' << fixed(r.mpjpe_p2, 4) << '\n';
  out << "frames";
  for (const auto& a : r.actions) out << ',' << a.frames;
  out << ',' << r.frames << '\n';
  return out.str();
}

std::string summary_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "frames,mpjpe_p1,mpjpe_p2,median_p2,pck3d,auc,sym_mean,sym_std,sym_max,noise_sigma,checkpoint_id,dataset_id\n";
  out << r.frames << ',' << fixed(r.mpjpe_p1, 4) << ',' << fixed(r.mpjpe_p2, 4) << ',' << fixed(r.median_p2, 4)
      << ',' << fixed(r.pck3d, 4) << ',' << fixed(r.auc, 4) << ',' << fixed(r.symmetry.mean, 4) << ','
      << fixed(r.symmetry.std, 4) << ',' << fixed(r.symmetry.max, 4) << ',' << fixed(r.noise_sigma, 4) << ','
      << r.checkpoint_id << ',' << r.dataset_id << '\n';
  return out.str();
}

std::string report_table(const EvalReport& r) {
  std::ostringstream out;
  const int w = 10;
  auto cell = [&](const std::string& s) {
    std::string c = s.substr(0, w);
    return std::string(static_cast<std::size_t>(w - static_cast<int>(c.size())), ' ') + c;
  };
  out << "MPJPE (mm)   ";
  for (const auto& a : r.actions) out << cell(a.name);
  out << cell("Avg") << '\n';
  out << "Protocol-I   ";
  for (const auto& a : r.actions) out << cell(fixed(a.mpjpe_p1, 1));
  out << cell(fixed(r.mpjpe_p1, 1)) << '\n';
  out << "Protocol-II  ";
  for (const auto& a : r.actions) out << cell(fixed(a.mpjpe_p2, 1));
  out << cell(fixed(r.mpjpe_p2, 1)) << "\n\n";
  out << "             " << cell("MPJPE") << cell("median") << cell("PCK3D") << cell("AUC") << '\n';
  out << "Protocol-II  " << cell(fixed(r.mpjpe_p2, 1)) << cell(fixed(r.median_p2, 1)) << cell(fixed(r.pck3d, 1))
      << cell(fixed(r.auc, 1)) << "\n\n";
  out << "Symmetry (mm)" << cell("mean") << cell("std") << cell("max") << '\n';
  out << "             " << cell(fixed(r.symmetry.mean, 1)) << cell(fixed(r.symmetry.std, 1))
      << cell(fixed(r.symmetry.max, 1)) << "\n\n";
  out << "frames " << r.frames << ", noise sigma " << fixed(r.noise_sigma, 1) << " px";
  if (!r.checkpoint_id.empty()) out << ", checkpoint " << r.checkpoint_id.substr(0, 12);
  if (!r.dataset_id.empty()) out << ", dataset " << r.dataset_id.substr(0, 12);
  out << "\nProtocol-I compares camera-frame poses (estimate rotated by its estimated camera).\n";
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "sigma";
  if (!rows.empty())
    for (const auto& a : rows.front().report.actions) out << ',' << a.name;
  out << ",avg_p2,sym_mean,sym_std,sym_max\n";
  for (const auto& row : rows) {
    out << fixed(row.sigma, 2);
    for (const auto& a : row.report.actions) out << ',' << fixed(a.mpjpe_p2, 4);
    out << ',' << fixed(row.report.mpjpe_p2, 4) << ',' << fixed(row.report.symmetry.mean, 4) << ','
        << fixed(row.report.symmetry.std, 4) << ',' << fixed(row.report.symmetry.max, 4) << '\n';
  }
  return out.str();
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %10s %10s %10s %10s\n", "2D input", "Avg P-II", "sym mean", "sym std",
                "sym max");
  out << line;
  for (const auto& row : rows) {
    const std::string label = row.sigma == 0.0 ? "GT" : "GT + N(0," + fixed(row.sigma, 0) + ")";
    std::snprintf(line, sizeof line, "%-14s %10.1f %10.1f %10.1f %10.1f\n", label.c_str(), row.report.mpjpe_p2,
                  row.report.symmetry.mean, row.report.symmetry.std, row.report.symmetry.max);
    out << line;
  }
  return out.str();
}

nlohmann::json report_json(const EvalReport& r) {
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : r.actions)
    actions.push_back({{"name", a.name}, {"frames", a.frames}, {"mpjpe_p1", a.mpjpe_p1}, {"mpjpe_p2", a.mpjpe_p2}});
  return {{"frames", r.frames},
          {"mpjpe_p1", r.mpjpe_p1},
          {"mpjpe_p2", r.mpjpe_p2},
          {"median_p2", r.median_p2},
          {"pck3d", r.pck3d},
          {"auc", r.auc},
          {"symmetry", {{"mean", r.symmetry.mean}, {"std", r.symmetry.std}, {"max", r.symmetry.max}}},
          {"actions", actions},
          {"provenance",
           {{"checkpoint_id", r.checkpoint_id},
            {"dataset_id", r.dataset_id},
            {"noise_sigma", r.noise_sigma},
            {"protocol_i_frame", "camera frame: estimate rotated by its estimated camera, truth by the true camera"}}}};
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("linear fit needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("linear fit needs distinct x values");
  if (!(syy > 0.0)) return 1.0;
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = my + slope * (x[i] - mx);
    ss_res += (y[i] - pred) * (y[i] - pred);
  }
  return 1.0 - ss_res / syy;
}

}  // namespace replift
