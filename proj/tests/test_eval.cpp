#include "doctest.h"
#include "test_support.hpp"

#include <algorithm>

#include "replift/camera.hpp"
#include "replift/eval.hpp"

using namespace replift;

namespace {

double mpjpe_loop(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    double sq = 0.0;
    for (int r = 0; r < 3; ++r) sq += (a(r, j) - b(r, j)) * (a(r, j) - b(r, j));
    sum += std::sqrt(sq);
  }
  return sum / static_cast<double>(a.cols());
}

double pck_loop(const std::vector<Pose3D>& est, const std::vector<Pose3D>& gt, double thr) {
  std::size_t hit = 0, total = 0;
  for (std::size_t i = 0; i < est.size(); ++i)
    for (Eigen::Index j = 0; j < est[i].cols(); ++j) {
      ++total;
      if ((est[i].col(j) - gt[i].col(j)).norm() <= thr) ++hit;
    }
  return 100.0 * static_cast<double>(hit) / static_cast<double>(total);
}

double symmetry_loop(const Pose3D& p, const SkeletonSpec& s) {
  double total = 0.0;
  for (const auto& [l, r] : s.left_right_pairs) {
    const Bone bl = s.bones[static_cast<std::size_t>(l)];
    const Bone br = s.bones[static_cast<std::size_t>(r)];
    double ll = 0.0, lr = 0.0;
    for (int k = 0; k < 3; ++k) {
      ll += std::pow(p(k, bl.first) - p(k, bl.second), 2);
      lr += std::pow(p(k, br.first) - p(k, br.second), 2);
    }
    total += std::abs(std::sqrt(ll) - std::sqrt(lr));
  }
  return total;
}

PoseDataset paired_set(std::mt19937_64& rng, std::size_t count) {
  PoseDataset d;
  d.joints = 17;
  for (std::size_t i = 0; i < count; ++i) {
    d.poses3d.push_back(root_centered(testing::random_pose(rng), 0));
    d.cameras.push_back(testing::ideal_camera(rng, 0.1, 0.2));
    d.poses2d.push_back(Pose2D(reproject(d.poses3d.back(), d.cameras.back())));
  }
  return d;
}

}  // namespace

TEST_CASE("metric oracles over random pose pairs") {
  std::mt19937_64 rng(1);
  const SkeletonSpec s = default_skeleton();
  std::vector<Pose3D> est, gt, aligned;
  std::vector<double> p2s;
  for (int i = 0; i < 1000; ++i) {
    est.push_back(testing::random_pose(rng));
    gt.push_back(testing::random_pose(rng));
    const double p1 = mpjpe(est.back(), gt.back(), Protocol::kI);
    CHECK(std::abs(p1 - mpjpe_loop(est.back(), gt.back())) <= 1e-9 * p1);
    const double p1r = mpjpe(est.back(), gt.back(), Protocol::kI, 0);
    CHECK(std::abs(p1r - mpjpe_loop(root_centered(est.back(), 0), root_centered(gt.back(), 0))) <= 1e-9 * p1r);
    const auto fit = procrustes_align(est.back(), gt.back());
    const double p2 = mpjpe(est.back(), gt.back(), Protocol::kII);
    CHECK(std::abs(p2 - mpjpe_loop(fit.aligned, gt.back())) <= 1e-9 * p2);
    CHECK(p2 <= p1);
    CHECK(p2 <= p1r);
    aligned.push_back(fit.aligned);
    p2s.push_back(p2);
    CHECK(std::abs(symmetry_error(est.back(), s) - symmetry_loop(est.back(), s)) <= 1e-9);
  }

  for (double thr : {0.0, 50.0, 150.0, 400.0}) CHECK(std::abs(pck3d(aligned, gt, thr) - pck_loop(aligned, gt, thr)) <= 1e-9);
  double auc_sum = 0.0;
  for (int k = 0; k <= 30; ++k) auc_sum += pck_loop(aligned, gt, 5.0 * k);
  CHECK(std::abs(auc(aligned, gt) - auc_sum / 31.0) <= 1e-9);

  std::vector<double> sorted = p2s;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::abs(median(p2s) - 0.5 * (sorted[499] + sorted[500])) <= 1e-12);
  sorted.pop_back();
  std::vector<double> odd = p2s;
  odd.erase(std::max_element(odd.begin(), odd.end()));
  CHECK(median(odd) == sorted[499]);
}

TEST_CASE("metric examples") {
  const Eigen::Matrix3Xd a = Eigen::Matrix3Xd::Zero(3, 2);
  Eigen::Matrix3Xd b(3, 2);
  b << 3, 0, 4, 0, 0, 10;
  CHECK(mpjpe(a, b, Protocol::kI) == 7.5);
  CHECK(pck3d({a}, {b}, 5.0) == 50.0);
  CHECK(pck3d({a}, {b}, 4.999) == 0.0);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), InputError);
  const ErrorStats st = error_stats({1.0, 3.0});
  CHECK(st.mean == 2.0);
  CHECK(st.std == 1.0);
  CHECK(st.max == 3.0);
  CHECK_THROWS_AS(mpjpe(a, Eigen::Matrix3Xd::Zero(3, 3), Protocol::kI), InputError);
}

TEST_CASE("linear fit") {
  CHECK(linear_fit_r2({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(1.0));
  const double r2 = linear_fit_r2({0, 1, 2, 3, 4}, {0, 1, 0, 1, 0});
  // Oracle from the explicit sums.
  const double xm = 2.0, ym = 0.4;
  double sxy = 0, sxx = 0, syy = 0;
  const double xs[] = {0, 1, 2, 3, 4}, ys[] = {0, 1, 0, 1, 0};
  for (int i = 0; i < 5; ++i) {
    sxy += (xs[i] - xm) * (ys[i] - ym);
    sxx += (xs[i] - xm) * (xs[i] - xm);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  CHECK(r2 == doctest::Approx(sxy * sxy / (sxx * syy)));
}

TEST_CASE("perfect estimates score zero") {
  std::mt19937_64 rng(2);
  PoseDataset d = paired_set(rng, 40);
  d.actions = {{"walk", 0, 10}, {"sit", 10, 40}};
  LiftedSet lifted{d.poses3d, d.cameras};
  const EvalReport r = evaluate_lifted(lifted, d, default_skeleton());
  CHECK(r.mpjpe_p1 <= 1e-9);
  CHECK(r.mpjpe_p2 <= 1e-9);
  CHECK(r.pck3d == 100.0);
  // Round-off errors miss only the zero threshold.
  CHECK(r.auc >= 100.0 * 30.0 / 31.0);
  REQUIRE(r.actions.size() == 2);
  CHECK(r.actions[0].name == "walk");
  CHECK(r.actions[0].frames == 10);
  CHECK(r.actions[1].frames == 30);
}

TEST_CASE("aggregation is a mean of action means") {
  std::mt19937_64 rng(3);
  PoseDataset d = paired_set(rng, 30);
  d.actions = {{"b", 0, 5}, {"a", 5, 30}};
  LiftedSet lifted;
  for (std::size_t i = 0; i < d.poses3d.size(); ++i) lifted.poses.push_back(root_centered(testing::random_pose(rng), 0));
  lifted.cameras = d.cameras;
  const EvalReport r = evaluate_lifted(lifted, d, default_skeleton());
  double b = 0, a = 0;
  for (std::size_t i = 0; i < 30; ++i) (i < 5 ? b : a) += r.frame_p2[i];
  CHECK(r.mpjpe_p2 == doctest::Approx(0.5 * (b / 5 + a / 25)));
  CHECK(r.actions[0].name == "b");
  CHECK(r.median_p2 == median(r.frame_p2));
  for (std::size_t i = 0; i < 30; ++i) CHECK(r.frame_p2[i] <= r.frame_p1[i]);
  CHECK(r.symmetry == error_stats(r.frame_symmetry));

  // Without segments every frame lands in one bucket.
  d.actions.clear();
  const EvalReport all = evaluate_lifted(lifted, d, default_skeleton());
  REQUIRE(all.actions.size() == 1);
  CHECK(all.actions[0].name == "all");
}

TEST_CASE("Protocol-I works in the camera frame") {
  std::mt19937_64 rng(4);
  PoseDataset d = paired_set(rng, 5);
  // Same camera-frame pose, expressed with a different world rotation.
  LiftedSet lifted;
  for (std::size_t i = 0; i < 5; ++i) {
    const Eigen::Matrix3d r = testing::random_rotation(rng);
    lifted.poses.push_back(r * d.poses3d[i]);
    lifted.cameras.push_back(d.cameras[i] * r.transpose());
  }
  const EvalReport rep = evaluate_lifted(lifted, d, default_skeleton());
  CHECK(rep.mpjpe_p1 <= 1e-9);
  // A depth flip in the camera frame is a real Protocol-I error.
  LiftedSet flipped = lifted;
  for (std::size_t i = 0; i < 5; ++i) {
    const Eigen::Matrix3d rc = camera_rotation(d.cameras[i]);
    Pose3D cam = rc * d.poses3d[i];
    cam.row(2) *= -1.0;
    flipped.poses[i] = rc.transpose() * cam;
    flipped.cameras[i] = d.cameras[i];
  }
  CHECK(evaluate_lifted(flipped, d, default_skeleton()).mpjpe_p1 > 10.0);
}

TEST_CASE("mean-pose baseline") {
  std::mt19937_64 rng(5);
  const PoseDataset d = paired_set(rng, 20);
  const Pose3D m = d.poses3d[3];
  double expected = 0;
  for (const Pose3D& gt : d.poses3d) expected += mpjpe(m, gt, Protocol::kII);
  CHECK(mean_pose_baseline(m, d) == doctest::Approx(expected / 20.0));
}

TEST_CASE("lifting a dataset and the noise sweep") {
  ExperimentConfig cfg;
  cfg.train_2d_count = 10;
  cfg.train_3d_count = 10;
  cfg.test_count = 24;
  const PoseDataset test = build_experiment(cfg).test;
  LifterArch arch;
  arch.width = 16;
  const Lifter<float> lifter(arch);
  const auto params = lifter.init_parameters(3);
  const SkeletonSpec s = default_skeleton();

  const LiftedSet lifted = lift_dataset(lifter, params, test);
  REQUIRE(lifted.poses.size() == 24);
  CHECK(lifted.poses[0].col(0).norm() <= 1e-6);

  const auto rows = noise_sweep(lifter, params, test, s, {0.0, 5.0}, 9);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].report == evaluate(lifter, params, test, s));
  CHECK(rows[1].report.noise_sigma == 5.0);
  CHECK(rows == noise_sweep(lifter, params, test, s, {0.0, 5.0}, 9));
  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("sigma,", 0) == 0);
  CHECK(sweep_table(rows).find("GT + N(0,5)") != std::string::npos);

  const EvalReport& r = rows[0].report;
  const std::string rc = report_csv(r);
  CHECK(rc.rfind("metric,", 0) == 0);
  CHECK(rc.find("mpjpe_p2") != std::string::npos);
  CHECK(!report_table(r).empty());
  CHECK(report_json(r).at("mpjpe_p2").get<double>() == r.mpjpe_p2);
  CHECK(summary_csv(r).find("median_p2") != std::string::npos);
}
