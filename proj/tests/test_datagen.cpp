#include "doctest.h"
#include "test_support.hpp"

#include "replift/camera.hpp"
#include "replift/datagen.hpp"

using namespace replift;

namespace {

SyntheticPoseConfig rest_config() {
  SyntheticPoseConfig c = default_synthetic_config();
  c.count = 1;
  for (auto& f : c.families)
    for (auto& r : f.ranges) r = {0.0, 0.0};
  c.body_yaw = {0.0, 0.0};
  c.camera_elevation = {0.0, 0.0};
  c.camera_azimuth = {0.0, 0.0};
  c.scale = {1.0, 1.0};
  return c;
}

// Two-pass statistics over the visible entries.
double visible_std(const Pose2D& p) {
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index j = 0; j < p.joints(); ++j)
    if (p.visible(j)) {
      sum += p.coords(0, j) + p.coords(1, j);
      count += 2;
    }
  const double mean = sum / count;
  double ss = 0.0;
  for (Eigen::Index j = 0; j < p.joints(); ++j)
    if (p.visible(j))
      for (int r = 0; r < 2; ++r) ss += (p.coords(r, j) - mean) * (p.coords(r, j) - mean);
  return std::sqrt(ss / count);
}

}  // namespace

TEST_CASE("config validation") {
  const SkeletonSpec s = default_skeleton();
  CHECK_NOTHROW(default_synthetic_config().validate(s));
  SyntheticPoseConfig c = default_synthetic_config();
  c.count = 0;
  CHECK_THROWS_AS(c.validate(s), InputError);
  c = default_synthetic_config();
  c.limb_lengths[3] = -1.0;
  CHECK_THROWS_AS(c.validate(s), InputError);
  c = default_synthetic_config();
  c.families[0].ranges[2] = {1.0, 0.5};
  CHECK_THROWS_AS(c.validate(s), InputError);
  c = default_synthetic_config();
  c.scale = {0.0, 1.0};
  CHECK_THROWS_AS(c.validate(s), InputError);
  c = default_synthetic_config();
  c.limb_lengths.pop_back();
  CHECK_THROWS_AS(generate_synthetic(c), InputError);
}

TEST_CASE("rest pose through the identity camera") {
  const PoseDataset d = generate_synthetic(rest_config());
  REQUIRE(d.poses3d.size() == 1);
  const Pose3D& x = d.poses3d[0];
  CHECK(d.poses2d[0].coords == x.topRows<2>());
  CHECK(!d.poses2d[0].visible(7));
  CHECK(d.poses2d[0].visible_count() == 16);
  CHECK(x.col(0).isZero(0.0));
  // Standing straight: ankles below knees below hips, head above neck.
  CHECK(x(1, 3) < x(1, 2));
  CHECK(x(1, 2) < x(1, 1));
  CHECK(x(1, 10) > x(1, 8));
  // Left side on +x.
  CHECK(x(0, 4) > 0.0);
  CHECK(x(0, 1) < 0.0);
}

TEST_CASE("generation is deterministic") {
  SyntheticPoseConfig c = default_synthetic_config();
  c.count = 200;
  const PoseDataset a = generate_synthetic(c);
  CHECK(a == generate_synthetic(c));
  c.seed += 1;
  CHECK(!(a == generate_synthetic(c)));
}

TEST_CASE("generated triples are exactly consistent") {
  SyntheticPoseConfig c = default_synthetic_config();
  c.count = 1000;
  const SkeletonSpec s = default_skeleton();
  const PoseDataset d = generate_synthetic(c, s);
  REQUIRE(d.poses2d.size() == 1000);
  REQUIRE(d.actions.size() == c.families.size());
  for (std::size_t i = 0; i < d.poses3d.size(); ++i) {
    CHECK(reprojection_loss(d.poses2d[i], d.poses3d[i], d.cameras[i]) <= 1e-9);
    CHECK(camera_loss(d.cameras[i]) <= 1e-9);
    const Eigen::Matrix3Xd b = bone_matrix(d.poses3d[i], bone_map(s));
    for (int k = 0; k < s.bone_count(); ++k)
      CHECK(std::abs(b.col(k).norm() - c.limb_lengths[static_cast<std::size_t>(k)]) <= 1e-9);
    CHECK(symmetry_error(d.poses3d[i], s) <= 1e-9);
    const double scale = camera_scale(d.cameras[i]);
    CHECK(scale >= c.scale.min - 1e-12);
    CHECK(scale <= c.scale.max + 1e-12);
  }
}

TEST_CASE("preprocess_3d") {
  const SkeletonSpec s = default_skeleton();
  SyntheticPoseConfig c = default_synthetic_config();
  c.count = 50;
  const PoseDataset d = generate_synthetic(c, s);
  const Pose3D tmpl = compute_template(d.poses3d, s);
  CHECK(tmpl.col(0).isZero(1e-9));

  CHECK((preprocess_3d(tmpl, tmpl, s) - tmpl).cwiseAbs().maxCoeff() <= 1e-9);

  const Eigen::Matrix3d ry = Eigen::AngleAxisd(-2.0, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Pose3D recovered = preprocess_3d(ry * tmpl, tmpl, s);
  for (int j : s.alignment_joints) CHECK((recovered.col(j) - tmpl.col(j)).norm() <= 1e-9);

  std::mt19937_64 rng(4);
  for (const Pose3D& p : d.poses3d) {
    const Pose3D base = preprocess_3d(p, tmpl, s);
    Pose3D moved = testing::random_rotation(rng) * p;
    moved.colwise() += Eigen::Vector3d(100, 200, -50);
    CHECK((preprocess_3d(moved, tmpl, s) - base).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("preprocess_2d") {
  SyntheticPoseConfig c = default_synthetic_config();
  c.count = 300;
  const PoseDataset d = generate_synthetic(c);
  for (const Pose2D& p : d.poses2d) {
    const Pose2D n = preprocess_2d(p);
    CHECK(std::abs(visible_std(n) - 1.0) <= 1e-9);
    CHECK(n.coords.col(0).isZero(0.0));
    CHECK(n.coords.col(7).isZero(0.0));
    CHECK((n.visible == p.visible).all());

    Pose2D scaled = p;
    scaled.coords *= 7.0;
    CHECK((preprocess_2d(scaled).coords - n.coords).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((preprocess_2d(n).coords - n.coords).cwiseAbs().maxCoeff() <= 1e-12);

    // Hidden coordinates have no influence.
    Pose2D junk = p;
    junk.coords.col(7) = Eigen::Vector2d(1e9, -1e9);
    CHECK(preprocess_2d(junk) == n);
  }

  // Two-pass oracle on the raw centred coordinates.
  const Pose2D& p = d.poses2d[17];
  Pose2D centred = p;
  for (Eigen::Index j = 0; j < p.joints(); ++j)
    centred.coords.col(j) = p.visible(j) ? Eigen::Vector2d(p.coords.col(j) - p.coords.col(0)) : Eigen::Vector2d::Zero();
  const double sd = visible_std(centred);
  CHECK((preprocess_2d(p).coords - centred.coords / sd).cwiseAbs().maxCoeff() <= 1e-12);

  Pose2D flat(Eigen::Matrix2Xd::Constant(2, 17, 3.0));
  CHECK_THROWS_AS(preprocess_2d(flat), DegenerateError);
  Pose2D lonely(Eigen::Matrix2Xd::Random(2, 17), VisibilityMask::Constant(17, false));
  lonely.visible(0) = true;
  CHECK_THROWS_AS(preprocess_2d(lonely), DegenerateError);
  Pose2D rootless = d.poses2d[0];
  rootless.visible(0) = false;
  CHECK_THROWS_AS(preprocess_2d(rootless), InputError);
}

TEST_CASE("add_noise") {
  SyntheticPoseConfig c = default_synthetic_config();
  c.count = 3125;  // 3125 poses x 16 visible joints x 2 = 1e5 perturbations
  const PoseDataset d = generate_synthetic(c);
  const PoseDataset same = add_noise(d, {0.0, 5});
  CHECK(same == d);

  const PoseDataset noisy = add_noise(d, {10.0, 5});
  CHECK(noisy.noise_sigma == 10.0);
  double ss = 0.0, sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.poses2d.size(); ++i) {
    const Eigen::Matrix2Xd diff = noisy.poses2d[i].coords - d.poses2d[i].coords;
    CHECK(diff.col(7).isZero(0.0));
    for (Eigen::Index j = 0; j < 17; ++j) {
      if (!d.poses2d[i].visible(j)) continue;
      for (int r = 0; r < 2; ++r) {
        sum += diff(r, j);
        ss += diff(r, j) * diff(r, j);
        ++n;
      }
    }
  }
  REQUIRE(n == 100000);
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt(ss / static_cast<double>(n) - mean * mean);
  CHECK(std::abs(sd - 10.0) <= 0.2);
  CHECK(noisy == add_noise(d, {10.0, 5}));
  CHECK(!(noisy == add_noise(d, {10.0, 6})));
  CHECK(noisy.poses3d == d.poses3d);

  PoseDataset normalized = d;
  normalized.normalized2d = true;
  CHECK_THROWS_AS(add_noise(normalized, {1.0, 1}), InputError);
  CHECK_THROWS_AS(add_noise(d, {-1.0, 1}), InputError);
}

TEST_CASE("experiment splits") {
  ExperimentConfig cfg;
  cfg.train_2d_count = 400;
  cfg.train_3d_count = 400;
  cfg.test_count = 200;
  const SkeletonSpec s = default_skeleton();
  const ExperimentData data = build_experiment(cfg, s);

  CHECK(data.train.pairing == Pairing::kUnpaired);
  CHECK(data.train.normalized2d);
  CHECK(data.train.aligned3d);
  CHECK(data.train.cameras.empty());
  REQUIRE(data.train.template_pose.has_value());
  CHECK(data.train.poses2d.size() == 400);
  CHECK(data.train.poses3d.size() == 400);
  CHECK(data.test.pairing == Pairing::kPaired);
  CHECK(!data.test.normalized2d);
  CHECK(data.test.poses2d.size() == 200);
  CHECK(data.test.cameras.size() == 200);

  // Every 2D sample stays normalised; every 3D sample is root-centred with
  // symmetric limbs.
  for (const Pose2D& p : data.train.poses2d) CHECK(std::abs(visible_std(p) - 1.0) <= 1e-9);
  for (const Pose3D& p : data.train.poses3d) {
    CHECK(p.col(0).norm() <= 1e-9);
    CHECK(symmetry_error(p, s) <= 1e-6);
  }

  // Test split stays exactly consistent.
  for (std::size_t i = 0; i < data.test.poses3d.size(); ++i)
    CHECK(reprojection_loss(data.test.poses2d[i], data.test.poses3d[i], data.test.cameras[i]) <= 1e-9);

  CHECK(build_experiment(cfg, s).train == data.train);
}

TEST_CASE("config json round trip") {
  ExperimentConfig cfg;
  cfg.seed = 42;
  cfg.base.families[1].ranges[3] = {-0.25, 0.75};
  const nlohmann::json j = cfg;
  const auto back = j.get<ExperimentConfig>();
  CHECK(back.seed == 42);
  CHECK(back.base == cfg.base);
  CHECK(nlohmann::json(back) == j);
  CHECK(nlohmann::json::parse("{}").get<ExperimentConfig>().base == default_synthetic_config());
}
