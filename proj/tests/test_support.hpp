#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <unistd.h>

#include "replift/types.hpp"

namespace testing {

inline Eigen::Matrix3Xd random_pose(std::mt19937_64& rng, int joints = 17, double spread = 400.0) {
  std::normal_distribution<double> g(0.0, spread);
  Eigen::Matrix3Xd p(3, joints);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = g(rng);
  return p;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// s * (top two rows of a random rotation).
inline Eigen::Matrix<double, 2, 3> ideal_camera(std::mt19937_64& rng, double lo = 0.05, double hi = 5.0) {
  std::uniform_real_distribution<double> s(lo, hi);
  return s(rng) * random_rotation(rng).topRows<2>();
}

/// Central differences of a scalar function over every entry of `x`.
template <typename Mat>
Mat numeric_gradient(const std::function<double(const Mat&)>& f, Mat x, double h = 1e-5) {
  Mat grad = Mat::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = f(x);
    x.data()[i] = keep - h;
    const double down = f(x);
    x.data()[i] = keep;
    grad.data()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// ||a - b|| / max(||a||, ||b||), or 0 when both vanish.
template <typename A, typename B>
double relative_error(const A& a, const B& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "replift") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace testing
