#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "replift/datagen.hpp"

namespace replift {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

const char* kind_name(RecordKind k) {
  switch (k) {
    case RecordKind::k2d: return "2d";
    case RecordKind::k3d: return "3d";
    case RecordKind::kCam: return "cam";
  }
  return "?";
}

struct Header {
  int joints = 0;
  RecordKind kind = RecordKind::k3d;
  bool normalized = false;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_header(std::ostream& out, int joints, RecordKind kind, bool normalized) {
  out << "#replift v1 joints=" << joints << " kind=" << kind_name(kind) << " normalized=" << (normalized ? 1 : 0)
      << '\n';
}

void write_values(std::ostream& out, const double* data, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) {
    if (i > 0) out << ',';
    out << format_double(data[i]);
  }
}

Header parse_header(const std::string& line, const fs::path& path) {
  std::istringstream in(line);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "#replift" || version != "v1") throw ParseError("malformed header", path.string(), 1);
  Header h;
  bool have_joints = false, have_kind = false;
  std::string field;
  while (in >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + field + "'", path.string(), 1);
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "joints") {
      const auto res = std::from_chars(value.data(), value.data() + value.size(), h.joints);
      if (res.ec != std::errc{} || res.ptr != value.data() + value.size() || h.joints < 0)
        throw ParseError("bad joint count '" + value + "'", path.string(), 1);
      have_joints = true;
    } else if (key == "kind") {
      if (value == "2d") h.kind = RecordKind::k2d;
      else if (value == "3d") h.kind = RecordKind::k3d;
      else if (value == "cam") h.kind = RecordKind::kCam;
      else throw ParseError("unknown kind '" + value + "'", path.string(), 1);
      have_kind = true;
    } else if (key == "normalized") {
      if (value != "0" && value != "1") throw ParseError("normalized must be 0 or 1", path.string(), 1);
      h.normalized = value == "1";
    }
  }
  if (!have_joints || !have_kind) throw ParseError("header lacks joints= or kind=", path.string(), 1);
  return h;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_value(std::string_view field, const fs::path& path, long line) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw ParseError("record " + std::to_string(line - 1) + ": not a number '" + std::string(field) + "'",
                     path.string(), line);
  if (!std::isfinite(v))
    throw ParseError("record " + std::to_string(line - 1) + ": non-finite value", path.string(), line);
  return v;
}

// Calls `record(fields, line_number)` for every data line.
template <typename Fn>
Header read_records(const fs::path& path, RecordKind expected, Fn&& record) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", path.string(), 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Header h = parse_header(line, path);
  if (h.kind != expected)
    throw ParseError(std::string("expected kind=") + kind_name(expected) + ", found kind=" + kind_name(h.kind),
                     path.string(), 1);
  long number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    record(split_fields(line), number, h);
  }
  return h;
}

void expect_fields(std::size_t got, std::size_t want, const fs::path& path, long line) {
  if (got != want)
    throw ParseError("record " + std::to_string(line - 1) + " has " + std::to_string(got) + " fields, expected " +
                         std::to_string(want),
                     path.string(), line);
}

}  // namespace

void write_pose2d_file(const fs::path& path, const std::vector<Pose2D>& poses, bool normalized) {
  auto out = open_out(path);
  const int joints = poses.empty() ? 0 : static_cast<int>(poses.front().joints());
  write_header(out, joints, RecordKind::k2d, normalized);
  for (const Pose2D& p : poses) {
    if (p.joints() != joints) throw InputError("2D poses have differing joint counts");
    if (joints > 63) throw InputError("visibility bitmask supports at most 63 joints");
    write_values(out, p.coords.data(), p.coords.size());
    std::uint64_t mask = 0;
    for (Eigen::Index j = 0; j < p.joints(); ++j)
      if (p.visible(j)) mask |= std::uint64_t{1} << j;
    out << ',' << mask << '\n';
  }
}

void write_pose3d_file(const fs::path& path, const std::vector<Pose3D>& poses, bool normalized) {
  auto out = open_out(path);
  const int joints = poses.empty() ? 0 : static_cast<int>(poses.front().cols());
  write_header(out, joints, RecordKind::k3d, normalized);
  for (const Pose3D& p : poses) {
    if (p.cols() != joints) throw InputError("3D poses have differing joint counts");
    write_values(out, p.data(), p.size());
    out << '\n';
  }
}

void write_camera_file(const fs::path& path, const std::vector<CameraMatrix>& cameras) {
  auto out = open_out(path);
  write_header(out, 1, RecordKind::kCam, false);
  for (const CameraMatrix& k : cameras) {
    const Eigen::Matrix<double, 2, 3, Eigen::RowMajor> row_major = k;
    write_values(out, row_major.data(), 6);
    out << '\n';
  }
}

std::vector<Pose2D> read_pose2d_file(const fs::path& path, bool* normalized) {
  std::vector<Pose2D> poses;
  const Header h = read_records(path, RecordKind::k2d, [&](const auto& fields, long line, const Header& hdr) {
    const auto n = static_cast<std::size_t>(hdr.joints);
    // The visibility field is optional for keypoint exports; absent means all visible.
    if (fields.size() != 2 * n) expect_fields(fields.size(), 2 * n + 1, path, line);
    Pose2D p(Eigen::Matrix2Xd(2, hdr.joints));
    for (std::size_t i = 0; i < 2 * n; ++i) p.coords.data()[i] = parse_value(fields[i], path, line);
    if (fields.size() == 2 * n + 1) {
      std::string_view f = fields.back();
      while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
      std::uint64_t mask = 0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), mask);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || (n < 64 && (mask >> n) != 0))
        throw ParseError("record " + std::to_string(line - 1) + ": bad visibility mask", path.string(), line);
      for (std::size_t j = 0; j < n; ++j) p.visible(static_cast<Eigen::Index>(j)) = ((mask >> j) & 1U) != 0;
    }
    poses.push_back(std::move(p));
  });
  if (normalized) *normalized = h.normalized;
  return poses;
}

std::vector<Pose3D> read_pose3d_file(const fs::path& path, bool* normalized) {
  std::vector<Pose3D> poses;
  const Header h = read_records(path, RecordKind::k3d, [&](const auto& fields, long line, const Header& hdr) {
    const auto count = 3 * static_cast<std::size_t>(hdr.joints);
    expect_fields(fields.size(), count, path, line);
    Pose3D p(3, hdr.joints);
    for (std::size_t i = 0; i < count; ++i) p.data()[i] = parse_value(fields[i], path, line);
    poses.push_back(std::move(p));
  });
  if (normalized) *normalized = h.normalized;
  return poses;
}

std::vector<CameraMatrix> read_camera_file(const fs::path& path) {
  std::vector<CameraMatrix> cams;
  read_records(path, RecordKind::kCam, [&](const auto& fields, long line, const Header&) {
    expect_fields(fields.size(), 6, path, line);
    Eigen::Matrix<double, 2, 3, Eigen::RowMajor> k;
    for (std::size_t i = 0; i < 6; ++i) k.data()[i] = parse_value(fields[i], path, line);
    cams.emplace_back(k);
  });
  return cams;
}

void save_dataset(const PoseDataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json files = nlohmann::json::object();
  if (!dataset.poses2d.empty()) {
    write_pose2d_file(dir / "poses2d.csv", dataset.poses2d, dataset.normalized2d);
    files["poses2d"] = "poses2d.csv";
  }
  if (!dataset.poses3d.empty()) {
    write_pose3d_file(dir / "poses3d.csv", dataset.poses3d, dataset.aligned3d);
    files["poses3d"] = "poses3d.csv";
  }
  if (!dataset.cameras.empty()) {
    write_camera_file(dir / "cameras.csv", dataset.cameras);
    files["cameras"] = "cameras.csv";
  }
  if (dataset.template_pose) {
    write_pose3d_file(dir / "template.csv", {*dataset.template_pose});
    files["template"] = "template.csv";
  }
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : dataset.actions) actions.push_back({{"name", a.name}, {"begin", a.begin}, {"end", a.end}});
  const nlohmann::json manifest{{"format", "replift-dataset"},
                                {"version", 1},
                                {"joints", dataset.joints},
                                {"pairing", dataset.pairing == Pairing::kPaired ? "paired" : "unpaired"},
                                {"normalized2d", dataset.normalized2d},
                                {"aligned3d", dataset.aligned3d},
                                {"noise_sigma", dataset.noise_sigma},
                                {"files", files},
                                {"actions", actions}};
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

PoseDataset load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("missing dataset manifest", manifest_path.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), manifest_path.string());
  }

  PoseDataset d;
  try {
    if (m.value("format", "") != "replift-dataset") throw ParseError("not a replift dataset manifest", manifest_path.string());
    d.joints = m.at("joints").get<int>();
    const std::string pairing = m.value("pairing", "paired");
    if (pairing != "paired" && pairing != "unpaired") throw ParseError("bad pairing '" + pairing + "'", manifest_path.string());
    d.pairing = pairing == "paired" ? Pairing::kPaired : Pairing::kUnpaired;
    d.noise_sigma = m.value("noise_sigma", 0.0);
    const auto& files = m.at("files");
    auto check_joints = [&](Eigen::Index got, const std::string& file) {
      if (got != d.joints)
        throw ParseError("file has " + std::to_string(got) + " joints, manifest says " + std::to_string(d.joints),
                         (dir / file).string());
    };
    if (files.contains("poses2d")) {
      const std::string f = files.at("poses2d").get<std::string>();
      d.poses2d = read_pose2d_file(dir / f, &d.normalized2d);
      for (const auto& p : d.poses2d) check_joints(p.joints(), f);
    }
    if (files.contains("poses3d")) {
      const std::string f = files.at("poses3d").get<std::string>();
      d.poses3d = read_pose3d_file(dir / f, &d.aligned3d);
      for (const auto& p : d.poses3d) check_joints(p.cols(), f);
    }
    if (files.contains("cameras")) d.cameras = read_camera_file(dir / files.at("cameras").get<std::string>());
    if (files.contains("template")) {
      const std::string f = files.at("template").get<std::string>();
      auto t = read_pose3d_file(dir / f);
      if (t.size() != 1) throw ParseError("template file must hold exactly one pose", (dir / f).string());
      check_joints(t.front().cols(), f);
      d.template_pose = t.front();
    }
    // The manifest is authoritative for preprocessing state.
    if (m.contains("normalized2d")) d.normalized2d = m.at("normalized2d").get<bool>();
    if (m.contains("aligned3d")) d.aligned3d = m.at("aligned3d").get<bool>();
    if (m.contains("masked_joints")) {
      for (int j : m.at("masked_joints").get<std::vector<int>>()) {
        if (j < 0 || j >= d.joints) throw ParseError("masked joint out of range", manifest_path.string());
        for (Pose2D& p : d.poses2d) p.visible(j) = false;
      }
    }
    for (const auto& a : m.value("actions", nlohmann::json::array()))
      d.actions.push_back({a.at("name").get<std::string>(), a.at("begin").get<std::size_t>(), a.at("end").get<std::size_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), manifest_path.string());
  }
  if (d.pairing == Pairing::kPaired) {
    if (!d.poses3d.empty() && !d.poses2d.empty() && d.poses3d.size() != d.poses2d.size())
      throw ParseError("paired dataset has differing 2D and 3D record counts", manifest_path.string());
    if (!d.cameras.empty() && d.cameras.size() != d.poses2d.size())
      throw ParseError("paired dataset has differing 2D and camera record counts", manifest_path.string());
  }
  return d;
}

}  // namespace replift
