#include "replift/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "replift/errors.hpp"

namespace replift {

namespace fs = std::filesystem;

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
}

}  // namespace

void write_tensor_archive(const fs::path& path, const ParameterSet<float>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "#replift-tensors v1 count=" << tensors.size() << '\n';
  std::vector<std::uint32_t> buffer;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& t = tensors[i];
    out << tensors.name(i) << ' ' << t.rows() << ' ' << t.cols() << '\n';
    buffer.resize(static_cast<std::size_t>(t.size()));
    for (Eigen::Index k = 0; k < t.size(); ++k)
      buffer[static_cast<std::size_t>(k)] = to_little(std::bit_cast<std::uint32_t>(t.data()[k]));
    out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size() * 4));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ParameterSet<float> read_tensor_archive(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint", path.string());
  std::string line;
  std::getline(in, line);
  std::size_t count = 0;
  {
    std::istringstream hdr(line);
    std::string magic, version, field;
    hdr >> magic >> version >> field;
    if (magic != "#replift-tensors" || version != "v1" || field.rfind("count=", 0) != 0)
      throw ParseError("malformed tensor archive header", path.string(), 1);
    count = std::stoul(field.substr(6));
  }
  ParameterSet<float> out;
  std::vector<std::uint32_t> buffer;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw ParseError("truncated tensor archive", path.string());
    std::istringstream rec(line);
    std::string name;
    long rows = -1, cols = -1;
    rec >> name >> rows >> cols;
    if (name.empty() || rows < 0 || cols < 0) throw ParseError("malformed tensor record '" + line + "'", path.string());
    MatrixX<float> t(rows, cols);
    buffer.resize(static_cast<std::size_t>(t.size()));
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size() * 4));
    if (!in) throw ParseError("truncated data for tensor '" + name + "'", path.string());
    for (Eigen::Index k = 0; k < t.size(); ++k)
      t.data()[k] = std::bit_cast<float>(to_little(buffer[static_cast<std::size_t>(k)]));
    out.add(name, std::move(t));
  }
  return out;
}

ParameterSet<float> take_prefixed(const ParameterSet<float>& all, const std::string& prefix) {
  ParameterSet<float> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all.name(i).rfind(prefix, 0) == 0) out.add(all.name(i).substr(prefix.size()), all[i]);
  return out;
}

void put_prefixed(ParameterSet<float>& all, const ParameterSet<float>& part, const std::string& prefix) {
  for (std::size_t i = 0; i < part.size(); ++i) all.add(prefix + part.name(i), part[i]);
}

}  // namespace replift
