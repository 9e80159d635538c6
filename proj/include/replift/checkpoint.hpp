#pragma once

#include <filesystem>

#include "replift/nets.hpp"

namespace replift {

// Tensor archive layout:
//   #replift-tensors v1 count=<N>\n
//   then per tensor: "<name> <rows> <cols>\n" followed by rows*cols
//   little-endian IEEE float32 values in column-major order.

void write_tensor_archive(const std::filesystem::path& path, const ParameterSet<float>& tensors);
ParameterSet<float> read_tensor_archive(const std::filesystem::path& path);

/// Sub-collection whose names start with `prefix`, with the prefix removed.
ParameterSet<float> take_prefixed(const ParameterSet<float>& all, const std::string& prefix);
/// Appends every tensor of `part` as `prefix + name`.
void put_prefixed(ParameterSet<float>& all, const ParameterSet<float>& part, const std::string& prefix);

}  // namespace replift
