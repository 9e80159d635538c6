#pragma once

#include <string>
#include <vector>

#include "replift/skeleton.hpp"
#include "replift/types.hpp"

// Static SVG figures.

namespace replift {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

/// Axes, ticks, one polyline per series and a legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

/// Front (x-y) and side (z-y) orthographic views of one pose, y up.
std::string skeleton_svg(const Pose3D& pose, const SkeletonSpec& spec, const std::string& title = {});

}  // namespace replift
