#pragma once

#include "mcrkit/matcore.hpp"

#include <string>
#include <vector>

namespace mcr {

// Static SVG documents; no external fonts or scripts.
std::string svg_line_plot(const Vector& x, const Matrix& y, const std::vector<std::string>& labels,
                          const std::string& title);
// values(i, j) drawn with i along the horizontal axis; NaN cells left blank.
std::string svg_heatmap(const Matrix& values, const std::string& title);

}  // namespace mcr
