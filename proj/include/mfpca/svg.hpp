#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mfpca {

struct SvgSeries {
  std::string name;
  std::vector<double> y;
  bool dashed = false;
};

/// Static polyline chart with axes, min/max tick labels and a legend.
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::vector<double>& x,
                      const std::vector<SvgSeries>& series);

}  // namespace mfpca
