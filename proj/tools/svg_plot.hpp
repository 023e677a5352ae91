#pragma once

#include <string>
#include <vector>

namespace smodcli {

/// Series drawn against the left (primary) or right (secondary) y axis.
enum class YAxis { Left, Right };

struct Series {
  std::string label;
  std::string color;
  YAxis axis = YAxis::Left;
  std::vector<double> y;
  std::vector<double> band_lo;  // optional shaded band, same length as y
  std::vector<double> band_hi;
};

/// Line chart with a log10 x axis and independent left/right y axes.
/// Output is SVG 1.1 and depends only on the inputs.
struct LinePlot {
  std::string title;
  std::string x_label;
  std::string left_label;
  std::string right_label;
  std::vector<double> x;
  std::vector<Series> series;
  int width = 720;
  int height = 440;

  std::string render() const;
};

}  // namespace smodcli
