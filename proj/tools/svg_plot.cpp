#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace smodcli {

namespace {

std::string num(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

// Five evenly spaced tick values.
std::vector<double> ticks(const Range& r) {
  std::vector<double> t;
  for (int i = 0; i <= 4; ++i) t.push_back(r.lo + (r.hi - r.lo) * i / 4.0);
  return t;
}

}  // namespace

std::string LinePlot::render() const {
  const double left = 80, right = width - 80.0, top = 50, bottom = height - 60.0;

  Range xr;
  for (double v : x) xr.add(std::log10(v));
  if (!(xr.lo <= xr.hi)) xr = {0.0, 1.0};
  if (xr.hi - xr.lo < 1e-12) xr.lo -= 0.5, xr.hi += 0.5;
  Range yl, yr;
  for (const auto& s : series) {
    Range& r = s.axis == YAxis::Left ? yl : yr;
    for (double v : s.y) r.add(v);
    for (double v : s.band_lo) r.add(v);
    for (double v : s.band_hi) r.add(v);
  }
  yl.finish();
  yr.finish();

  auto px = [&](double v) { return left + (std::log10(v) - xr.lo) / (xr.hi - xr.lo) * (right - left); };
  auto py = [&](double v, YAxis a) {
    const Range& r = a == YAxis::Left ? yl : yr;
    return bottom - (v - r.lo) / (r.hi - r.lo) * (bottom - top);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(width / 2.0) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title) << "</text>\n";

  // Axes frame.
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
      << "\" height=\"" << num(bottom - top) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double v : x) {
    const double xp = px(v);
    svg << "<line x1=\"" << num(xp) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(xp)
        << "\" y2=\"" << num(bottom + 5) << "\" stroke=\"black\"/>\n";
  }
  for (int e = static_cast<int>(std::ceil(xr.lo)); e <= static_cast<int>(std::floor(xr.hi)); ++e) {
    const double xp = left + (e - xr.lo) / (xr.hi - xr.lo) * (right - left);
    svg << "<text x=\"" << num(xp) << "\" y=\"" << num(bottom + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << num(std::pow(10.0, e), e < 0 ? -e : 0) << "</text>\n";
  }
  for (double t : ticks(yl)) {
    const double yp = py(t, YAxis::Left);
    svg << "<text x=\"" << num(left - 8) << "\" y=\"" << num(yp + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << num(t)
        << "</text>\n";
  }
  for (double t : ticks(yr)) {
    const double yp = py(t, YAxis::Right);
    svg << "<text x=\"" << num(right + 8) << "\" y=\"" << num(yp + 4)
        << "\" text-anchor=\"start\" font-family=\"sans-serif\" font-size=\"12\">" << num(t, 3)
        << "</text>\n";
  }
  svg << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(height - 18.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(x_label) << "</text>\n";
  svg << "<text transform=\"translate(22 " << num((top + bottom) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(left_label) << "</text>\n";
  svg << "<text transform=\"translate(" << num(width - 18.0) << ' ' << num((top + bottom) / 2)
      << ") rotate(90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(right_label) << "</text>\n";

  for (const auto& s : series) {
    if (s.band_lo.size() == s.y.size() && s.band_hi.size() == s.y.size() && !s.y.empty()) {
      svg << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.y.size(); ++i)
        svg << num(px(x[i])) << ',' << num(py(s.band_hi[i], s.axis)) << ' ';
      for (std::size_t i = s.y.size(); i-- > 0;)
        svg << num(px(x[i])) << ',' << num(py(s.band_lo[i], s.axis)) << ' ';
      svg << "\"/>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.y.size(); ++i)
      svg << num(px(x[i])) << ',' << num(py(s.y[i], s.axis)) << ' ';
    svg << "\"/>\n";
  }

  double ly = top + 16;
  for (const auto& s : series) {
    svg << "<line x1=\"" << num(left + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + 36)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(left + 42) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.label) << "</text>\n";
    ly += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace smodcli
