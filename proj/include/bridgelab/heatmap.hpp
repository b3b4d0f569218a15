#pragma once

// Prediction heatmaps as hand-written SVG: one rect per grid cell colored by
// the model's prediction at the cell center, and one circle per observed data
// point colored on the same scale.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelab/regress.hpp"

namespace bridgelab {

struct Rgb {
  int r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Five-stop sequential ramp, linearly interpolated in RGB.
inline constexpr std::array<Rgb, 5> kRamp = {{
    {68, 1, 84},
    {59, 82, 139},
    {33, 145, 140},
    {94, 201, 98},
    {253, 231, 37},
}};

inline Rgb ramp_color(double position) {
  position = std::clamp(position, 0.0, 1.0);
  const double scaled = position * static_cast<double>(kRamp.size() - 1);
  const auto lo = std::min<std::size_t>(static_cast<std::size_t>(scaled), kRamp.size() - 2);
  const double f = scaled - static_cast<double>(lo);
  auto mix = [&](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * f)); };
  return {mix(kRamp[lo].r, kRamp[lo + 1].r), mix(kRamp[lo].g, kRamp[lo + 1].g), mix(kRamp[lo].b, kRamp[lo + 1].b)};
}

inline std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

// Linear map of ln(value) onto [0, 1]; a flat scale maps everything to 0.5.
struct ColorScale {
  double lo = 0.0;  // ln units
  double hi = 0.0;

  double position(double ln_value) const {
    if (hi <= lo) return 0.5;
    return std::clamp((ln_value - lo) / (hi - lo), 0.0, 1.0);
  }
  Rgb color(double ln_value) const { return ramp_color(position(ln_value)); }
};

struct HeatPoint {
  ComplexityProfile profile;
  double observed = 0.0;
};

struct HeatmapSpec {
  RegressionModel model;
  Feature x_feature = Feature::t;
  Feature y_feature = Feature::d;
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  int grid_x = 64;
  int grid_y = 64;
  std::vector<HeatPoint> points;
  // Values of model features that are not on an axis.
  ComplexityProfile fixed{1.0, 1.0, 1.0, 0, 0};
  std::string description;  // written to <desc>, e.g. the producing command line
};

struct HeatmapOutput {
  std::string svg;
  std::size_t cells = 0;
  std::size_t points_drawn = 0;
  std::size_t points_clipped = 0;
  ColorScale scale;
};

class HeatmapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void set_feature(ComplexityProfile& p, Feature f, double v) {
  (f == Feature::d ? p.d : (f == Feature::t ? p.t : p.b)) = v;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Powers of ten inside [lo, hi]; falls back to the endpoints.
inline std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  for (int e = static_cast<int>(std::ceil(std::log10(lo) - 1e-9)); e <= static_cast<int>(std::floor(std::log10(hi) + 1e-9)); ++e) {
    ticks.push_back(std::pow(10.0, e));
  }
  if (ticks.size() < 2) ticks = {lo, std::sqrt(lo * hi), hi};
  return ticks;
}

}  // namespace detail

// Fits axis ranges around the data points (padded by 10% in log space).
inline void fit_ranges(HeatmapSpec& spec) {
  if (spec.points.empty()) throw HeatmapError("cannot derive ranges without data points");
  auto range = [&](Feature f, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    for (const auto& p : spec.points) {
      const double v = feature_value(p.profile, f);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo > 0.0)) throw HeatmapError("feature values must be positive");
    const double pad = lo == hi ? 0.5 : 0.1 * std::log(hi / lo);
    lo *= std::exp(-pad);
    hi *= std::exp(pad);
  };
  range(spec.x_feature, spec.x_min, spec.x_max);
  range(spec.y_feature, spec.y_min, spec.y_max);
  // Off-axis features sit at the geometric mean of the data.
  for (auto f : all_features()) {
    if (f == spec.x_feature || f == spec.y_feature) continue;
    double s = 0.0;
    for (const auto& p : spec.points) s += std::log(feature_value(p.profile, f));
    detail::set_feature(spec.fixed, f, std::exp(s / static_cast<double>(spec.points.size())));
  }
}

inline HeatmapOutput render_heatmap(const HeatmapSpec& spec) {
  if (spec.x_feature == spec.y_feature) throw HeatmapError("x and y features must differ");
  if (!(spec.x_min > 0.0) || !(spec.y_min > 0.0)) throw HeatmapError("axis ranges must be positive");
  if (!(spec.x_max > spec.x_min) || !(spec.y_max > spec.y_min)) throw HeatmapError("degenerate axis range (min >= max)");
  if (spec.grid_x <= 0 || spec.grid_y <= 0) throw HeatmapError("grid must be positive");

  const double lx0 = std::log(spec.x_min), lx1 = std::log(spec.x_max);
  const double ly0 = std::log(spec.y_min), ly1 = std::log(spec.y_max);
  auto profile_at = [&](double x, double y) {
    ComplexityProfile p = spec.fixed;
    detail::set_feature(p, spec.x_feature, x);
    detail::set_feature(p, spec.y_feature, y);
    return p;
  };

  std::vector<double> cell_ln(static_cast<std::size_t>(spec.grid_x * spec.grid_y));
  for (int j = 0; j < spec.grid_y; ++j) {
    const double y = std::exp(ly0 + (j + 0.5) / spec.grid_y * (ly1 - ly0));
    for (int i = 0; i < spec.grid_x; ++i) {
      const double x = std::exp(lx0 + (i + 0.5) / spec.grid_x * (lx1 - lx0));
      cell_ln[static_cast<std::size_t>(j * spec.grid_x + i)] = predict_log(spec.model, profile_at(x, y));
    }
  }

  struct Drawn {
    double lx, ly, ln_obs;
  };
  std::vector<Drawn> drawn;
  std::size_t clipped = 0;
  for (const auto& p : spec.points) {
    const double x = feature_value(p.profile, spec.x_feature);
    const double y = feature_value(p.profile, spec.y_feature);
    if (!(p.observed > 0.0) || x < spec.x_min || x > spec.x_max || y < spec.y_min || y > spec.y_max) {
      ++clipped;
      continue;
    }
    drawn.push_back({std::log(x), std::log(y), std::log(p.observed)});
  }

  ColorScale scale{*std::min_element(cell_ln.begin(), cell_ln.end()), *std::max_element(cell_ln.begin(), cell_ln.end())};
  for (const auto& d : drawn) {
    scale.lo = std::min(scale.lo, d.ln_obs);
    scale.hi = std::max(scale.hi, d.ln_obs);
  }

  constexpr double left = 80, top = 20, plot = 512, bar_gap = 20, bar_w = 20, right = 90, bottom = 60;
  const double width = left + plot + bar_gap + bar_w + right;
  const double height = top + plot + bottom;
  const double cw = plot / spec.grid_x, ch = plot / spec.grid_y;
  auto px = [&](double lx) { return left + (lx - lx0) / (lx1 - lx0) * plot; };
  auto py = [&](double ly) { return top + plot - (ly - ly0) / (ly1 - ly0) * plot; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << detail::num(width) << "\" height=\""
      << detail::num(height) << "\" viewBox=\"0 0 " << detail::num(width) << ' ' << detail::num(height) << "\">\n";
  if (!spec.description.empty()) svg << "<desc>" << detail::xml_escape(spec.description) << "</desc>\n";
  svg << "<!-- points drawn: " << drawn.size() << ", clipped: " << clipped << " -->\n";
  svg << "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">";
  for (std::size_t k = 0; k < kRamp.size(); ++k) {
    svg << "<stop offset=\"" << detail::num(static_cast<double>(k) / (kRamp.size() - 1)) << "\" stop-color=\""
        << hex(kRamp[k]) << "\"/>";
  }
  svg << "</linearGradient></defs>\n";

  svg << "<g id=\"cells\" shape-rendering=\"crispEdges\">\n";
  for (int j = 0; j < spec.grid_y; ++j) {
    for (int i = 0; i < spec.grid_x; ++i) {
      svg << "<rect class=\"cell\" x=\"" << detail::num(left + i * cw) << "\" y=\""
          << detail::num(top + plot - (j + 1) * ch) << "\" width=\"" << detail::num(cw) << "\" height=\""
          << detail::num(ch) << "\" fill=\"" << hex(scale.color(cell_ln[static_cast<std::size_t>(j * spec.grid_x + i)]))
          << "\"/>\n";
    }
  }
  svg << "</g>\n<g id=\"points\">\n";
  for (const auto& d : drawn) {
    svg << "<circle class=\"point\" cx=\"" << detail::num(px(d.lx)) << "\" cy=\"" << detail::num(py(d.ly))
        << "\" r=\"5\" fill=\"" << hex(scale.color(d.ln_obs)) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  }
  svg << "</g>\n<g id=\"axes\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot << "\" x2=\"" << left + plot << "\" y2=\"" << top + plot
      << "\" stroke=\"#000000\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot
      << "\" stroke=\"#000000\"/>\n";
  for (double t : detail::log_ticks(spec.x_min, spec.x_max)) {
    const double x = px(std::log(t));
    svg << "<line x1=\"" << detail::num(x) << "\" y1=\"" << top + plot << "\" x2=\"" << detail::num(x) << "\" y2=\""
        << top + plot + 5 << "\" stroke=\"#000000\"/>";
    svg << "<text x=\"" << detail::num(x) << "\" y=\"" << top + plot + 18 << "\" text-anchor=\"middle\">"
        << detail::num(t) << "</text>\n";
  }
  for (double t : detail::log_ticks(spec.y_min, spec.y_max)) {
    const double y = py(std::log(t));
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::num(y) << "\" x2=\"" << left << "\" y2=\""
        << detail::num(y) << "\" stroke=\"#000000\"/>";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << detail::num(y + 4) << "\" text-anchor=\"end\">" << detail::num(t)
        << "</text>\n";
  }
  svg << "<text x=\"" << left + plot / 2 << "\" y=\"" << top + plot + 40 << "\" text-anchor=\"middle\">"
      << feature_letter(spec.x_feature) << " (log scale)</text>\n";
  svg << "<text x=\"20\" y=\"" << top + plot / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << top + plot / 2 << ")\">" << feature_letter(spec.y_feature) << " (log scale)</text>\n";
  const double bx = left + plot + bar_gap;
  svg << "<rect class=\"colorbar\" x=\"" << bx << "\" y=\"" << top << "\" width=\"" << bar_w << "\" height=\"" << plot
      << "\" fill=\"url(#ramp)\" stroke=\"#000000\"/>\n";
  svg << "<text x=\"" << bx + bar_w + 4 << "\" y=\"" << top + 10 << "\">" << detail::num(std::exp(scale.hi))
      << "</text>\n";
  svg << "<text x=\"" << bx + bar_w + 4 << "\" y=\"" << top + plot << "\">" << detail::num(std::exp(scale.lo))
      << "</text>\n";
  svg << "<text x=\"" << bx << "\" y=\"" << top + plot + 40 << "\">"
      << detail::xml_escape(std::string(1, target_letter(spec.model.target_kind)) + " per second") << "</text>\n";
  svg << "</g>\n</svg>\n";

  HeatmapOutput out;
  out.svg = svg.str();
  out.cells = cell_ln.size();
  out.points_drawn = drawn.size();
  out.points_clipped = clipped;
  out.scale = scale;
  return out;
}

inline HeatmapOutput render_heatmap(const HeatmapSpec& spec, const std::string& path) {
  auto out = render_heatmap(spec);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << out.svg;
  return out;
}

}  // namespace bridgelab
