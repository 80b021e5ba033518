#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwlab {

/// Canonical numeric formatting for data tables: %.12g, enough digits to
/// identify a double while keeping integers and short decimals readable.
/// All table output flows through this so byte-reproducibility holds.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// A CSV data table with a fixed header. Cells are preformatted strings;
/// use the typed cell() helpers so numeric formatting stays uniform.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const char* v) { return v; }

  void add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) {
      throw std::logic_error("CsvTable: row width does not match header");
    }
    rows.push_back(std::move(row));
  }

  std::string to_string() const {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out += ',';
      out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += row[i];
      }
      out += '\n';
    }
    return out;
  }

  /// Numeric column accessor (by header name) for report tooling.
  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::invalid_argument("CsvTable: no column named \"" + name + "\"");
    }
    const size_t idx = static_cast<size_t>(it - header.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(std::stod(row.at(idx)));
    return out;
  }
};

/// Parse CSV text produced by CsvTable::to_string (no quoting/escaping).
inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::vector<std::string> fields;
    size_t p = pos;
    while (p <= eol) {
      size_t comma = text.find(',', p);
      if (comma == std::string::npos || comma > eol) comma = eol;
      fields.push_back(text.substr(p, comma - p));
      p = comma + 1;
    }
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else if (!(fields.size() == 1 && fields[0].empty())) {
      t.add_row(std::move(fields));
    }
    pos = eol + 1;
  }
  return t;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

// ---------------------------------------------------------------------------
// Self-contained SVG figures. No external assets, no timestamps; linear color
// scales with numeric color-bar ticks. Sequential palette for non-negative
// data, diverging palette (symmetric about zero) for signed data.
// ---------------------------------------------------------------------------

namespace detail {

struct Rgb {
  double r, g, b;
};

/// Sequential palette: dark blue -> teal -> green -> yellow.
inline Rgb sequential_color(double t) {
  static const Rgb anchors[] = {
      {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
      {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
      {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.478, 0.821, 0.318},
      {0.741, 0.873, 0.150}, {0.993, 0.906, 0.144}};
  const int n = 10;
  const double x = std::clamp(t, 0.0, 1.0) * n;
  const int i = std::min(static_cast<int>(x), n - 1);
  const double f = x - i;
  return {anchors[i].r + f * (anchors[i + 1].r - anchors[i].r),
          anchors[i].g + f * (anchors[i + 1].g - anchors[i].g),
          anchors[i].b + f * (anchors[i + 1].b - anchors[i].b)};
}

/// Diverging palette: blue -> white -> red, midpoint at t = 0.5.
inline Rgb diverging_color(double t) {
  const double x = std::clamp(t, 0.0, 1.0);
  const Rgb lo{0.230, 0.299, 0.754}, mid{0.955, 0.955, 0.955}, hi{0.706, 0.016, 0.150};
  if (x < 0.5) {
    const double f = x / 0.5;
    return {lo.r + f * (mid.r - lo.r), lo.g + f * (mid.g - lo.g),
            lo.b + f * (mid.b - lo.b)};
  }
  const double f = (x - 0.5) / 0.5;
  return {mid.r + f * (hi.r - mid.r), mid.g + f * (hi.g - mid.g),
          mid.b + f * (hi.b - mid.b)};
}

inline std::string hex_color(const Rgb& c) {
  auto chan = [](double v) {
    const int b = std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255);
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", b);
    return std::string(buf);
  };
  return "#" + chan(c.r) + chan(c.g) + chan(c.b);
}

}  // namespace detail

/// One heatmap panel: nx x ny cells, value(ix, iy) at values[iy*nx + ix],
/// iy increasing upward. Axis ranges are data coordinates for tick labels.
struct HeatmapPanel {
  std::string title;
  std::string x_label, y_label;
  int nx = 0, ny = 0;
  std::vector<double> values;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
};

namespace detail {

struct ColorScale {
  double v_min = 0.0, v_max = 1.0;
  bool diverging = false;

  std::string color(double v) const {
    const double span = v_max - v_min;
    const double t = span > 0 ? (v - v_min) / span : 0.5;
    return hex_color(diverging ? diverging_color(t) : sequential_color(t));
  }
};

inline ColorScale make_scale(const std::vector<const HeatmapPanel*>& panels) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const HeatmapPanel* p : panels) {
    for (double v : p->values) {
      if (first) {
        lo = hi = v;
        first = false;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (first) return {0.0, 1.0, false};
  ColorScale s;
  if (lo < 0.0 && hi > 0.0) {
    const double m = std::max(-lo, hi);
    s = {-m, m, true};
  } else {
    s = {lo, hi, false};
    if (s.v_min == s.v_max) s.v_max = s.v_min + 1.0;
  }
  return s;
}

inline void svg_text(std::string& svg, double x, double y, const std::string& s,
                     const char* anchor = "middle", int size = 12) {
  svg += "<text x=\"" + format_short(x) + "\" y=\"" + format_short(y) +
         "\" font-family=\"monospace\" font-size=\"" + std::to_string(size) +
         "\" fill=\"#222\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
}

inline void svg_panel(std::string& svg, const HeatmapPanel& p, const ColorScale& scale,
                      double ox, double oy, double side) {
  const double cw = side / p.nx, ch = side / p.ny;
  for (int iy = 0; iy < p.ny; ++iy) {
    for (int ix = 0; ix < p.nx; ++ix) {
      const double v = p.values[static_cast<size_t>(iy) * p.nx + ix];
      // iy increases upward; SVG y increases downward.
      const double rx = ox + ix * cw;
      const double ry = oy + side - (iy + 1) * ch;
      svg += "<rect x=\"" + format_short(rx) + "\" y=\"" + format_short(ry) +
             "\" width=\"" + format_short(cw + 0.5) + "\" height=\"" +
             format_short(ch + 0.5) + "\" fill=\"" + scale.color(v) + "\"/>\n";
    }
  }
  svg += "<rect x=\"" + format_short(ox) + "\" y=\"" + format_short(oy) +
         "\" width=\"" + format_short(side) + "\" height=\"" + format_short(side) +
         "\" fill=\"none\" stroke=\"#222\"/>\n";
  svg_text(svg, ox + side / 2, oy - 8, p.title, "middle", 13);
  // Three ticks per axis: min, mid, max.
  for (int t = 0; t < 3; ++t) {
    const double f = t / 2.0;
    const double xv = p.x_min + f * (p.x_max - p.x_min);
    const double yv = p.y_min + f * (p.y_max - p.y_min);
    svg_text(svg, ox + f * side, oy + side + 16, format_short(xv));
    svg_text(svg, ox - 6, oy + side - f * side + 4, format_short(yv), "end");
  }
  svg_text(svg, ox + side / 2, oy + side + 34, p.x_label);
  svg_text(svg, ox - 46, oy + side / 2, p.y_label, "middle");
}

inline void svg_colorbar(std::string& svg, const ColorScale& scale, double ox,
                         double oy, double height) {
  const int strips = 64;
  const double w = 16.0;
  for (int i = 0; i < strips; ++i) {
    const double t = (i + 0.5) / strips;
    const double v = scale.v_min + t * (scale.v_max - scale.v_min);
    const double y = oy + height - (i + 1) * height / strips;
    svg += "<rect x=\"" + format_short(ox) + "\" y=\"" + format_short(y) +
           "\" width=\"" + format_short(w) + "\" height=\"" +
           format_short(height / strips + 0.5) + "\" fill=\"" + scale.color(v) +
           "\"/>\n";
  }
  svg += "<rect x=\"" + format_short(ox) + "\" y=\"" + format_short(oy) +
         "\" width=\"" + format_short(w) + "\" height=\"" + format_short(height) +
         "\" fill=\"none\" stroke=\"#222\"/>\n";
  for (int t = 0; t < 3; ++t) {
    const double f = t / 2.0;
    const double v = scale.v_min + f * (scale.v_max - scale.v_min);
    svg_text(svg, ox + w + 4, oy + height - f * height + 4, format_short(v), "start");
  }
}

}  // namespace detail

/// Render one or two heatmap panels (shared linear color scale) plus a
/// color bar into a standalone SVG document.
inline std::string svg_heatmap(const std::vector<HeatmapPanel>& panels) {
  if (panels.empty() || panels.size() > 2) {
    throw std::invalid_argument("svg_heatmap: expects 1 or 2 panels");
  }
  std::vector<const HeatmapPanel*> raw;
  raw.reserve(panels.size());
  for (const auto& p : panels) raw.push_back(&p);
  const detail::ColorScale scale = detail::make_scale(raw);

  const double side = 360.0, margin_l = 70.0, margin_t = 40.0, margin_b = 50.0;
  const double gap = 40.0, bar_w = 70.0;
  const double width = margin_l + panels.size() * side + (panels.size() - 1) * gap +
                       gap + bar_w;
  const double height = margin_t + side + margin_b;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    format_short(width) + "\" height=\"" + format_short(height) +
                    "\" viewBox=\"0 0 " + format_short(width) + " " +
                    format_short(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (size_t i = 0; i < panels.size(); ++i) {
    detail::svg_panel(svg, panels[i], scale, margin_l + i * (side + gap), margin_t,
                      side);
  }
  detail::svg_colorbar(svg, scale,
                       margin_l + panels.size() * side + (panels.size() - 1) * gap + gap,
                       margin_t, side);
  svg += "</svg>\n";
  return svg;
}

/// Scatter plot (used for ribbon quasienergy spectra): points colored by a
/// third channel on the sequential palette, with axes and a color bar.
struct ScatterSpec {
  std::string title;
  std::string x_label, y_label, c_label;
  std::vector<double> x, y, c;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
};

inline std::string svg_scatter(const ScatterSpec& s) {
  if (s.x.size() != s.y.size() || s.x.size() != s.c.size()) {
    throw std::invalid_argument("svg_scatter: x, y, c must be the same length");
  }
  const double side = 420.0, margin_l = 70.0, margin_t = 40.0, margin_b = 50.0;
  const double gap = 30.0, bar_w = 80.0;
  const double width = margin_l + side + gap + bar_w;
  const double height = margin_t + side + margin_b;

  detail::ColorScale scale{0.0, 1.0, false};
  if (!s.c.empty()) {
    const auto [lo, hi] = std::minmax_element(s.c.begin(), s.c.end());
    scale.v_min = *lo;
    scale.v_max = *hi > *lo ? *hi : *lo + 1.0;
  }

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    format_short(width) + "\" height=\"" + format_short(height) +
                    "\" viewBox=\"0 0 " + format_short(width) + " " +
                    format_short(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg += "<rect x=\"" + format_short(margin_l) + "\" y=\"" + format_short(margin_t) +
         "\" width=\"" + format_short(side) + "\" height=\"" + format_short(side) +
         "\" fill=\"none\" stroke=\"#222\"/>\n";
  const double xspan = s.x_max - s.x_min, yspan = s.y_max - s.y_min;
  for (size_t i = 0; i < s.x.size(); ++i) {
    const double px = margin_l + (s.x[i] - s.x_min) / xspan * side;
    const double py = margin_t + side - (s.y[i] - s.y_min) / yspan * side;
    svg += "<circle cx=\"" + format_short(px) + "\" cy=\"" + format_short(py) +
           "\" r=\"2\" fill=\"" + scale.color(s.c[i]) + "\"/>\n";
  }
  detail::svg_text(svg, margin_l + side / 2, margin_t - 8, s.title, "middle", 13);
  for (int t = 0; t < 3; ++t) {
    const double f = t / 2.0;
    detail::svg_text(svg, margin_l + f * side, margin_t + side + 16,
                     format_short(s.x_min + f * xspan));
    detail::svg_text(svg, margin_l - 6, margin_t + side - f * side + 4,
                     format_short(s.y_min + f * yspan), "end");
  }
  detail::svg_text(svg, margin_l + side / 2, margin_t + side + 34, s.x_label);
  detail::svg_text(svg, margin_l - 46, margin_t + side / 2, s.y_label);
  detail::svg_colorbar(svg, scale, margin_l + side + gap, margin_t, side);
  detail::svg_text(svg, margin_l + side + gap + 8, margin_t - 8, s.c_label, "start");
  svg += "</svg>\n";
  return svg;
}

}  // namespace qwlab
