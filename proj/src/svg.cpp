#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "ibl/harness.hpp"

namespace ibl {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string text(double x, double y, const std::string& s, const char* anchor, int size = 12,
                 const char* extra = "") {
  return "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", y) + "\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\"" + extra + ">" + xml_escape(s) +
         "</text>\n";
}

}  // namespace

std::string render_svg(const std::vector<Curve>& curves, const Axes& axes) {
  if (curves.empty()) throw ConfigError("render_svg: no curves");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Curve& c : curves) {
    if (c.x.empty() || c.x.size() != c.y.size()) {
      throw ConfigError("render_svg: curve '" + c.label + "' has no points or mismatched x/y");
    }
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (axes.log_x && !(c.x[i] > 0.0)) throw ConfigError("render_svg: log x axis needs x > 0");
      xmin = std::min(xmin, c.x[i]);
      xmax = std::max(xmax, c.x[i]);
      ymin = std::min(ymin, c.y[i]);
      ymax = std::max(ymax, c.y[i]);
    }
  }
  if (axes.y_min && axes.y_max) {
    ymin = *axes.y_min;
    ymax = *axes.y_max;
  }
  auto tx = [&](double x) { return axes.log_x ? std::log10(x) : x; };
  double x0 = tx(xmin), x1 = tx(xmax);
  if (axes.log_x) {
    x0 = std::floor(x0);
    x1 = std::max(std::ceil(x1), x0 + 1.0);
  } else if (x1 <= x0) {
    x1 = x0 + 1.0;
  }
  if (ymax <= ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) {
    const double yc = std::clamp(y, ymin, ymax);
    return kTop + (ymax - yc) / (ymax - ymin) * ph;
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kWidth) + "\" height=\"" +
       fmt("%.0f", kHeight) + "\" viewBox=\"0 0 " + fmt("%.0f", kWidth) + " " + fmt("%.0f", kHeight) +
       "\" font-family=\"sans-serif\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += text(kWidth / 2, 22, axes.title, "middle", 14);

  // Grid and tick labels.
  if (axes.log_x) {
    for (double e = x0; e <= x1 + 1e-9; e += 1.0) {
      const double x = kLeft + (e - x0) / (x1 - x0) * pw;
      s += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + fmt("%.2f", x) +
           "\" y2=\"" + fmt("%.2f", kTop + ph) + "\" stroke=\"#dddddd\"/>\n";
      s += text(x, kTop + ph + 18, "1e" + fmt("%.0f", e), "middle", 11);
    }
  } else {
    for (int k = 0; k <= 5; ++k) {
      const double v = x0 + (x1 - x0) * k / 5.0;
      const double x = kLeft + pw * k / 5.0;
      s += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + fmt("%.2f", x) +
           "\" y2=\"" + fmt("%.2f", kTop + ph) + "\" stroke=\"#dddddd\"/>\n";
      s += text(x, kTop + ph + 18, fmt("%.3g", v), "middle", 11);
    }
  }
  for (int k = 0; k <= 5; ++k) {
    const double v = ymin + (ymax - ymin) * k / 5.0;
    const double y = py(v);
    s += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" +
         fmt("%.2f", kLeft + pw) + "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"#dddddd\"/>\n";
    s += text(kLeft - 6, y + 4, fmt("%.3g", v), "end", 11);
  }
  s += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" + fmt("%.2f", pw) +
       "\" height=\"" + fmt("%.2f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += text(kLeft + pw / 2, kHeight - 12, axes.x_label, "middle", 12);
  s += text(16, kTop + ph / 2, axes.y_label, "middle", 12,
            (" transform=\"rotate(-90 16 " + fmt("%.2f", kTop + ph / 2) + ")\"").c_str());

  // Curves.
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const Curve& c = curves[ci];
    const char* color = kPalette[ci % std::size(kPalette)];
    s += "<polyline fill=\"none\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (i > 0) s += ' ';
      s += fmt("%.2f", px(c.x[i])) + "," + fmt("%.2f", py(c.y[i]));
    }
    s += "\"/>\n";
  }

  // Legend, bottom right inside the plot.
  const double row = 16.0;
  const double lx = kLeft + pw - 250.0;
  double ly = kTop + ph - row * static_cast<double>(curves.size()) - 8.0;
  s += "<g class=\"legend\">\n";
  s += "<rect x=\"" + fmt("%.2f", lx - 6) + "\" y=\"" + fmt("%.2f", ly - 4) + "\" width=\"246\" height=\"" +
       fmt("%.2f", row * static_cast<double>(curves.size()) + 6) +
       "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"#999999\"/>\n";
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const char* color = kPalette[ci % std::size(kPalette)];
    const double y = ly + row * static_cast<double>(ci) + row / 2;
    s += "<line x1=\"" + fmt("%.2f", lx) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" + fmt("%.2f", lx + 22) +
         "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += text(lx + 28, y + 4, curves[ci].label, "start", 11);
  }
  s += "</g>\n</svg>\n";
  return s;
}

void emit_svg(const std::vector<Curve>& curves, const Axes& axes, const std::filesystem::path& path) {
  write_text_file(path, render_svg(curves, axes));
}

}  // namespace ibl
