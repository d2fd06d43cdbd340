#include "biaslab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "biaslab/common.hpp"

namespace biaslab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<ChartSeries>& series) {
  constexpr double w = 720, h = 440;
  constexpr double ml = 70, mr = 150, mt = 40, mb = 55;
  const double pw = w - ml - mr, ph = h - mt - mb;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  if (!(x_min < x_max)) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (!(y_min < y_max)) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return mt + ph - (y - y_min) / (y_max - y_min) * ph; };

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("svg: cannot open '" + tmp + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"15\">" << title << "</text>\n";

    // axes with 5 ticks each
    out << "<g stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\"/>\n";
    for (int t = 0; t <= 5; ++t) {
      const double fx = x_min + (x_max - x_min) * t / 5.0;
      const double fy = y_min + (y_max - y_min) * t / 5.0;
      out << "<line x1=\"" << px(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(fx) << "\" y2=\""
          << mt + ph + 5 << "\"/>\n";
      out << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 18
          << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" << num(fx) << "</text>\n";
      out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml << "\" y2=\""
          << py(fy) << "\"/>\n";
      out << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
          << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333\">" << num(fy) << "</text>\n";
    }
    out << "</g>\n";
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\""
        << "rotate(-90 16 " << mt + ph / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
      const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
      std::string points;
      bool pen_down = false;
      std::string segment;
      auto flush = [&] {
        if (!segment.empty())
          out << "<polyline fill=\"none\" stroke=\"" << color
              << "\" stroke-width=\"1.8\" points=\"" << segment << "\"/>\n";
        segment.clear();
      };
      for (std::size_t i = 0; i < series[s].x.size(); ++i) {
        if (std::isnan(series[s].x[i]) || std::isnan(series[s].y[i])) {
          flush();
          pen_down = false;
          continue;
        }
        segment += num(px(series[s].x[i])) + "," + num(py(series[s].y[i])) + " ";
        pen_down = true;
      }
      (void)pen_down;
      flush();
      const double ly = mt + 16 + 18 * static_cast<double>(s);
      out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw + 34
          << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("svg: rename to '" + path + "' failed");
}

}  // namespace biaslab
