#include "mhect/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mhect/errors.h"

namespace mhect {
namespace {

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

void SvgPlot::AddLine(const std::string& name, std::vector<double> x,
                      std::vector<double> y, const std::string& color) {
  series_.push_back({name, color, std::move(x), std::move(y), false});
}

void SvgPlot::AddMarkers(const std::string& name, std::vector<double> x,
                         std::vector<double> y, const std::string& color) {
  series_.push_back({name, color, std::move(x), std::move(y), true});
}

void SvgPlot::AddSteps(const std::string& name, std::vector<double> x,
                       std::vector<double> y, const std::string& color) {
  std::vector<double> sx, sy;
  for (size_t k = 0; k < y.size(); ++k) {
    sx.push_back(x[k]);
    sy.push_back(y[k]);
    if (k + 1 < x.size()) {
      sx.push_back(x[k + 1]);
      sy.push_back(y[k]);
    }
  }
  AddLine(name, std::move(sx), std::move(sy), color);
}

std::string SvgPlot::Render(int width, int height) const {
  const double left = 70, right = 150, top = 30, bottom = 45;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto ty = [this](double v) {
    return log_y_ ? std::log10(std::max(v, 1e-300)) : v;
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const Series& s : series_) {
    for (size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if (log_y_ && s.y[k] <= 0.0) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, ty(s.y[k]));
      y1 = std::max(y1, ty(s.y[k]));
    }
  }
  if (!(x0 < x1)) { x0 = std::isfinite(x0) ? x0 - 1 : 0; x1 = x0 + 2; }
  if (!(y0 < y1)) { y0 = std::isfinite(y0) ? y0 - 1 : 0; y1 = y0 + 2; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << Num(left + pw / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
     << Escape(title_) << "</text>\n";
  os << "<rect x=\"" << Num(left) << "\" y=\"" << Num(top) << "\" width=\"" << Num(pw)
     << "\" height=\"" << Num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << Num(px(xv)) << "\" y=\"" << Num(top + ph + 15)
       << "\" text-anchor=\"middle\">" << Tick(xv) << "</text>\n";
    const double ypix = top + (1.0 - i / 4.0) * ph;
    os << "<text x=\"" << Num(left - 5) << "\" y=\"" << Num(ypix + 4)
       << "\" text-anchor=\"end\">" << Tick(log_y_ ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  os << "<text x=\"" << Num(left + pw / 2) << "\" y=\"" << Num(height - 8)
     << "\" text-anchor=\"middle\">" << Escape(x_label_) << "</text>\n";
  os << "<text x=\"15\" y=\"" << Num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << Num(top + ph / 2) << ")\">" << Escape(y_label_) << "</text>\n";

  int row = 0;
  for (const Series& s : series_) {
    if (s.markers) {
      for (size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
        if (!std::isfinite(s.y[k]) || (log_y_ && s.y[k] <= 0.0)) continue;
        os << "<circle cx=\"" << Num(px(s.x[k])) << "\" cy=\"" << Num(py(s.y[k]))
           << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
      }
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
      for (size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
        if (!std::isfinite(s.y[k]) || (log_y_ && s.y[k] <= 0.0)) continue;
        os << Num(px(s.x[k])) << ',' << Num(py(s.y[k])) << ' ';
      }
      os << "\"/>\n";
    }
    const double ly = top + 12 + 16 * row++;
    os << "<line x1=\"" << Num(left + pw + 10) << "\" y1=\"" << Num(ly - 4) << "\" x2=\""
       << Num(left + pw + 30) << "\" y2=\"" << Num(ly - 4) << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << Num(left + pw + 35) << "\" y=\"" << Num(ly) << "\">"
       << Escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void SvgPlot::Save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << Render();
}

}  // namespace mhect
