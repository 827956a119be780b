#ifndef MHECT_SVG_PLOT_H_
#define MHECT_SVG_PLOT_H_

#include <string>
#include <vector>

namespace mhect {

// Minimal line/marker chart written as a standalone SVG file.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)),
        y_label_(std::move(y_label)) {}

  void AddLine(const std::string& name, std::vector<double> x,
               std::vector<double> y, const std::string& color);
  // Markers only (no connecting line).
  void AddMarkers(const std::string& name, std::vector<double> x,
                  std::vector<double> y, const std::string& color);
  // Piecewise-constant series: value y[k] on [x[k], x[k+1]).
  void AddSteps(const std::string& name, std::vector<double> x,
                std::vector<double> y, const std::string& color);
  void set_log_y(bool log_y) { log_y_ = log_y; }

  std::string Render(int width = 720, int height = 360) const;
  // Throws ConfigError if the file cannot be written.
  void Save(const std::string& path) const;

 private:
  struct Series {
    std::string name, color;
    std::vector<double> x, y;
    bool markers = false;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  bool log_y_ = false;
};

}  // namespace mhect

#endif  // MHECT_SVG_PLOT_H_
