#pragma once

#include <string>
#include <vector>

namespace dsacd::io {

/// Minimal SVG chart: one data rectangle with axes, ticks and a legend. All
/// drawing calls take data coordinates.
class SvgChart {
 public:
  SvgChart(std::string title, std::string xlabel, std::string ylabel, int width = 640, int height = 420);

  void set_range(double x0, double x1, double y0, double y1);
  /// Expands the range to cover the given values (ignores non-finite ones).
  void fit(const std::vector<double>& xs, const std::vector<double>& ys);

  void line(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color,
            const std::string& label = "", double width = 1.5);
  void points(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color,
              const std::string& label = "", double radius = 2.5, double opacity = 0.6);
  /// Bars between consecutive edges.
  void bars(const std::vector<double>& edges, const std::vector<double>& heights, const std::string& color,
            const std::string& label = "", double opacity = 0.5);
  /// Ellipse in data space, rotated by `angle` radians.
  void ellipse(double cx, double cy, double rx, double ry, double angle, const std::string& color);
  void circle(double cx, double cy, double r, const std::string& fill, double opacity = 0.4);
  void note(const std::string& text);

  std::string render() const;

  static const char* palette(int i);

 private:
  double px(double x) const;
  double py(double y) const;

  std::string title_, xlabel_, ylabel_;
  int width_, height_;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  bool has_range_ = false;
  std::vector<std::pair<std::string, std::string>> legend_;  // (label, color)
  std::vector<std::string> notes_;
  struct Shape {
    enum Kind { polyline, dots, bar, ellipse, disk } kind;
    std::vector<double> a, b, c;
    std::string color;
    double p1 = 0, p2 = 0;
  };
  std::vector<Shape> shapes_;
};

/// Ticks at 1, 2 or 5 times a power of ten spanning [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace dsacd::io
