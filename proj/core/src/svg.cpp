#include "dsacd/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace dsacd::io {

namespace {

constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string escape(const std::string& s) {
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

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(4) << x;
  return os.str();
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / std::max(target, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

SvgChart::SvgChart(std::string title, std::string xlabel, std::string ylabel, int width, int height)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)), width_(width),
      height_(height) {}

const char* SvgChart::palette(int i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  return colors[static_cast<std::size_t>(i) % 7];
}

void SvgChart::set_range(double x0, double x1, double y0, double y1) {
  x0_ = x0, x1_ = x1, y0_ = y0, y1_ = y1;
  has_range_ = true;
}

void SvgChart::fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto expand = [&](const std::vector<double>& v, double& lo, double& hi) {
    for (double x : v) {
      if (!std::isfinite(x)) continue;
      if (!has_range_) lo = hi = x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  };
  const bool had = has_range_;
  expand(xs, x0_, x1_);
  has_range_ = had;
  expand(ys, y0_, y1_);
  has_range_ = had || !xs.empty() || !ys.empty();
}

double SvgChart::px(double x) const {
  const double span = x1_ > x0_ ? x1_ - x0_ : 1.0;
  return kLeft + (x - x0_) / span * (width_ - kLeft - kRight);
}

double SvgChart::py(double y) const {
  const double span = y1_ > y0_ ? y1_ - y0_ : 1.0;
  return height_ - kBottom - (y - y0_) / span * (height_ - kTop - kBottom);
}

void SvgChart::line(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color,
                    const std::string& label, double width) {
  shapes_.push_back({Shape::polyline, xs, ys, {}, color, width, 1.0});
  if (!label.empty()) legend_.emplace_back(label, color);
}

void SvgChart::points(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color,
                      const std::string& label, double radius, double opacity) {
  shapes_.push_back({Shape::dots, xs, ys, {}, color, radius, opacity});
  if (!label.empty()) legend_.emplace_back(label, color);
}

void SvgChart::bars(const std::vector<double>& edges, const std::vector<double>& heights, const std::string& color,
                    const std::string& label, double opacity) {
  shapes_.push_back({Shape::bar, edges, heights, {}, color, 0.0, opacity});
  if (!label.empty()) legend_.emplace_back(label, color);
}

void SvgChart::ellipse(double cx, double cy, double rx, double ry, double angle, const std::string& color) {
  shapes_.push_back({Shape::ellipse, {cx, cy}, {rx, ry}, {angle}, color, 0.0, 1.0});
}

void SvgChart::circle(double cx, double cy, double r, const std::string& fill, double opacity) {
  shapes_.push_back({Shape::disk, {cx, cy}, {r}, {}, fill, 0.0, opacity});
}

void SvgChart::note(const std::string& text) { notes_.push_back(text); }

std::string SvgChart::render() const {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width_ / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
     << "</text>\n";
  const double left = kLeft, right = width_ - kRight, top = kTop, bottom = height_ - kBottom;
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\""
     << bottom - top << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : nice_ticks(x0_, x1_)) {
    const double x = px(t);
    os << "<line x1=\"" << x << "\" y1=\"" << bottom << "\" x2=\"" << x << "\" y2=\"" << bottom + 5
       << "\" stroke=\"#444\"/><text x=\"" << x << "\" y=\"" << bottom + 18 << "\" text-anchor=\"middle\">"
       << fmt(t) << "</text>\n";
  }
  for (double t : nice_ticks(y0_, y1_)) {
    const double y = py(t);
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
       << "\" stroke=\"#444\"/><text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
       << fmt(t) << "</text>\n";
  }
  os << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height_ - 12 << "\" text-anchor=\"middle\">"
     << escape(xlabel_) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (top + bottom) / 2 << ")\">" << escape(ylabel_) << "</text>\n";

  os << "<g>\n";
  for (const auto& s : shapes_) {
    switch (s.kind) {
      case Shape::polyline: {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.p1 << "\" points=\"";
        for (std::size_t i = 0; i < s.a.size() && i < s.b.size(); ++i)
          if (std::isfinite(s.a[i]) && std::isfinite(s.b[i])) os << px(s.a[i]) << ',' << py(s.b[i]) << ' ';
        os << "\"/>\n";
        break;
      }
      case Shape::dots:
        for (std::size_t i = 0; i < s.a.size() && i < s.b.size(); ++i)
          if (std::isfinite(s.a[i]) && std::isfinite(s.b[i]))
            os << "<circle cx=\"" << px(s.a[i]) << "\" cy=\"" << py(s.b[i]) << "\" r=\"" << s.p1 << "\" fill=\""
               << s.color << "\" fill-opacity=\"" << s.p2 << "\"/>\n";
        break;
      case Shape::bar:
        for (std::size_t i = 0; i + 1 < s.a.size() && i < s.b.size(); ++i) {
          const double x = px(s.a[i]), w = px(s.a[i + 1]) - x;
          const double y = py(s.b[i]), h = py(0.0) - y;
          os << "<rect x=\"" << x << "\" y=\"" << std::min(y, y + h) << "\" width=\"" << std::max(w, 0.0)
             << "\" height=\"" << std::abs(h) << "\" fill=\"" << s.color << "\" fill-opacity=\"" << s.p2
             << "\"/>\n";
        }
        break;
      case Shape::ellipse: {
        const double cx = px(s.a[0]), cy = py(s.a[1]);
        const double rx = std::abs(px(s.a[0] + s.b[0]) - cx), ry = std::abs(py(s.a[1] + s.b[1]) - cy);
        os << "<ellipse cx=\"" << cx << "\" cy=\"" << cy << "\" rx=\"" << rx << "\" ry=\"" << ry
           << "\" transform=\"rotate(" << -s.c[0] * 180.0 / 3.141592653589793 << ' ' << cx << ' ' << cy
           << ")\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        break;
      }
      case Shape::disk: {
        const double cx = px(s.a[0]), cy = py(s.a[1]);
        const double rx = std::abs(px(s.a[0] + s.b[0]) - cx), ry = std::abs(py(s.a[1] + s.b[0]) - cy);
        os << "<ellipse cx=\"" << cx << "\" cy=\"" << cy << "\" rx=\"" << rx << "\" ry=\"" << ry << "\" fill=\""
           << s.color << "\" fill-opacity=\"" << s.p2 << "\"/>\n";
        break;
      }
    }
  }
  os << "</g>\n";

  double ly = top + 14;
  for (const auto& [label, color] : legend_) {
    os << "<rect x=\"" << right - 150 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << color
       << "\"/><text x=\"" << right - 135 << "\" y=\"" << ly << "\">" << escape(label) << "</text>\n";
    ly += 15;
  }
  for (const auto& n : notes_) {
    os << "<text x=\"" << left + 8 << "\" y=\"" << ly << "\" fill=\"#a00\">" << escape(n) << "</text>\n";
    ly += 15;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace dsacd::io
