#include "bq/charts.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "bq/report.hpp"

namespace bq {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

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

std::string header(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2.0, escape(title));
}

struct Range {
  double lo;
  double hi;
  double map(double v, double from, double to) const {
    const double span = hi - lo;
    return span > 0.0 ? from + (v - lo) / span * (to - from) : 0.5 * (from + to);
  }
};

Range padded(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (hi <= lo) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string axes(const Range& x, const Range& y, const std::string& x_label, const std::string& y_label,
                 bool x_ticks = true) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string out = fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{3}\" stroke=\"black\"/>\n",
      x0, y0, x1, y1);
  for (int t = 0; t <= 4; ++t) {
    const double yv = y.lo + (y.hi - y.lo) * t / 4.0;
    const double py = y.map(yv, y0, y1);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", x0 - 6, py + 4, yv);
    if (x_ticks) {
      const double xv = x.lo + (x.hi - x.lo) * t / 4.0;
      out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n",
                         x.map(xv, x0, x1), y0 + 18, xv);
    }
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", 0.5 * (x0 + x1),
                     kHeight - 18, escape(x_label));
  out += fmt::format(
      "<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">{1}</text>\n",
      0.5 * (y0 + y1), escape(y_label));
  return out;
}

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = 0.0, ymax = -INFINITY;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
    }
  const Range xr = padded(xmin, xmax);
  const Range yr = padded(ymin, ymax);
  std::string out = header(title) + axes(xr, yr, x_label, y_label);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    out += fmt::format("<g class=\"series\" data-label=\"{}\">\n", escape(s.label));
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      const double px = xr.map(s.x[k], x0, x1);
      const double py = yr.map(s.y[k], y0, y1);
      pts += fmt::format("{:.2f},{:.2f} ", px, py);
      out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" data-x=\"{}\" data-y=\"{}\"/>\n",
                         px, py, color, fmt_num(s.x[k]), fmt_num(s.y[k]));
    }
    if (!pts.empty()) pts.pop_back();
    out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n</g>\n",
                       pts, color);
    const double ly = kTop + 16.0 * static_cast<double>(i);
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5:.2f}\">{6}</text>\n",
        kWidth - kRight + 10, ly, kWidth - kRight + 30, color, kWidth - kRight + 36, ly + 4, escape(s.label));
  }
  return out + "</svg>\n";
}

std::vector<Series> rate_series(const std::vector<ReplicationSummary>& rows, double r, bool policy) {
  struct Acc {
    double sum[4] = {0, 0, 0, 0};
    int n = 0;
  };
  std::map<double, Acc> by_lambda;
  for (const auto& s : rows) {
    if (s.r != r || s.policy != policy) continue;
    auto& a = by_lambda[s.lambda];
    a.sum[0] += s.renege_rate_fsd;
    a.sum[1] += s.renege_rate_icd;
    a.sum[2] += s.jockey_rate_fsd;
    a.sum[3] += s.jockey_rate_icd;
    ++a.n;
  }
  std::vector<Series> out = {{"renege FSD", {}, {}}, {"renege ICD", {}, {}}, {"jockey FSD", {}, {}}, {"jockey ICD", {}, {}}};
  for (const auto& [lambda, a] : by_lambda)
    for (int k = 0; k < 4; ++k) {
      out[k].x.push_back(lambda);
      out[k].y.push_back(a.sum[k] / a.n);
    }
  return out;
}

BoxStats box_stats(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  BoxStats b;
  b.n = values.size();
  if (values.empty()) {
    b.q1 = b.median = b.q3 = b.whisker_lo = b.whisker_hi = NAN;
    return b;
  }
  std::sort(values.begin(), values.end());
  b.q1 = interpolated_quantile(values, 0.25);
  b.median = interpolated_quantile(values, 0.5);
  b.q3 = interpolated_quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  b.whisker_lo = *std::find_if(values.begin(), values.end(), [&](double v) { return v >= b.q1 - 1.5 * iqr; });
  b.whisker_hi = *std::find_if(values.rbegin(), values.rend(), [&](double v) { return v <= b.q3 + 1.5 * iqr; });
  return b;
}

std::string box_plot_svg(const std::string& title, const std::string& y_label,
                         const std::vector<BoxGroup>& groups) {
  std::vector<BoxStats> stats;
  double ymin = 0.0, ymax = -INFINITY;
  for (const auto& g : groups) {
    stats.push_back(box_stats(g.values));
    for (double v : g.values)
      if (std::isfinite(v)) ymax = std::max(ymax, v);
  }
  const Range yr = padded(ymin, ymax);
  const Range xr{0.0, static_cast<double>(std::max<std::size_t>(groups.size(), 1))};
  std::string out = header(title) + axes(xr, yr, "", y_label, false);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const double slot = (x1 - x0) / xr.hi;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& b = stats[i];
    const double cx = x0 + slot * (static_cast<double>(i) + 0.5);
    const double half = 0.3 * slot;
    const char* color = kPalette[i % std::size(kPalette)];
    out += fmt::format("<g class=\"box\" data-label=\"{}\" data-n=\"{}\" data-q1=\"{}\" data-median=\"{}\" data-q3=\"{}\">\n",
                       escape(groups[i].label), b.n, fmt_num(b.q1), fmt_num(b.median), fmt_num(b.q3));
    if (b.n > 0) {
      auto py = [&](double v) { return yr.map(v, y0, y1); };
      out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                         cx, py(b.whisker_lo), py(b.whisker_hi));
      out += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" fill-opacity=\"0.5\" stroke=\"black\"/>\n",
          cx - half, py(b.q3), 2 * half, std::max(0.0, py(b.q1) - py(b.q3)), color);
      out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\" stroke-width=\"2\"/>\n",
                         cx - half, py(b.median), cx + half, py(b.median));
    }
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n</g>\n", cx,
                       y0 + 16 + 12 * static_cast<double>(i % 2), escape(groups[i].label));
  }
  return out + "</svg>\n";
}

std::string heatmap_svg(const std::string& title, const std::vector<LandscapePoint>& points,
                        const std::vector<Marker>& markers) {
  std::vector<double> xs, ys;
  double vmin = INFINITY, vmax = -INFINITY;
  for (const auto& p : points) {
    xs.push_back(p.mu_i);
    ys.push_back(p.mu_j);
    if (p.feasible) {
      vmin = std::min(vmin, p.objective);
      vmax = std::max(vmax, p.objective);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  const double step_x = xs.size() > 1 ? xs[1] - xs[0] : 1.0;
  const double step_y = ys.size() > 1 ? ys[1] - ys[0] : 1.0;
  const Range xr{xs.empty() ? 0.0 : xs.front() - 0.5 * step_x, xs.empty() ? 1.0 : xs.back() + 0.5 * step_x};
  const Range yr{ys.empty() ? 0.0 : ys.front() - 0.5 * step_y, ys.empty() ? 1.0 : ys.back() + 0.5 * step_y};
  std::string out = header(title) + axes(xr, yr, "mu_i", "mu_j");
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const double cw = (x1 - x0) / (xr.hi - xr.lo) * step_x;
  const double ch = (y0 - y1) / (yr.hi - yr.lo) * step_y;
  // Colours follow the log of the objective.
  const double lmin = std::log(std::max(vmin, 1e-300));
  const double lmax = std::log(std::max(vmax, 1e-300));
  out += "<g class=\"cells\">\n";
  for (const auto& p : points) {
    const double px = xr.map(p.mu_i, x0, x1) - 0.5 * cw;
    const double py = yr.map(p.mu_j, y0, y1) - 0.5 * ch;
    std::string fill = "#dddddd";
    if (p.feasible) {
      const double t = lmax > lmin ? (std::log(p.objective) - lmin) / (lmax - lmin) : 0.0;
      const int red = static_cast<int>(std::lround(255 * t));
      const int blue = static_cast<int>(std::lround(255 * (1 - t)));
      fill = fmt::format("#{:02x}40{:02x}", red, blue);
    }
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", px, py,
                       cw, ch, fill);
  }
  out += "</g>\n";
  for (const auto& m : markers) {
    const double px = xr.map(m.mu_i, x0, x1);
    const double py = yr.map(m.mu_j, y0, y1);
    const bool opt = m.kind == "optimized";
    out += fmt::format(
        "<circle class=\"marker\" data-kind=\"{}\" data-mu-i=\"{}\" data-mu-j=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"6\" "
        "fill=\"{}\" stroke=\"black\"/>\n",
        escape(m.kind), fmt_num(m.mu_i), fmt_num(m.mu_j), px, py, opt ? "#ffffff" : "#000000");
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\">min {:.4g}</text><text x=\"{}\" y=\"{}\">max {:.4g}</text>\n",
                     kWidth - kRight + 10, kTop + 10, vmin, kWidth - kRight + 10, kTop + 28, vmax);
  out += fmt::format("<text x=\"{}\" y=\"{}\">o optimized (white)</text><text x=\"{}\" y=\"{}\">o reference (black)</text>\n",
                     kWidth - kRight + 10, kTop + 52, kWidth - kRight + 10, kTop + 70);
  return out + "</svg>\n";
}

}  // namespace bq
