#pragma once

// Deterministic SVG charts: rate-vs-arrival lines, waiting-time box plots and
// objective-landscape heatmaps. Fixed viewport, no timestamps; numeric values
// a test may need are echoed in data-* attributes.

#include <string>
#include <vector>

#include "bq/experiment.hpp"
#include "bq/optimizer.hpp"

namespace bq {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series);

/// Mean renege/jockey rates per arrival rate for one (interval, policy) cell
/// column, one series per (behaviour, model).
std::vector<Series> rate_series(const std::vector<ReplicationSummary>& rows, double r, bool policy);

struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;  ///< smallest value within 1.5 IQR of q1
  double whisker_hi = 0.0;
  std::size_t n = 0;
};

/// Quartiles by linear interpolation; NaN entries are dropped.
BoxStats box_stats(std::vector<double> values);

struct BoxGroup {
  std::string label;
  std::vector<double> values;
};

std::string box_plot_svg(const std::string& title, const std::string& y_label,
                         const std::vector<BoxGroup>& groups);

struct Marker {
  std::string kind;  ///< "optimized" or "non-optimized"
  double mu_i;
  double mu_j;
};

std::string heatmap_svg(const std::string& title, const std::vector<LandscapePoint>& points,
                        const std::vector<Marker>& markers);

}  // namespace bq
