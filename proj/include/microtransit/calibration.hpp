#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "network.hpp"

namespace mt {

struct CalibrationPoint {
  double baseline_seconds = 0.0;
  double observed_seconds = 0.0;
};

struct CalibrationOptions {
  bool fit_intercept = true;
  double outlier_scale = 3.0;  // multiples of the robust residual spread
};

// Congested travel time as a linear function of free-flow (map-service) time.
struct CalibrationModel {
  double slope = 1.0;
  double intercept = 0.0;  // seconds
  std::string outlier_rule;
  std::size_t retained = 0;
  std::size_t excluded = 0;

  double apply(double baseline_seconds) const { return std::max(0.0, slope * baseline_seconds + intercept); }

  // Rescales every off-diagonal time entry; distances and the diagonal are untouched.
  TravelMatrix apply(const TravelMatrix& baseline) const {
    TravelMatrix out = baseline;
    for (std::size_t i = 0; i < baseline.size(); ++i)
      for (std::size_t j = 0; j < baseline.size(); ++j)
        if (i != j) out.set_time(i, j, apply(baseline.time(i, j)));
    return out;
  }
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

inline Line ols(std::span<const CalibrationPoint> pts, bool fit_intercept) {
  double n = static_cast<double>(pts.size());
  if (!fit_intercept) {
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : pts) {
      sxy += p.baseline_seconds * p.observed_seconds;
      sxx += p.baseline_seconds * p.baseline_seconds;
    }
    if (sxx == 0.0) throw CalibrationError("calibration: all baseline values are zero");
    return {sxy / sxx, 0.0};
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.baseline_seconds;
    my += p.observed_seconds;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : pts) {
    sxy += (p.baseline_seconds - mx) * (p.observed_seconds - my);
    sxx += (p.baseline_seconds - mx) * (p.baseline_seconds - mx);
  }
  if (sxx == 0.0) throw CalibrationError("calibration: baseline values are all equal");
  double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

// Theil-Sen restricted to positive slopes: congestion scaling is monotone, so a
// negative pairwise slope can only come from a corrupted point.
inline Line robust_first_pass(std::span<const CalibrationPoint> pts, bool fit_intercept) {
  std::vector<double> slopes;
  if (fit_intercept) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        double dx = pts[j].baseline_seconds - pts[i].baseline_seconds;
        if (dx == 0.0) continue;
        double s = (pts[j].observed_seconds - pts[i].observed_seconds) / dx;
        if (s > 0.0) slopes.push_back(s);
      }
  } else {
    for (const auto& p : pts)
      if (p.baseline_seconds > 0.0 && p.observed_seconds > 0.0)
        slopes.push_back(p.observed_seconds / p.baseline_seconds);
  }
  if (slopes.empty()) throw CalibrationError("calibration: no pair of points supports a positive slope");
  Line line{median(slopes), 0.0};
  if (fit_intercept) {
    std::vector<double> offsets;
    for (const auto& p : pts) offsets.push_back(p.observed_seconds - line.slope * p.baseline_seconds);
    line.intercept = median(offsets);
  }
  return line;
}

}  // namespace detail

// Outlier screen against a robust first-pass line, then one least-squares refit
// on the retained points. Input order does not matter.
inline CalibrationModel calibrate(std::span<const CalibrationPoint> points, CalibrationOptions opts = {}) {
  std::vector<CalibrationPoint> pts(points.begin(), points.end());
  for (const auto& p : pts)
    if (!std::isfinite(p.baseline_seconds) || !std::isfinite(p.observed_seconds))
      throw CalibrationError("calibration: non-finite point");
  if (pts.size() < 2) throw CalibrationError("calibration: need at least 2 points, got " + std::to_string(pts.size()));
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.baseline_seconds != b.baseline_seconds ? a.baseline_seconds < b.baseline_seconds
                                                    : a.observed_seconds < b.observed_seconds;
  });

  auto first = detail::robust_first_pass(pts, opts.fit_intercept);
  std::vector<double> residuals;
  double y_scale = 0.0;
  for (const auto& p : pts) {
    residuals.push_back(p.observed_seconds - (first.slope * p.baseline_seconds + first.intercept));
    y_scale = std::max(y_scale, std::abs(p.observed_seconds));
  }
  const double center = detail::median(residuals);
  std::vector<double> dev;
  for (double r : residuals) dev.push_back(std::abs(r - center));
  const double mad = 1.4826 * detail::median(dev);
  const double limit = std::max(opts.outlier_scale * mad, 1e-9 * (1.0 + y_scale));

  std::vector<CalibrationPoint> kept;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (std::abs(residuals[i] - center) <= limit) kept.push_back(pts[i]);
  if (kept.size() < 2)
    throw CalibrationError("calibration: only " + std::to_string(kept.size()) + " point(s) left after outlier exclusion");

  auto fit = detail::ols(kept, opts.fit_intercept);
  if (!(fit.slope > 0.0)) throw CalibrationError("calibration: fitted slope is not positive");

  CalibrationModel model;
  model.slope = fit.slope;
  model.intercept = fit.intercept;
  model.retained = kept.size();
  model.excluded = pts.size() - kept.size();
  model.outlier_rule = "exclude |residual - median| > " + csv::format_double(opts.outlier_scale) +
                       " x 1.4826 x MAD against a positive-slope Theil-Sen line; single OLS refit" +
                       (opts.fit_intercept ? "" : " through the origin");
  return model;
}

// calibration file: `baseline_seconds,observed_seconds`
inline std::vector<CalibrationPoint> read_calibration_points(std::istream& in) {
  auto table = csv::read(in);
  if (table.header != std::vector<std::string>{"baseline_seconds", "observed_seconds"})
    throw InvalidInput("calibration: header must be 'baseline_seconds,observed_seconds'");
  std::vector<std::string> issues;
  std::vector<CalibrationPoint> pts;
  for (const auto& row : table.rows) {
    CalibrationPoint p;
    if (row.fields.size() != 2 || !csv::parse_double(row.fields[0], p.baseline_seconds) ||
        !csv::parse_double(row.fields[1], p.observed_seconds)) {
      issues.push_back("calibration line " + std::to_string(row.line) + ": expected two numbers");
      continue;
    }
    pts.push_back(p);
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return pts;
}

}  // namespace mt
