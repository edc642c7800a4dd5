#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "random.hpp"

namespace mt {

// Empirical response times, drawn uniformly as a multiset and capped at `threshold`.
struct DriverModel {
  std::vector<double> samples;  // seconds
  double threshold = 300.0;     // seconds
};

inline double sample_driver_delay(const DriverModel& model, Rng& rng) {
  if (model.samples.empty()) throw ConfigError("driver model has no response-time samples");
  const double raw = model.samples[static_cast<std::size_t>(rng.below(model.samples.size()))];
  return std::min(raw, model.threshold);
}

struct SyntheticDriverSpec {
  std::size_t count = 1619;
  double median = 18.0;       // seconds
  double target_mean = 43.14; // seconds, after capping
  double sigma_low = 1.0;     // log-space spread below the median
  double threshold = 300.0;
};

namespace detail {

// Deterministic quantile grid of a two-piece lognormal with median exp(mu).
inline std::vector<double> two_piece_lognormal(const SyntheticDriverSpec& spec, double sigma_high) {
  const boost::math::normal_distribution<double> unit;
  const double mu = std::log(spec.median);
  std::vector<double> out(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(spec.count);
    const double z = boost::math::quantile(unit, u);
    const double x = std::exp(mu + (z < 0.0 ? spec.sigma_low : sigma_high) * z);
    out[i] = std::min(x, spec.threshold);
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace detail

// Right-skewed synthetic sample set with a target median and capped mean.
// The upper spread is found by bisection; the capped mean grows with it.
inline DriverModel synthetic_driver_model(const SyntheticDriverSpec& spec = {}) {
  if (spec.count == 0 || !(spec.median > 0.0) || !(spec.target_mean > 0.0))
    throw ConfigError("synthetic driver model: count, median and mean must be > 0");
  double lo = 1e-3, hi = 10.0;
  if (detail::mean_of(detail::two_piece_lognormal(spec, hi)) < spec.target_mean)
    throw ConfigError("synthetic driver model: target mean unreachable under the cap");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::mean_of(detail::two_piece_lognormal(spec, mid)) < spec.target_mean)
      lo = mid;
    else
      hi = mid;
  }
  return {detail::two_piece_lognormal(spec, 0.5 * (lo + hi)), spec.threshold};
}

// One column `response_seconds`, non-negative values.
inline DriverModel read_driver_samples(std::istream& in, double threshold = 300.0) {
  auto table = csv::read(in);
  if (table.header != std::vector<std::string>{"response_seconds"})
    throw InvalidInput("driver samples: header must be 'response_seconds'");
  std::vector<std::string> issues;
  DriverModel model;
  model.threshold = threshold;
  for (const auto& row : table.rows) {
    double v = 0.0;
    if (row.fields.size() != 1 || !csv::parse_double(row.fields[0], v) || !(v >= 0.0) || !std::isfinite(v)) {
      issues.push_back("driver samples line " + std::to_string(row.line) + ": expected one non-negative number");
      continue;
    }
    model.samples.push_back(v);
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  if (model.samples.empty()) throw ConfigError("driver samples: no rows");
  return model;
}

}  // namespace mt
