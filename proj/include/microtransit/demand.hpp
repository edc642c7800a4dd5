#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "csv.hpp"
#include "network.hpp"
#include "random.hpp"

namespace mt {

// Operating hours; request times are seconds since the start of service.
struct ServiceDay {
  double start_hour = 6.0;
  double end_hour = 19.0;

  double length_seconds() const { return (end_hour - start_hour) * 3600.0; }
  double hours() const { return end_hour - start_hour; }
};

enum class RequestState { pending, assigned, picked_up, completed };

struct Request {
  RequestId id = 0;
  std::int64_t user_id = 0;
  StopIndex pickup = 0;
  StopIndex dropoff = 0;
  StopIndex pickup_idle = 0;  // nearest idle stop to the pickup
  double earliest = 0.0;      // seconds since service start
  int riders = 1;
  RequestState state = RequestState::pending;
};

inline constexpr int kMaxRidersPerRequest = 4;

inline bool request_order(const Request& a, const Request& b) {
  return a.earliest != b.earliest ? a.earliest < b.earliest : a.id < b.id;
}

struct DemandDay {
  std::vector<Request> requests;      // sorted by (earliest, id)
  std::vector<std::string> source_tags;  // parallel to requests

  std::size_t size() const { return requests.size(); }

  int riders() const {
    int n = 0;
    for (const auto& r : requests) n += r.riders;
    return n;
  }

  void sort() {
    std::vector<std::size_t> order(requests.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return request_order(requests[a], requests[b]); });
    std::vector<Request> r;
    std::vector<std::string> t;
    for (auto i : order) {
      r.push_back(requests[i]);
      t.push_back(i < source_tags.size() ? source_tags[i] : "base");
    }
    requests = std::move(r);
    source_tags = std::move(t);
  }
};

// Requests whose earliest time falls in [epoch * length, (epoch + 1) * length).
inline std::vector<Request> batch_epoch(const DemandDay& day, std::int64_t epoch, double length) {
  if (epoch < 0 || !(length > 0.0)) throw InvalidInput("batch_epoch: epoch must be >= 0 and length > 0");
  const double lo = static_cast<double>(epoch) * length;
  const double hi = static_cast<double>(epoch + 1) * length;
  auto first = std::lower_bound(day.requests.begin(), day.requests.end(), lo,
                                [](const Request& r, double t) { return r.earliest < t; });
  auto last = std::lower_bound(first, day.requests.end(), hi,
                               [](const Request& r, double t) { return r.earliest < t; });
  return {first, last};
}

// --- ridership scaling ------------------------------------------------------

struct ScaleOptions {
  double window_slack = 600.0;  // seconds added to the direct ride for a trip's time footprint
};

struct ScaledDay {
  DemandDay day;
  std::size_t target = 0;
  std::size_t sampled = 0;
  std::size_t rejected_overlap = 0;
  std::optional<std::string> shortfall;
};

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
};

inline bool overlaps(const TimeWindow& a, const TimeWindow& b) { return a.begin < b.end && b.begin < a.end; }

inline TimeWindow trip_window(const Request& r, const TravelMatrix& m, double slack) {
  return {r.earliest, r.earliest + m.time(r.pickup, r.dropoff) + slack};
}

// Grows `base` to multiplier x |base| trips by drawing pool trips uniformly
// without replacement. A drawn trip keeps its time of day and user; it is
// skipped when its window overlaps one already held by that user.
inline ScaledDay scale_ridership(const DemandDay& base, std::span<const DemandDay> pool, int multiplier,
                                 std::uint64_t seed, const TravelMatrix& m, const ScaleOptions& opts = {}) {
  if (multiplier < 1) throw InvalidInput("scale_ridership: multiplier must be >= 1");
  ScaledDay out;
  out.day = base;
  if (out.day.source_tags.size() != out.day.requests.size()) out.day.source_tags.assign(out.day.requests.size(), "base");
  out.target = base.size() * static_cast<std::size_t>(multiplier);
  if (multiplier == 1) return out;
  if (pool.empty()) throw InvalidInput("scale_ridership: pool is empty but multiplier > 1");

  std::map<std::int64_t, std::vector<TimeWindow>> held;
  RequestId next_id = 0;
  for (const auto& r : base.requests) {
    held[r.user_id].push_back(trip_window(r, m, opts.window_slack));
    next_id = std::max(next_id, r.id + 1);
  }

  struct Candidate {
    std::size_t day;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t d = 0; d < pool.size(); ++d)
    for (std::size_t i = 0; i < pool[d].requests.size(); ++i) candidates.push_back({d, i});
  Rng rng(seed);
  rng.shuffle(candidates);

  for (const auto& c : candidates) {
    if (out.day.size() >= out.target) break;
    Request r = pool[c.day].requests[c.index];
    auto w = trip_window(r, m, opts.window_slack);
    auto& windows = held[r.user_id];
    if (std::any_of(windows.begin(), windows.end(), [&](const auto& h) { return overlaps(h, w); })) {
      ++out.rejected_overlap;
      continue;
    }
    windows.push_back(w);
    std::string tag = "pool" + std::to_string(c.day) + ":" + std::to_string(r.id);
    r.id = next_id++;
    r.state = RequestState::pending;
    out.day.requests.push_back(r);
    out.day.source_tags.push_back(std::move(tag));
    ++out.sampled;
  }
  if (out.day.size() < out.target)
    out.shortfall = "pool exhausted: reached " + std::to_string(out.day.size()) + " of " +
                    std::to_string(out.target) + " trips";
  out.day.sort();
  return out;
}

// --- requests file ------------------------------------------------------------

// `id,user_id,p,d,e_seconds,riders` with an optional trailing `source_tag`.
inline DemandDay read_requests(std::istream& in, const Network& net, const ServiceDay& service = {}) {
  auto table = csv::read(in);
  const std::vector<std::string> base_header{"id", "user_id", "p", "d", "e_seconds", "riders"};
  bool tagged = false;
  if (table.header == base_header) {
  } else if (table.header.size() == 7 && std::equal(base_header.begin(), base_header.end(), table.header.begin()) &&
             table.header[6] == "source_tag") {
    tagged = true;
  } else {
    throw InvalidInput("requests: header must be 'id,user_id,p,d,e_seconds,riders[,source_tag]'");
  }
  std::vector<std::string> issues;
  DemandDay day;
  std::map<RequestId, std::size_t> seen;
  for (const auto& row : table.rows) {
    auto where = "requests line " + std::to_string(row.line) + ": ";
    if (row.fields.size() != table.header.size()) {
      issues.push_back(where + "expected " + std::to_string(table.header.size()) + " fields");
      continue;
    }
    Request r;
    std::int64_t p = 0, d = 0, riders = 0;
    if (!csv::parse_int(row.fields[0], r.id) || !csv::parse_int(row.fields[1], r.user_id) ||
        !csv::parse_int(row.fields[2], p) || !csv::parse_int(row.fields[3], d) ||
        !csv::parse_double(row.fields[4], r.earliest) || !csv::parse_int(row.fields[5], riders)) {
      issues.push_back(where + "malformed field");
      continue;
    }
    bool ok = true;
    if (!net.contains(p)) issues.push_back(where + "unknown pickup stop " + std::to_string(p)), ok = false;
    if (!net.contains(d)) issues.push_back(where + "unknown dropoff stop " + std::to_string(d)), ok = false;
    if (p == d) issues.push_back(where + "pickup equals dropoff"), ok = false;
    if (riders < 1 || riders > kMaxRidersPerRequest)
      issues.push_back(where + "riders must be in 1.." + std::to_string(kMaxRidersPerRequest)), ok = false;
    if (!(r.earliest >= 0.0 && r.earliest <= service.length_seconds()))
      issues.push_back(where + "e_seconds outside the service day"), ok = false;
    if (!seen.emplace(r.id, row.line).second) issues.push_back(where + "duplicate request id " + row.fields[0]), ok = false;
    if (!ok) continue;
    r.pickup = net.index_of(p);
    r.dropoff = net.index_of(d);
    r.pickup_idle = net.nearest_idle(r.pickup);
    r.riders = static_cast<int>(riders);
    day.requests.push_back(r);
    day.source_tags.push_back(tagged ? row.fields[6] : "base");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  day.sort();
  return day;
}

inline void write_requests(std::ostream& out, const DemandDay& day, const Network& net, bool with_tags) {
  out << "id,user_id,p,d,e_seconds,riders" << (with_tags ? ",source_tag" : "") << '\n';
  for (std::size_t i = 0; i < day.requests.size(); ++i) {
    const auto& r = day.requests[i];
    out << r.id << ',' << r.user_id << ',' << net.id_of(r.pickup) << ',' << net.id_of(r.dropoff) << ','
        << csv::format_double(r.earliest) << ',' << r.riders;
    if (with_tags) out << ',' << (i < day.source_tags.size() ? day.source_tags[i] : "base");
    out << '\n';
  }
}

}  // namespace mt
