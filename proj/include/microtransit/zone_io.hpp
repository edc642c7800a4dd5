#pragma once

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "csv.hpp"
#include "network.hpp"

namespace mt {

namespace detail {

inline bool parse_bool(std::string_view s, bool& out) {
  if (s == "1" || s == "true" || s == "TRUE" || s == "True" || s == "yes") {
    out = true;
    return true;
  }
  if (s == "0" || s == "false" || s == "FALSE" || s == "False" || s == "no") {
    out = false;
    return true;
  }
  return false;
}

struct RawMatrix {
  std::vector<StopId> ids;
  std::vector<double> values;  // row-major, ids.size() squared
};

inline RawMatrix read_matrix_csv(std::istream& in, const std::string& label, std::vector<std::string>& issues) {
  RawMatrix raw;
  auto table = csv::read(in);
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    std::int64_t id;
    if (!csv::parse_int(table.header[c], id)) {
      issues.push_back(label + ": header column " + std::to_string(c + 1) + " is not a stop id ('" +
                       table.header[c] + "')");
      id = -1;
    }
    raw.ids.push_back(id);
  }
  const std::size_t n = raw.ids.size();
  if (table.rows.size() != n)
    issues.push_back(label + ": " + std::to_string(table.rows.size()) + " data rows but " + std::to_string(n) +
                     " header columns");
  raw.values.assign(n * n, 0.0);
  for (std::size_t r = 0; r < table.rows.size() && r < n; ++r) {
    const auto& row = table.rows[r];
    std::int64_t rid;
    if (row.fields.empty() || !csv::parse_int(row.fields[0], rid) || rid != raw.ids[r]) {
      issues.push_back(label + " line " + std::to_string(row.line) + ": row label must be stop id " +
                       std::to_string(raw.ids[r]));
    }
    if (row.fields.size() != n + 1) {
      issues.push_back(label + " line " + std::to_string(row.line) + ": expected " + std::to_string(n + 1) +
                       " fields, found " + std::to_string(row.fields.size()));
      continue;
    }
    for (std::size_t c = 0; c < n; ++c) {
      double v;
      if (!csv::parse_double(row.fields[c + 1], v)) {
        issues.push_back(label + " line " + std::to_string(row.line) + ": cell for stop " +
                         std::to_string(raw.ids[c]) + " is not a number ('" + row.fields[c + 1] + "')");
        v = 0.0;
      }
      raw.values[r * n + c] = v;
    }
  }
  return raw;
}

// Places raw values into `m` following the order of `stop_ids`.
inline void place(const RawMatrix& raw, const std::vector<StopId>& stop_ids, TravelMatrix& m, bool is_time,
                  const std::string& label, std::vector<std::string>& issues) {
  if (raw.ids.size() != stop_ids.size()) {
    issues.push_back(label + ": dimension " + std::to_string(raw.ids.size()) + " does not match stop count " +
                     std::to_string(stop_ids.size()));
    return;
  }
  std::unordered_map<StopId, std::size_t> pos;
  for (std::size_t i = 0; i < raw.ids.size(); ++i) pos.emplace(raw.ids[i], i);
  std::vector<std::size_t> map(stop_ids.size());
  bool ok = true;
  for (std::size_t i = 0; i < stop_ids.size(); ++i) {
    auto it = pos.find(stop_ids[i]);
    if (it == pos.end()) {
      issues.push_back(label + ": stop id " + std::to_string(stop_ids[i]) + " missing from matrix header");
      ok = false;
    } else {
      map[i] = it->second;
    }
  }
  if (!ok) return;
  const std::size_t n = raw.ids.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = raw.values[map[i] * n + map[j]];
      if (is_time)
        m.set_time(i, j, v);
      else
        m.set_distance(i, j, v);
    }
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

inline bool get_u64(std::istream& in, std::uint64_t& v) {
  std::array<unsigned char, 8> b;
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return true;
}

inline bool get_u32(std::istream& in, std::uint32_t& v) {
  std::array<unsigned char, 4> b;
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) return false;
  v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return true;
}

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InvalidInput("cannot open " + path);
  return in;
}

}  // namespace detail

// stops file: `id,lat,lon,kind,is_idle`
inline std::vector<Stop> read_stops(std::istream& in, std::vector<std::string>& issues) {
  auto table = csv::read(in);
  const std::vector<std::string> expected{"id", "lat", "lon", "kind", "is_idle"};
  if (table.header != expected) {
    issues.push_back("stops: header must be 'id,lat,lon,kind,is_idle'");
    return {};
  }
  std::vector<Stop> stops;
  for (const auto& row : table.rows) {
    auto where = "stops line " + std::to_string(row.line) + ": ";
    if (row.fields.size() != 5) {
      issues.push_back(where + "expected 5 fields, found " + std::to_string(row.fields.size()));
      continue;
    }
    Stop s;
    bool ok = true;
    if (!csv::parse_int(row.fields[0], s.id)) {
      issues.push_back(where + "bad id '" + row.fields[0] + "'");
      ok = false;
    }
    if (!csv::parse_double(row.fields[1], s.lat) || !csv::parse_double(row.fields[2], s.lon)) {
      issues.push_back(where + "bad coordinates");
      ok = false;
    }
    if (row.fields[3] == "fixed-transit")
      s.kind = StopKind::fixed_transit;
    else if (row.fields[3] == "reach-virtual")
      s.kind = StopKind::reach_virtual;
    else {
      issues.push_back(where + "kind must be fixed-transit or reach-virtual, got '" + row.fields[3] + "'");
      ok = false;
    }
    if (!detail::parse_bool(row.fields[4], s.is_idle)) {
      issues.push_back(where + "is_idle must be 0/1/true/false, got '" + row.fields[4] + "'");
      ok = false;
    }
    if (ok) stops.push_back(s);
  }
  return stops;
}

// Builds the network from a stops CSV and two id-labelled matrix CSVs (seconds, km).
// All problems found across the three inputs are reported together.
inline Network load_zone(std::istream& stops_in, std::istream& time_in, std::istream& dist_in) {
  std::vector<std::string> issues;
  auto stops = read_stops(stops_in, issues);
  auto time_raw = detail::read_matrix_csv(time_in, "time matrix", issues);
  auto dist_raw = detail::read_matrix_csv(dist_in, "distance matrix", issues);

  std::vector<StopId> ids;
  for (const auto& s : stops) ids.push_back(s.id);
  TravelMatrix m(stops.size());
  detail::place(time_raw, ids, m, true, "time matrix", issues);
  detail::place(dist_raw, ids, m, false, "distance matrix", issues);
  if (!issues.empty()) {
    // Cell-level checks still run so a single pass reports everything.
    if (m.size() == stops.size()) {
      auto more = m.validate(ids);
      issues.insert(issues.end(), more.begin(), more.end());
    }
    throw ValidationError(std::move(issues));
  }
  return Network(std::move(stops), m);
}

inline constexpr std::array<char, 4> kMatrixMagic{'M', 'T', 'Z', 'M'};
inline constexpr std::uint8_t kMatrixVersion = 1;

// Binary container: magic "MTZM", version byte, u32 n, n x i64 stop ids, then the
// time and distance matrices as n*n little-endian float64 each, row-major.
inline void write_matrix_binary(std::ostream& out, const Network& net) {
  out.write(kMatrixMagic.data(), 4);
  out.put(static_cast<char>(kMatrixVersion));
  detail::put_u32(out, static_cast<std::uint32_t>(net.size()));
  for (auto id : net.ids()) detail::put_u64(out, static_cast<std::uint64_t>(id));
  for (int which = 0; which < 2; ++which)
    for (std::size_t i = 0; i < net.size(); ++i)
      for (std::size_t j = 0; j < net.size(); ++j) {
        double v = which == 0 ? net.matrix().time(i, j) : net.matrix().distance(i, j);
        detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
      }
}

inline Network load_zone_binary(std::istream& stops_in, std::istream& bin) {
  std::vector<std::string> issues;
  auto stops = read_stops(stops_in, issues);
  std::array<char, 4> magic{};
  bin.read(magic.data(), 4);
  if (!bin || magic != kMatrixMagic) throw InvalidInput("matrix container: bad magic header");
  int version = bin.get();
  if (version != kMatrixVersion)
    throw InvalidInput("matrix container: unsupported version " + std::to_string(version));
  std::uint32_t n = 0;
  if (!detail::get_u32(bin, n)) throw InvalidInput("matrix container: truncated header");
  detail::RawMatrix time_raw, dist_raw;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint64_t v;
    if (!detail::get_u64(bin, v)) throw InvalidInput("matrix container: truncated id table");
    time_raw.ids.push_back(static_cast<StopId>(v));
  }
  dist_raw.ids = time_raw.ids;
  for (auto* raw : {&time_raw, &dist_raw}) {
    raw->values.resize(std::size_t{n} * n);
    for (auto& x : raw->values) {
      std::uint64_t v;
      if (!detail::get_u64(bin, v)) throw InvalidInput("matrix container: truncated matrix data");
      x = std::bit_cast<double>(v);
    }
  }
  std::vector<StopId> ids;
  for (const auto& s : stops) ids.push_back(s.id);
  TravelMatrix m(stops.size());
  detail::place(time_raw, ids, m, true, "time matrix", issues);
  detail::place(dist_raw, ids, m, false, "distance matrix", issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return Network(std::move(stops), m);
}

inline void write_stops(std::ostream& out, const Network& net) {
  out << "id,lat,lon,kind,is_idle\n";
  for (const auto& s : net.stops())
    out << s.id << ',' << csv::format_double(s.lat) << ',' << csv::format_double(s.lon) << ',' << to_string(s.kind)
        << ',' << (s.is_idle ? 1 : 0) << '\n';
}

enum class MatrixField { time, distance };

inline void write_matrix_csv(std::ostream& out, const Network& net, MatrixField field) {
  out << "from";
  for (auto id : net.ids()) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < net.size(); ++i) {
    out << net.id_of(i);
    for (std::size_t j = 0; j < net.size(); ++j) {
      double v = field == MatrixField::time ? net.matrix().time(i, j) : net.matrix().distance(i, j);
      out << ',' << csv::format_double(v);
    }
    out << '\n';
  }
}

inline Network load_zone(const std::string& stops_path, const std::string& time_path,
                         const std::string& dist_path) {
  auto s = detail::open_in(stops_path);
  auto t = detail::open_in(time_path);
  auto d = detail::open_in(dist_path);
  return load_zone(s, t, d);
}

inline Network load_zone_binary(const std::string& stops_path, const std::string& bin_path) {
  auto s = detail::open_in(stops_path);
  auto b = detail::open_in(bin_path, std::ios::in | std::ios::binary);
  return load_zone_binary(s, b);
}

}  // namespace mt
