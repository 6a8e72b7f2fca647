#include "sphirf/field_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sphirf/error.hpp"

namespace sphirf {
namespace {

constexpr int kMaxListedMissing = 10;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

[[noreturn]] void fail(const std::string& source, long line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view cell, const char* column, const std::string& source,
                    long line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    fail(source, line, std::string("cannot parse ") + column + " '" + std::string(cell) + "'");
  }
  if (!std::isfinite(v)) fail(source, line, std::string(column) + " is not finite");
  return v;
}

long parse_time(std::string_view cell, const std::string& source, long line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || v < 0) {
    fail(source, line, "t must be a non-negative integer, got '" + std::string(cell) + "'");
  }
  return v;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Cell {
  long line;
  double value;
};

}  // namespace

SampledField parse_field_csv(std::istream& in, const std::string& source) {
  std::string text;
  long line_no = 0;
  if (!std::getline(in, text)) fail(source, 1, "missing header");
  ++line_no;
  if (trim(text) != kFieldCsvHeader) {
    fail(source, line_no, std::string("expected header '") + kFieldCsvHeader + "'");
  }

  std::vector<std::string> ids;
  std::vector<SpherePoint> locations;
  std::vector<std::pair<double, double>> degrees;
  std::unordered_map<std::string, int> index_of;
  std::vector<std::map<long, Cell>> cells;
  long t_min = 0;
  long t_max = -1;

  while (std::getline(in, text)) {
    ++line_no;
    if (trim(text).empty()) continue;
    const auto parts = split(text);
    if (parts.size() != 5) {
      fail(source, line_no, "expected 5 columns, found " + std::to_string(parts.size()));
    }
    if (parts[0].empty()) fail(source, line_no, "empty location_id");
    const double lat = parse_double(parts[1], "lat_deg", source, line_no);
    const double lon = parse_double(parts[2], "lon_deg", source, line_no);
    const long t = parse_time(parts[3], source, line_no);
    const double value = parse_double(parts[4], "value", source, line_no);
    if (lat < -90.0 || lat > 90.0) fail(source, line_no, "lat_deg outside [-90, 90]");
    if (lon < -180.0 || lon >= 360.0) fail(source, line_no, "lon_deg outside [-180, 360)");

    const std::string id(parts[0]);
    auto [it, inserted] = index_of.emplace(id, static_cast<int>(ids.size()));
    if (inserted) {
      ids.push_back(id);
      locations.push_back(SpherePoint::from_degrees(lat, lon));
      degrees.emplace_back(lat, lon);
      cells.emplace_back();
    } else if (degrees[it->second] != std::pair{lat, lon}) {
      fail(source, line_no, "location '" + id + "' repeated with different coordinates");
    }
    auto& row = cells[it->second];
    const auto [cell, fresh] = row.emplace(t, Cell{line_no, value});
    if (!fresh) {
      fail(source, line_no,
           "duplicate cell (" + id + ", " + std::to_string(t) + "), first seen on line " +
               std::to_string(cell->second.line));
    }
    if (t_max < t_min) {
      t_min = t_max = t;
    } else {
      t_min = std::min(t_min, t);
      t_max = std::max(t_max, t);
    }
  }
  if (ids.empty()) fail(source, line_no, "no data rows");

  const long n_times = t_max - t_min + 1;
  std::vector<std::string> missing;
  long missing_total = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (static_cast<long>(cells[i].size()) == n_times) continue;
    for (long t = t_min; t <= t_max; ++t) {
      if (cells[i].count(t)) continue;
      ++missing_total;
      if (static_cast<int>(missing.size()) < kMaxListedMissing) {
        missing.push_back("(" + ids[i] + ", " + std::to_string(t) + ")");
      }
    }
  }
  if (missing_total > 0) {
    std::string msg = source + ": incomplete location x time rectangle, " +
                      std::to_string(missing_total) + " missing cell(s):";
    for (const auto& m : missing) msg += " " + m;
    if (missing_total > kMaxListedMissing) msg += " ...";
    throw ParseError(msg);
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(ids.size()), n_times);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (const auto& [t, cell] : cells[i]) values(static_cast<Eigen::Index>(i), t - t_min) = cell.value;
  }
  std::vector<long> times(static_cast<std::size_t>(n_times));
  for (long k = 0; k < n_times; ++k) times[k] = t_min + k;
  return SampledField(std::move(locations), std::move(times), std::move(values), std::move(ids));
}

SampledField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field file " + path.string());
  return parse_field_csv(in, path.string());
}

void format_field_csv(const SampledField& field, std::ostream& out) {
  if (field.n_locations() == 0 || field.n_times() == 0) {
    throw ConfigError("refusing to write an empty field");
  }
  out << kFieldCsvHeader << '\n';
  for (int i = 0; i < field.n_locations(); ++i) {
    const SpherePoint& p = field.locations()[i];
    if (field.ids()[i].empty() ||
        field.ids()[i].find_first_of(",\n\r") != std::string::npos) {
      throw ConfigError("location id '" + field.ids()[i] + "' cannot be written to CSV");
    }
    const std::string prefix =
        field.ids()[i] + ',' + number(p.lat_deg()) + ',' + number(p.lon_deg()) + ',';
    for (int a = 0; a < field.n_times(); ++a) {
      out << prefix << field.times()[a] << ',' << number(field.values()(i, a)) << '\n';
    }
  }
}

void write_field_csv(const SampledField& field, const std::filesystem::path& path) {
  std::ostringstream buffer;
  format_field_csv(field, buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << buffer.str();
  if (!out.flush()) throw IoError("write failed for " + path.string());
}

}  // namespace sphirf
