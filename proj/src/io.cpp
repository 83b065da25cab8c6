#include "drivestat/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "drivestat/error.hpp"
#include "drivestat/format.hpp"
#include "drivestat/log.hpp"

namespace drivestat {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void fail_row(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

PointSet TripData::accelerations() const {
  PointSet p(2, {});
  p.coords.reserve(2 * size());
  for (std::size_t i = 0; i < size(); ++i) {
    p.coords.push_back(ax[i]);
    p.coords.push_back(ay[i]);
  }
  return p;
}

PointSet TripData::with_velocity() const {
  if (!has_vx) throw DataError("input has no vx column");
  PointSet p(3, {});
  p.coords.reserve(3 * size());
  for (std::size_t i = 0; i < size(); ++i) {
    p.coords.push_back(ax[i]);
    p.coords.push_back(ay[i]);
    p.coords.push_back(vx[i]);
  }
  return p;
}

TripData read_trips_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty input: missing header");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  // Column positions of t, ax, ay, vx.
  std::array<int, 4> pos{-1, -1, -1, -1};
  constexpr std::array<std::string_view, 4> names{"t", "ax", "ay", "vx"};
  const auto header = split_fields(line);
  for (std::size_t c = 0; c < header.size(); ++c) {
    bool known = false;
    for (std::size_t k = 0; k < names.size(); ++k)
      if (header[c] == names[k]) {
        if (pos[k] >= 0) throw DataError("duplicate column '" + std::string(names[k]) + "' in header");
        pos[k] = static_cast<int>(c);
        known = true;
      }
    if (!known) warn("ignoring unknown column '" + std::string(header[c]) + "'");
  }
  for (std::size_t k = 0; k < 3; ++k)
    if (pos[k] < 0) throw DataError("header lacks required column '" + std::string(names[k]) + "'");

  TripData data;
  data.has_vx = pos[3] >= 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      fail_row(line_no, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    std::array<double, 4> v{};
    for (std::size_t k = 0; k < 4; ++k) {
      if (pos[k] < 0) continue;
      const auto parsed = parse_double(fields[static_cast<std::size_t>(pos[k])]);
      if (!parsed) fail_row(line_no, "column '" + std::string(names[k]) + "' is not a finite number");
      v[k] = *parsed;
    }
    if (data.has_vx && v[3] < 0.0) fail_row(line_no, "negative vx");
    data.t.push_back(v[0]);
    data.ax.push_back(v[1]);
    data.ay.push_back(v[2]);
    if (data.has_vx) data.vx.push_back(v[3]);
  }
  if (data.size() == 0) throw DataError("input holds no records");
  return data;
}

TripData read_trips_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_trips_csv(in);
}

void write_trips_csv(std::ostream& out, std::span<const TripRecord> records) {
  out << "t,ax,ay,vx\n";
  for (const auto& r : records)
    out << format_g9(r.t) << ',' << format_g9(r.ax) << ',' << format_g9(r.ay) << ',' << format_g9(r.vx) << '\n';
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace drivestat
