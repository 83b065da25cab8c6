#pragma once

// Trip CSV format: header `t,ax,ay[,vx]`, one record per line, '.' decimal
// separator. Unknown columns are ignored with a warning.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "drivestat/synth.hpp"
#include "drivestat/types.hpp"

namespace drivestat {

struct TripData {
  std::vector<double> t;
  std::vector<double> ax;
  std::vector<double> ay;
  std::vector<double> vx;  ///< empty when the input has no vx column
  bool has_vx = false;

  [[nodiscard]] std::size_t size() const { return t.size(); }
  /// (ax, ay) rows.
  [[nodiscard]] PointSet accelerations() const;
  /// (ax, ay, vx) rows; throws DataError without a vx column.
  [[nodiscard]] PointSet with_velocity() const;
};

/// Throws DataError naming the 1-based line number of the first bad row.
TripData read_trips_csv(std::istream& in);
TripData read_trips_csv(const std::filesystem::path& path);

void write_trips_csv(std::ostream& out, std::span<const TripRecord> records);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace drivestat
