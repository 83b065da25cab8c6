#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace drivestat {

/// n observations of a d-dimensional vector, stored row-major.
struct PointSet {
  std::size_t dim = 1;
  std::vector<double> coords;

  PointSet() = default;
  PointSet(std::size_t d, std::vector<double> c) : dim(d), coords(std::move(c)) {}

  static PointSet univariate(std::vector<double> values) { return {1, std::move(values)}; }

  [[nodiscard]] std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  [[nodiscard]] bool empty() const { return coords.empty(); }
  [[nodiscard]] double at(std::size_t i, std::size_t axis) const { return coords[i * dim + axis]; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {coords.data() + i * dim, dim};
  }
  [[nodiscard]] std::vector<double> column(std::size_t axis) const;
};

}  // namespace drivestat
