#include "drivestat/types.hpp"

namespace drivestat {

std::vector<double> PointSet::column(std::size_t axis) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = coords[i * dim + axis];
  return out;
}

}  // namespace drivestat
