#pragma once

#include <string>

namespace drivestat {

/// Shortest general-format rendering with 9 significant digits (CSV output).
std::string format_g9(double v);

}  // namespace drivestat
