#pragma once

#include <string>

namespace relkep {

// Shortest decimal representation that round-trips to the same double.
// All CSV/JSON output goes through this so repeated runs are byte-identical.
std::string format_double(double v);

}  // namespace relkep
