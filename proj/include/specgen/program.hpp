#pragma once

#include <string>

namespace specgen {

// One corpus program. `source` is bare C (no ACSL).
struct program {
  std::string id;
  std::string source;
  std::string target_function;
  std::string category;
};

} // namespace specgen
