#pragma once

#include <string>
#include <vector>

#include "avgkit/system.hpp"

namespace avgkit {

// A system-definition file (JSON; see docs/system-format.md):
//   { "name": ..., "description": ...,
//     "n": int, "T": number | "2pi", "k": int,
//     "F": [ [expr, ...n], ...k ] }
struct SystemFile {
  std::string path;
  std::string name;
  std::string description;
  System system;
};

struct SystemFileError : Error {
  using Error::Error;
};

// Loads and fully validates a system file (shapes, expression parses,
// T > 0, numeric periodicity check). Throws SystemFileError with the file
// location and cause on the first problem.
SystemFile load_system_file(const std::string& path);

// Non-throwing validation: every problem found, with its location.
struct CheckIssue {
  std::string where;  // e.g. "F[1][0]" or "T"
  std::string what;
};
std::vector<CheckIssue> check_system_file(const std::string& path);

}  // namespace avgkit
