#pragma once

#include <stdexcept>
#include <string>

namespace lesionmetrics {

/// Raised for malformed inputs and violated data contracts (bad files,
/// mismatched grids, invalid specs). The CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lesionmetrics
