#pragma once

#include <stdexcept>
#include <string>

namespace mod1 {

// Iterative solver failed to reach its tolerance within the iteration budget.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file. line is 1-based; 0 means the problem is not tied to a line.
struct io_error : std::runtime_error {
  int line;
  io_error(const std::string& msg, int line_ = 0)
      : std::runtime_error(line_ > 0 ? msg + " (line " + std::to_string(line_) + ")" : msg),
        line(line_) {}
};

}  // namespace mod1
