#pragma once

#include <stdexcept>

namespace memv {

// Invalid flag/config combinations and bad user requests. CLI exit code 2.
class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, inconsistent, or unreadable input data. CLI exit code 3.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerically degenerate computation (no meaningful result exists). CLI exit code 4.
class degeneracy_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace memv
