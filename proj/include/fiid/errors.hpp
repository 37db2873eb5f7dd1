#pragma once

#include <stdexcept>
#include <string>

namespace fiid {

/// A precondition on caller-supplied parameters failed.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical guard tripped: an estimate could not be formed or a
/// quantity left its admissible range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

}  // namespace fiid
