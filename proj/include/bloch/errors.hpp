#pragma once

#include <stdexcept>
#include <string>

namespace bloch {

// Raised when a computation meets a structurally unexpected spectrum -- a
// degeneracy of the wrong multiplicity, a branch collision during
// continuation -- as opposed to an invalid input or a numerical failure.
class AnomalyError : public std::runtime_error {
 public:
  explicit AnomalyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bloch
