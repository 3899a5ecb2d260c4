#pragma once

#include <stdexcept>
#include <string>

namespace nela {

/// Caller supplied arguments that violate a documented precondition.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be read or did not satisfy its schema.
class LoadError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The Lasso solver exhausted its sweep budget.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double final_gap, int sweeps)
      : std::runtime_error(what), final_gap_(final_gap), sweeps_(sweeps) {}

  double final_gap() const { return final_gap_; }
  int sweeps() const { return sweeps_; }

private:
  double final_gap_;
  int sweeps_;
};

}  // namespace nela
