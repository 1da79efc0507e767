#pragma once

#include <stdexcept>
#include <string>

namespace attrmtl {

// Data-borne failures: malformed files, invariant-violating inputs,
// dimension mismatches. CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimizer failures: step underflow, factorization breakdown,
// iteration caps hit without convergence. CLI maps these to exit code 3.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad command-line usage. CLI maps these to exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace attrmtl
