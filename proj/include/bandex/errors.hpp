#ifndef BANDEX_ERRORS_HPP
#define BANDEX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bandex {

// Bad input data: unreadable/malformed files, invalid config values,
// inconsistent corpus contents.  CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: unstable recursions, singular systems, NaN blowups.
// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training failure: divergence, rejected models, insufficient samples.
// CLI maps this to exit code 3 as well.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bandex

#endif
