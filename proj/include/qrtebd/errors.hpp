#ifndef QRTEBD_ERRORS_HPP
#define QRTEBD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qrtebd {

// Error taxonomy; the CLI maps these onto exit codes.
// ShapeError / InputError -> 1, NumericError -> 2, CapacityError -> 3.

class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qrtebd

#endif
