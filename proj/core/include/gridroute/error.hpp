#pragma once

#include <stdexcept>
#include <string>

namespace gridroute {

// Input or document that breaks a domain invariant.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// NaN/Inf in network outputs, losses or gradients.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gridroute
