#pragma once

#include <stdexcept>
#include <string>

namespace lrfs {

/// Raised when a covariance that must be positive-definite is not, or a
/// quantity that must be finite is not.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lrfs
