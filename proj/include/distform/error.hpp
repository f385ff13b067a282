#ifndef DISTFORM_ERROR_HPP_
#define DISTFORM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace distform
{

/// Malformed input: bad indices, inconsistent dimensions, schema violations.
class InvalidInput : public std::invalid_argument
{
 public:
  explicit InvalidInput(const std::string &what) : std::invalid_argument(what) {}
};

/// Numerical routine failed (SVD did not converge, non-finite state, ...).
class NumericalError : public std::runtime_error
{
 public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace distform

#endif // DISTFORM_ERROR_HPP_
