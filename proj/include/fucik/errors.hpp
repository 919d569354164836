#ifndef FUCIK_ERRORS_HPP
#define FUCIK_ERRORS_HPP

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fucik {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error
{
public:
  using Error::Error;
};

/// Kernel evaluated at its singularity (z = 0).
class SingularityError : public Error
{
public:
  using Error::Error;
};

/// A point was supplied outside of the computational domain.
class DomainError : public Error
{
public:
  using Error::Error;
};

class AssemblyError : public Error
{
public:
  using Error::Error;
};

/// An iterative solver exhausted its budget.
class ConvergenceError : public Error
{
public:
  using Error::Error;
};

/// Discrete principal eigenvalue is not simple.
class MultiplicityError : public Error
{
public:
  using Error::Error;
};

namespace detail {

using WarningHandler = std::function<void(std::string_view)>;

inline WarningHandler& warning_handler()
{
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "fucik: warning: " << msg << '\n';
  };
  return handler;
}

inline void warn(std::string_view msg)
{
  if (warning_handler())
    warning_handler()(msg);
}

} // namespace detail

/// Replaces the warning sink and returns the previous one.
inline detail::WarningHandler set_warning_handler(detail::WarningHandler handler)
{
  auto previous = std::move(detail::warning_handler());
  detail::warning_handler() = std::move(handler);
  return previous;
}

} // namespace fucik

#endif
