#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contactlab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed expressions, configs, arguments.
class InputError : public Error
{
  public:
    using Error::Error;
};

class ParseError : public InputError
{
  public:
    ParseError(const std::string& what, std::size_t offset)
        : InputError(what + " at offset " + std::to_string(offset)), offset_(offset)
    {}
    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

class UnknownIdentifier : public InputError
{
  public:
    explicit UnknownIdentifier(std::string name)
        : InputError("unknown identifier '" + name + "'"), name_(std::move(name))
    {}
    const std::string& name() const noexcept { return name_; }

  private:
    std::string name_;
};

/// Failures of the numerics: domain violations, singular systems, divergence.
class NumericalError : public Error
{
  public:
    using Error::Error;
};

/// log/sqrt of a non-positive value, division by zero, leaving a chart domain.
class DomainError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

/// The flat matrix (or the symplectic form) is singular at the evaluated point.
class SingularMatrixError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

} // namespace contactlab
