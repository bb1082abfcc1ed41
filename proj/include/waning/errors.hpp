#pragma once

#include <stdexcept>
#include <string>

namespace waning {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter (or configuration value) violates its documented range.
class ParameterError : public Error
{
 public:
  ParameterError(std::string name, const std::string& what)
      : Error(what)
      , name_(std::move(name))
  {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class QuadratureError : public Error
{
 public:
  using Error::Error;
};

class SimulationError : public Error
{
 public:
  using Error::Error;
};

}  // namespace waning
