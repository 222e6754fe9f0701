#pragma once

#include <stdexcept>
#include <string>

namespace priorforge {

// Base for every failure raised by the library. Messages name the offending
// field or dimension so CLI users can act on them directly.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class NumericError : public Error
{
public:
  using Error::Error;
};

} // namespace priorforge
