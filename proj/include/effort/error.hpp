#pragma once

#include <stdexcept>
#include <string>

namespace effort {

// Exit-status classes used by the CLI. Library code throws the narrowest one.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class DataError : public Error {
public:
  using Error::Error;
};

class ComputationError : public Error {
public:
  using Error::Error;
};

class DimensionError : public ComputationError {
public:
  using ComputationError::ComputationError;
};

class DefinitenessError : public ComputationError {
public:
  using ComputationError::ComputationError;
};

class MetricError : public ComputationError {
public:
  using ComputationError::ComputationError;
};

} // namespace effort
