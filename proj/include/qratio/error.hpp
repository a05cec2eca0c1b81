#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace qratio {

// Six significant figures, for numbers quoted in error messages.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Base of every error thrown by the toolkit. kind() is the machine-readable
// tag the CLI puts into its error JSON.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

class LookupError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "lookup"; }
};

class ResolutionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "resolution"; }
};

class StepSizeError : public Error {
 public:
  StepSizeError(const std::string& what, double suggested_dt)
      : Error(what), suggested_dt_(suggested_dt) {}
  const char* kind() const noexcept override { return "step_size"; }
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

class BoundaryError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "boundary"; }
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "convergence"; }
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  const char* kind() const noexcept override { return "config"; }
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace qratio
