#pragma once

#include <stdexcept>
#include <string>

namespace hystermag {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Configuration problem. `path()` is the JSON pointer of the offending key
/// when the error comes from a config file.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string path = {})
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class BuildError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Material inversion failed at an integration point; the time stepper
/// reacts by subdividing the step.
class MaterialError : public SolverError {
 public:
  MaterialError(const std::string& what, int point) : SolverError(what), point_(point) {}
  int point() const { return point_; }

 private:
  int point_;
};

/// A time step could not be completed (Newton did not converge or the
/// material inversion failed after all subdivisions).
class StepRejected : public SolverError {
 public:
  StepRejected(const std::string& what, double time) : SolverError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace hystermag
