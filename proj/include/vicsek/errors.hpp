#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vicsek {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidRatio : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Thrown before any large allocation.  `required` is the offending #W_n as a decimal string.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::string required)
      : Error(what), required_(std::move(required)) {}
  const std::string& required() const { return required_; }

 private:
  std::string required_;
};

class ScaleMismatch : public Error {
 public:
  using Error::Error;
};

class LevelError : public Error {
 public:
  using Error::Error;
};

class RegionError : public Error {
 public:
  using Error::Error;
};

class DepthError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace vicsek
