#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace orcsf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: non-finite entries, shape mismatches, empty traces.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its documented domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Roundness requested for the zero matrix.
class UndefinedRoundness : public Error {
 public:
  using Error::Error;
};

/// Power iteration did not meet its tolerance within the iteration budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_estimate, double residual)
      : Error(what), last_estimate_(last_estimate), residual_(residual) {}

  double last_estimate() const noexcept { return last_estimate_; }
  double residual() const noexcept { return residual_; }

 private:
  double last_estimate_;
  double residual_;
};

/// A zero row or column where an explicit inverse is required.
class SingularityError : public Error {
 public:
  enum class Axis { Row, Column };

  SingularityError(const std::string& what, Axis axis, std::size_t index)
      : Error(what), axis_(axis), index_(index) {}

  Axis axis() const noexcept { return axis_; }
  std::size_t index() const noexcept { return index_; }

 private:
  Axis axis_;
  std::size_t index_;
};

/// Training produced a non-finite objective or gradient.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Eigen::MatrixXd last_finite, std::size_t iteration)
      : Error(what), last_finite_(std::move(last_finite)), iteration_(iteration) {}

  const Eigen::MatrixXd& last_finite_iterate() const noexcept { return last_finite_; }
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  Eigen::MatrixXd last_finite_;
  std::size_t iteration_;
};

/// A dataset file is missing or shorter than its record layout requires.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::string file, std::uint64_t offset)
      : Error(what), file_(std::move(file)), offset_(offset) {}

  const std::string& file() const noexcept { return file_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string file_;
  std::uint64_t offset_;
};

/// A dataset record carries an impossible value (e.g. label byte > 9).
class CorruptionError : public IngestionError {
 public:
  using IngestionError::IngestionError;
};

/// Inconsistent pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace orcsf
