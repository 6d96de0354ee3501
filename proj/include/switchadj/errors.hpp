#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace switchadj {

/// Root of every error raised by the library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, CLI value, or CSV schema.
class config_error : public error {
public:
  using error::error;
};

class io_error : public error {
public:
  using error::error;
};

/// Base for model-fitting failures (maps to exit code 3 in `adjust`).
class fit_error : public error {
public:
  using error::error;
};

class non_identifiable_error : public fit_error {
public:
  using fit_error::fit_error;
};

class singular_design_error : public fit_error {
public:
  using fit_error::fit_error;
};

class separation_error : public fit_error {
public:
  using fit_error::fit_error;
};

/// Optimizer gave up; carries the last iterate so callers can inspect it.
class convergence_error : public fit_error {
public:
  convergence_error(const std::string& what, std::vector<double> last_iterate)
      : fit_error(what), last_iterate_(std::move(last_iterate)) {}
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
  std::vector<double> last_iterate_;
};

class extrapolation_required_error : public error {
public:
  using error::error;
};

class sampling_error : public error {
public:
  using error::error;
};

class quadrature_error : public error {
public:
  using error::error;
};

class bootstrap_error : public error {
public:
  using error::error;
};

}  // namespace switchadj
