#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "switchadj/optimizer.hpp"

namespace switchadj {

/// One observation for a regression fit. `outcome` is a survival time (> 0)
/// for the AFT fit and a 0/1 label for the logistic fit; `status` is only
/// read by the AFT fit.
struct design_row {
  double outcome = 0.0;
  int status = 1;
  std::vector<double> covariates;
  double weight = 1.0;
};

/*!
 * Weibull accelerated failure time fit:
 *   log T = intercept + x' coefficients + scale * e,  e ~ standard extreme value.
 *
 * Parameter vector layout (also the covariance layout) is
 * [intercept, coefficients..., log scale].
 */
struct aft_fit {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double scale = 1.0;
  Eigen::MatrixXd covariance;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;

  double intercept_se() const;
  double coefficient_se(std::size_t j) const;
  double log_scale_se() const;

  /// exp(-exp((log t - lp) / scale)) at covariates x (empty for intercept-only).
  double survival(double t, std::span<const double> x = {}) const;
};

struct logistic_fit {
  double intercept = 0.0;
  std::vector<double> coefficients;
  Eigen::MatrixXd covariance;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;

  double coefficient_se(std::size_t j) const;
  double probability(std::span<const double> x) const;
};

/// Weighted censored Weibull AFT maximum likelihood. Zero-weight rows are
/// ignored. Throws non_identifiable_error (no weighted events),
/// singular_design_error, convergence_error, or config_error for bad input.
aft_fit fit_weibull_aft(std::span<const design_row> rows, optimizer_options options = {});

/// Weighted logistic regression. Throws non_identifiable_error for
/// single-label data and separation_error when a coefficient leaves [-30, 30].
logistic_fit fit_logistic(std::span<const design_row> rows, optimizer_options options = {});

/// Weighted Weibull AFT log-likelihood at `theta` ([intercept, coefs..., log scale]),
/// including the -log t Jacobian term. Optionally fills the analytic gradient
/// and Hessian.
double weibull_aft_log_likelihood(std::span<const design_row> rows, const Eigen::VectorXd& theta,
                                  Eigen::VectorXd* gradient = nullptr,
                                  Eigen::MatrixXd* hessian = nullptr);

inline constexpr double kSeparationBound = 30.0;

}  // namespace switchadj
