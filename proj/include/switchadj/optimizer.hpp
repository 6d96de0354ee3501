#pragma once

#include <functional>

#include <Eigen/Dense>

namespace switchadj {

/// A smooth objective to be maximized. `gradient` and `hessian` are optional;
/// missing derivatives are replaced by central finite differences.
struct smooth_objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

struct optimizer_options {
  double gradient_tolerance = 1e-8;
  double relative_tolerance = 1e-12;
  int max_iterations = 200;
  int max_halvings = 60;
};

struct optimum {
  Eigen::VectorXd argmax;
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  int iterations = 0;
  bool converged = false;
};

/// Newton ascent with step-halving. When the Hessian is not negative
/// definite the step is damped toward steepest ascent until it is.
/// Throws fit_error on non-finite input and convergence_error when the
/// iteration cap is reached.
optimum maximize(const smooth_objective& objective, Eigen::VectorXd start,
                 optimizer_options options = {});

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double step = 1e-6);

}  // namespace switchadj
