#include "switchadj/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/core.h>

#include "switchadj/errors.hpp"

namespace switchadj {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::MatrixXd finite_difference_hessian(const smooth_objective& obj, const Eigen::VectorXd& x) {
  const Eigen::Index p = x.size();
  Eigen::MatrixXd h(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd up = x, down = x;
    up[j] += step;
    down[j] -= step;
    h.col(j) = (obj.gradient(up) - obj.gradient(down)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

// Solve (-H) d = g, damping -H with a ridge until it is positive definite.
Eigen::VectorXd ascent_direction(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient) {
  const Eigen::Index p = gradient.size();
  Eigen::MatrixXd info = -hessian;
  double ridge = 0.0;
  const double base = std::max(1e-8, info.diagonal().cwiseAbs().maxCoeff() * 1e-8);
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(info + ridge * Eigen::MatrixXd::Identity(p, p));
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd d = llt.solve(gradient);
      if (all_finite(d) && d.dot(gradient) > 0.0) return d;
    }
    ridge = ridge == 0.0 ? base : ridge * 10.0;
  }
  return gradient;
}

}  // namespace

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd up = x, down = x;
    up[j] += step;
    down[j] -= step;
    g[j] = (f(up) - f(down)) / (2.0 * step);
  }
  return g;
}

optimum maximize(const smooth_objective& objective_in, Eigen::VectorXd start,
                 optimizer_options options) {
  smooth_objective obj = objective_in;
  if (!obj.gradient) {
    obj.gradient = [f = obj.value](const Eigen::VectorXd& x) {
      return finite_difference_gradient(f, x);
    };
  }
  auto hessian_at = [&](const Eigen::VectorXd& x) {
    return obj.hessian ? obj.hessian(x) : finite_difference_hessian(obj, x);
  };

  optimum out;
  out.argmax = std::move(start);
  out.value = obj.value(out.argmax);
  out.gradient = obj.gradient(out.argmax);
  if (!std::isfinite(out.value) || !all_finite(out.gradient)) {
    throw fit_error("objective or gradient is not finite at the start point");
  }

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    out.iterations = iter - 1;
    if (out.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      out.converged = true;
      break;
    }
    out.hessian = hessian_at(out.argmax);
    const Eigen::VectorXd direction = ascent_direction(out.hessian, out.gradient);

    // Newton decrement: when the predicted gain is below the resolution of the
    // objective, the line search can no longer tell steps apart. Take the full
    // step (quadratic convergence makes it accurate to round-off) and stop.
    const double resolution = options.relative_tolerance * std::max(1.0, std::abs(out.value));
    if (0.5 * direction.dot(out.gradient) <= resolution) {
      const Eigen::VectorXd last = out.argmax + direction;
      const double last_value = obj.value(last);
      if (std::isfinite(last_value) && last_value >= out.value - resolution) {
        const Eigen::VectorXd last_gradient = obj.gradient(last);
        if (all_finite(last_gradient)) {
          out.argmax = last;
          out.value = last_value;
          out.gradient = last_gradient;
          out.iterations = iter;
        }
      }
      out.converged = true;
      break;
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double candidate_value = 0.0;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      candidate = out.argmax + step * direction;
      candidate_value = obj.value(candidate);
      if (std::isfinite(candidate_value) && candidate_value >= out.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent possible at machine precision: we are at the optimum up to
      // round-off in the objective.
      out.converged = true;
      break;
    }
    const double change = candidate_value - out.value;
    out.argmax = std::move(candidate);
    out.value = candidate_value;
    out.gradient = obj.gradient(out.argmax);
    out.iterations = iter;
    if (!all_finite(out.gradient)) throw fit_error("gradient became non-finite during ascent");
    // A negligible gain only signals convergence after a full Newton step;
    // after a halved step the iterate can still be far from the optimum.
    if (step == 1.0 && change <= resolution) {
      out.converged = true;
      break;
    }
    if (iter == options.max_iterations) {
      throw convergence_error(
          fmt::format("no convergence after {} iterations (gradient max-norm {:.3g})",
                      options.max_iterations, out.gradient.lpNorm<Eigen::Infinity>()),
          to_std(out.argmax));
    }
  }
  out.hessian = hessian_at(out.argmax);
  return out;
}

}  // namespace switchadj
