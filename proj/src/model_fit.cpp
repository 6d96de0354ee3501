#include "switchadj/model_fit.hpp"

#include <cmath>

#include <fmt/core.h>

#include "switchadj/errors.hpp"

namespace switchadj {

namespace {

// Positively weighted rows packed into column form, intercept column first.
struct packed_design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;  // log time (AFT) or label (logistic)
  Eigen::VectorXd status;
  Eigen::VectorXd weight;
};

packed_design pack(std::span<const design_row> rows, bool log_outcome) {
  if (rows.empty()) throw config_error("cannot fit a model to an empty design");
  const std::size_t p = rows.front().covariates.size();
  Eigen::Index n = 0;
  for (const auto& r : rows) {
    if (r.covariates.size() != p) throw config_error("covariate vectors differ in length");
    if (!(r.weight >= 0.0) || !std::isfinite(r.weight)) throw config_error("weights must be finite and nonnegative");
    if (r.weight > 0.0) ++n;
  }
  packed_design d;
  d.x.resize(n, static_cast<Eigen::Index>(p) + 1);
  d.y.resize(n);
  d.status.resize(n);
  d.weight.resize(n);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    if (r.weight == 0.0) continue;
    if (log_outcome && !(r.outcome > 0.0)) {
      throw config_error(fmt::format("survival time must be positive, got {}", r.outcome));
    }
    d.x(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) d.x(i, static_cast<Eigen::Index>(j) + 1) = r.covariates[j];
    d.y[i] = log_outcome ? std::log(r.outcome) : r.outcome;
    d.status[i] = r.status != 0 ? 1.0 : 0.0;
    d.weight[i] = r.weight;
    ++i;
  }
  return d;
}

void require_full_rank(const Eigen::MatrixXd& x) {
  if (x.rows() < x.cols()) throw singular_design_error("fewer positively weighted rows than parameters");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) {
    throw singular_design_error(
        fmt::format("design matrix has rank {} < {} columns", qr.rank(), x.cols()));
  }
}

double aft_log_likelihood(const packed_design& d, const Eigen::VectorXd& theta,
                          Eigen::VectorXd* gradient, Eigen::MatrixXd* hessian) {
  const Eigen::Index p = d.x.cols();
  const double log_sigma = theta[p];
  const double sigma = std::exp(log_sigma);
  const Eigen::VectorXd lp = d.x * theta.head(p);
  if (gradient) gradient->setZero(p + 1);
  if (hessian) hessian->setZero(p + 1, p + 1);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    const double w = d.weight[i];
    const double delta = d.status[i];
    const double z = (d.y[i] - lp[i]) / sigma;
    const double ez = std::exp(z);
    ll += w * (delta * (z - log_sigma - d.y[i]) - ez);
    if (gradient) {
      gradient->head(p) += (w * (ez - delta) / sigma) * d.x.row(i).transpose();
      (*gradient)[p] += w * (z * (ez - delta) - delta);
    }
    if (hessian) {
      const auto xi = d.x.row(i);
      hessian->topLeftCorner(p, p).noalias() -= (w * ez / (sigma * sigma)) * xi.transpose() * xi;
      const Eigen::VectorXd cross = (-w * (z * ez + ez - delta) / sigma) * xi.transpose();
      hessian->col(p).head(p) += cross;
      hessian->row(p).head(p) += cross.transpose();
      (*hessian)(p, p) -= w * (z * (ez - delta) + z * z * ez);
    }
  }
  return ll;
}

Eigen::MatrixXd invert_information(const Eigen::MatrixXd& hessian) {
  const Eigen::MatrixXd info = -hessian;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  return 0.5 * (cov + cov.transpose());
}

double safe_se(const Eigen::MatrixXd& cov, Eigen::Index j) {
  if (j >= cov.rows()) throw std::out_of_range("parameter index out of range");
  return std::sqrt(std::max(0.0, cov(j, j)));
}

}  // namespace

double aft_fit::intercept_se() const { return safe_se(covariance, 0); }
double aft_fit::coefficient_se(std::size_t j) const {
  return safe_se(covariance, static_cast<Eigen::Index>(j) + 1);
}
double aft_fit::log_scale_se() const {
  return safe_se(covariance, static_cast<Eigen::Index>(coefficients.size()) + 1);
}

double aft_fit::survival(double t, std::span<const double> x) const {
  if (x.size() != coefficients.size()) throw config_error("covariate length does not match the fit");
  if (t <= 0.0) return 1.0;
  double lp = intercept;
  for (std::size_t j = 0; j < x.size(); ++j) lp += coefficients[j] * x[j];
  return std::exp(-std::exp((std::log(t) - lp) / scale));
}

double logistic_fit::coefficient_se(std::size_t j) const {
  return safe_se(covariance, static_cast<Eigen::Index>(j) + 1);
}

double logistic_fit::probability(std::span<const double> x) const {
  if (x.size() != coefficients.size()) throw config_error("covariate length does not match the fit");
  double eta = intercept;
  for (std::size_t j = 0; j < x.size(); ++j) eta += coefficients[j] * x[j];
  return 1.0 / (1.0 + std::exp(-eta));
}

double weibull_aft_log_likelihood(std::span<const design_row> rows, const Eigen::VectorXd& theta,
                                  Eigen::VectorXd* gradient, Eigen::MatrixXd* hessian) {
  const packed_design d = pack(rows, true);
  if (theta.size() != d.x.cols() + 1) throw config_error("parameter vector has the wrong length");
  return aft_log_likelihood(d, theta, gradient, hessian);
}

aft_fit fit_weibull_aft(std::span<const design_row> rows, optimizer_options options) {
  const packed_design d = pack(rows, true);
  const Eigen::Index p = d.x.cols();

  double event_weight = 0.0, weighted_time = 0.0;
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    if (d.status[i] > 0.0) {
      event_weight += d.weight[i];
      weighted_time += d.weight[i] * std::exp(d.y[i]);
    }
  }
  if (event_weight <= 0.0) throw non_identifiable_error("Weibull AFT fit has no events with positive weight");
  require_full_rank(d.x);

  Eigen::VectorXd start = Eigen::VectorXd::Zero(p + 1);
  start[0] = std::log(weighted_time / event_weight);

  smooth_objective objective;
  objective.value = [&d](const Eigen::VectorXd& th) { return aft_log_likelihood(d, th, nullptr, nullptr); };
  objective.gradient = [&d](const Eigen::VectorXd& th) {
    Eigen::VectorXd g;
    aft_log_likelihood(d, th, &g, nullptr);
    return g;
  };
  objective.hessian = [&d](const Eigen::VectorXd& th) {
    Eigen::MatrixXd h;
    aft_log_likelihood(d, th, nullptr, &h);
    return h;
  };
  const optimum opt = maximize(objective, start, options);

  aft_fit fit;
  fit.intercept = opt.argmax[0];
  fit.coefficients.assign(opt.argmax.data() + 1, opt.argmax.data() + p);
  fit.scale = std::exp(opt.argmax[p]);
  fit.covariance = invert_information(opt.hessian);
  fit.log_likelihood = opt.value;
  fit.converged = opt.converged;
  fit.iterations = opt.iterations;
  fit.gradient_norm = opt.gradient.lpNorm<Eigen::Infinity>();
  return fit;
}

logistic_fit fit_logistic(std::span<const design_row> rows, optimizer_options options) {
  const packed_design d = pack(rows, false);
  const Eigen::Index p = d.x.cols();

  double w1 = 0.0, w0 = 0.0;
  for (Eigen::Index i = 0; i < d.y.size(); ++i) {
    if (d.y[i] != 0.0 && d.y[i] != 1.0) throw config_error("logistic labels must be 0 or 1");
    (d.y[i] == 1.0 ? w1 : w0) += d.weight[i];
  }
  if (w1 <= 0.0 || w0 <= 0.0) throw non_identifiable_error("logistic fit needs both labels among weighted rows");
  require_full_rank(d.x);

  auto check_bound = [](const Eigen::VectorXd& beta) {
    if (beta.cwiseAbs().maxCoeff() > kSeparationBound) {
      throw separation_error(
          fmt::format("logistic coefficients diverge beyond {} (separation)", kSeparationBound));
    }
  };

  smooth_objective objective;
  objective.value = [&](const Eigen::VectorXd& beta) {
    check_bound(beta);
    const Eigen::VectorXd eta = d.x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      // log(1 + e^eta) evaluated without overflow
      const double softplus = eta[i] > 0.0 ? eta[i] + std::log1p(std::exp(-eta[i])) : std::log1p(std::exp(eta[i]));
      ll += d.weight[i] * (d.y[i] * eta[i] - softplus);
    }
    return ll;
  };
  objective.gradient = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.x * beta;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      resid[i] = d.weight[i] * (d.y[i] - 1.0 / (1.0 + std::exp(-eta[i])));
    }
    return Eigen::VectorXd(d.x.transpose() * resid);
  };
  objective.hessian = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.x * beta;
    Eigen::VectorXd v(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double pr = 1.0 / (1.0 + std::exp(-eta[i]));
      v[i] = d.weight[i] * pr * (1.0 - pr);
    }
    return Eigen::MatrixXd(-(d.x.transpose() * v.asDiagonal() * d.x));
  };

  const optimum opt = maximize(objective, Eigen::VectorXd::Zero(p), options);
  check_bound(opt.argmax);

  logistic_fit fit;
  fit.intercept = opt.argmax[0];
  fit.coefficients.assign(opt.argmax.data() + 1, opt.argmax.data() + p);
  fit.covariance = invert_information(opt.hessian);
  fit.log_likelihood = opt.value;
  fit.converged = opt.converged;
  fit.iterations = opt.iterations;
  fit.gradient_norm = opt.gradient.lpNorm<Eigen::Infinity>();
  return fit;
}

}  // namespace switchadj
