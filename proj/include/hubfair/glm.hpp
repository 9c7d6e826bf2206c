#pragma once

// Gaussian-family GLM fitting by iteratively reweighted least squares with a
// log or identity link, plus Wald inference on linear combinations.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hubfair/design.hpp"
#include "hubfair/error.hpp"
#include "hubfair/text.hpp"

namespace hubfair {

enum class Link { Identity, Log };

inline constexpr double kZ975 = 1.959963984540054;

inline std::string_view to_string(Link l) { return l == Link::Log ? "log" : "identity"; }

struct GlmOptions {
  Link link = Link::Log;
  double tol = 1e-8;
  int max_iter = 100;
  bool fit_null = true;  // also fit the intercept-only model for loglik_null
};

struct FitResult {
  std::vector<std::string> labels;
  Link link = Link::Log;
  Eigen::VectorXd beta;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd ci_lo;  // link scale, beta -/+ 1.959964 se
  Eigen::VectorXd ci_hi;
  Eigen::VectorXd fitted;  // response-scale means at beta
  double dispersion = 0.0;
  double deviance = 0.0;
  double loglik = 0.0;
  double loglik_null = 0.0;
  double pseudo_r2_cs = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  bool converged = false;
  int iterations = 0;
};

class NonConvergence : public AnalysisError {
 public:
  NonConvergence(Eigen::VectorXd last_beta, int iterations)
      : AnalysisError("IRLS did not converge after " + std::to_string(iterations) + " iterations"),
        last_beta_(std::move(last_beta)),
        iterations_(iterations) {}

  const Eigen::VectorXd& last_beta() const noexcept { return last_beta_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Eigen::VectorXd last_beta_;
  int iterations_;
};

inline double two_sided_normal_p(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

namespace detail {

inline Eigen::VectorXd link_inverse(Link link, const Eigen::VectorXd& eta) {
  return link == Link::Log ? Eigen::VectorXd(eta.array().exp()) : eta;
}

// Columns that are linear combinations of earlier ones, found by a pivoted QR
// of the column-normalized matrix.
inline std::vector<std::size_t> dependent_columns(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd scaled = X;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double norm = scaled.col(j).norm();
    if (norm > 0.0) scaled.col(j) /= norm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled.rows(), scaled.cols());
  qr.setThreshold(1e-10);
  qr.compute(scaled);
  std::vector<std::size_t> out;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = qr.rank(); k < scaled.cols(); ++k)
    out.push_back(static_cast<std::size_t>(perm[k]));
  std::sort(out.begin(), out.end());
  return out;
}

inline Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                                      const Eigen::VectorXd& w) {
  const Eigen::VectorXd sw = w.array().sqrt();
  Eigen::MatrixXd Xw = sw.asDiagonal() * X;
  Eigen::VectorXd zw = sw.cwiseProduct(z);
  return Xw.householderQr().solve(zw);
}

inline double gaussian_loglik(double rss, std::size_t n) {
  const double nn = static_cast<double>(n);
  return -0.5 * nn * (std::log(2.0 * std::numbers::pi * rss / nn) + 1.0);
}

}  // namespace detail

inline FitResult fit_glm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::vector<std::string> labels, const GlmOptions& opt = {}) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (y.size() != n) throw AnalysisError("fit_glm: y length does not match X rows");
  if (n <= p) throw AnalysisError("fit_glm: need n > p");
  if (static_cast<Eigen::Index>(labels.size()) != p) {
    labels.clear();
    for (Eigen::Index j = 0; j < p; ++j) labels.push_back("x" + std::to_string(j));
  }
  if (!y.allFinite() || !X.allFinite()) throw AnalysisError("fit_glm: non-finite input");

  if (auto dep = detail::dependent_columns(X); !dep.empty()) {
    std::vector<std::string> names;
    for (auto j : dep) names.push_back(labels[j]);
    throw RankDeficient(std::move(names));
  }

  const bool log_link = opt.link == Link::Log;
  Eigen::VectorXd mu(n), eta(n);
  if (log_link) {
    const double ybar = y.mean();
    if (!(ybar > 0.0)) throw AnalysisError("fit_glm: log link needs a positive mean response");
    for (Eigen::Index i = 0; i < n; ++i) mu[i] = std::max(y[i], ybar / 10.0) + 0.1;
    eta = mu.array().log();
  } else {
    mu = y;
    eta = y;
  }

  auto deviance_of = [&](const Eigen::VectorXd& m) { return (y - m).squaredNorm(); };

  double dev_old = deviance_of(mu);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  bool have_beta = false;
  bool converged = false;
  int iter = 0;
  for (iter = 1; iter <= opt.max_iter; ++iter) {
    Eigen::VectorXd w(n), z(n);
    if (log_link) {
      w = mu.array().square();
      z = eta.array() + (y - mu).array() / mu.array();
    } else {
      w.setOnes();
      z = y;
    }
    Eigen::VectorXd beta_new = detail::weighted_solve(X, z, w);
    Eigen::VectorXd eta_new = X * beta_new;
    Eigen::VectorXd mu_new = detail::link_inverse(opt.link, eta_new);
    double dev = deviance_of(mu_new);

    auto invalid = [&] {
      return !std::isfinite(dev) || (log_link && (mu_new.array() <= 0.0).any());
    };
    if (have_beta) {
      for (int h = 0; h < 10 && (invalid() || dev > dev_old); ++h) {
        beta_new = 0.5 * (beta + beta_new);
        eta_new = X * beta_new;
        mu_new = detail::link_inverse(opt.link, eta_new);
        dev = deviance_of(mu_new);
      }
    }
    if (invalid()) {
      throw AnalysisError("fit_glm: fitted means left the valid range under the " +
                          std::string(to_string(opt.link)) + " link after step-halving");
    }
    beta = std::move(beta_new);
    eta = std::move(eta_new);
    mu = std::move(mu_new);
    have_beta = true;
    const bool done = std::abs(dev - dev_old) / (std::abs(dev) + 0.1) < opt.tol;
    dev_old = dev;
    if (done) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NonConvergence(beta, opt.max_iter);

  FitResult fit;
  fit.labels = std::move(labels);
  fit.link = opt.link;
  fit.beta = beta;
  fit.fitted = mu;
  fit.n = static_cast<std::size_t>(n);
  fit.p = static_cast<std::size_t>(p);
  fit.converged = true;
  fit.iterations = iter;
  fit.deviance = deviance_of(mu);
  fit.dispersion = fit.deviance / static_cast<double>(n - p);

  // (X'WX)^-1 = R^-1 R^-T from the QR of W^(1/2) X at the solution.
  Eigen::VectorXd w = log_link ? Eigen::VectorXd(mu.array().square()) : Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd sw = w.array().sqrt();
  Eigen::MatrixXd Xw = sw.asDiagonal() * X;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xw);
  Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd vcov = fit.dispersion * (Rinv * Rinv.transpose());
  fit.vcov = 0.5 * (vcov + vcov.transpose());

  fit.se = fit.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.z = fit.beta.cwiseQuotient(fit.se);
  fit.ci_lo = fit.beta - kZ975 * fit.se;
  fit.ci_hi = fit.beta + kZ975 * fit.se;
  fit.loglik = detail::gaussian_loglik(fit.deviance, fit.n);

  if (opt.fit_null) {
    const bool intercept_only = p == 1 && (X.col(0).array() == 1.0).all();
    if (intercept_only) {
      fit.loglik_null = fit.loglik;
    } else {
      GlmOptions null_opt = opt;
      null_opt.fit_null = false;
      auto null_fit = fit_glm(Eigen::MatrixXd::Ones(n, 1), y, {"(Intercept)"}, null_opt);
      fit.loglik_null = null_fit.loglik;
    }
    fit.pseudo_r2_cs =
        1.0 - std::exp((2.0 / static_cast<double>(n)) * (fit.loglik_null - fit.loglik));
  }
  return fit;
}

inline FitResult fit_glm(const DesignMatrix& design, const GlmOptions& opt = {}) {
  return fit_glm(design.X, design.y, design.column_labels, opt);
}

struct WaldResult {
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  double exp_estimate = 1.0;
  double exp_ci_lo = 1.0;
  double exp_ci_hi = 1.0;
};

// Wald test of c'beta = 0 with normal reference distribution.
inline WaldResult wald_linear_hypothesis(const FitResult& fit, const Eigen::VectorXd& c) {
  if (c.size() != fit.beta.size()) throw DomainError("wald: contrast length does not match p");
  if ((c.array() == 0.0).all()) throw DomainError("wald: contrast vector is zero");
  WaldResult r;
  r.estimate = c.dot(fit.beta);
  r.se = std::sqrt(std::max(0.0, c.dot(fit.vcov * c)));
  if (r.se > 0.0) {
    r.z = r.estimate / r.se;
  } else {
    r.z = r.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.estimate);
  }
  r.p_value = two_sided_normal_p(r.z);
  r.exp_estimate = std::exp(r.estimate);
  r.exp_ci_lo = std::exp(r.estimate - kZ975 * r.se);
  r.exp_ci_hi = std::exp(r.estimate + kZ975 * r.se);
  return r;
}

inline Eigen::VectorXd predict(const FitResult& fit, const Eigen::MatrixXd& X_new) {
  if (X_new.cols() != fit.beta.size()) {
    throw DomainError("predict: X_new has " + std::to_string(X_new.cols()) + " columns, fit has " +
                      std::to_string(fit.beta.size()));
  }
  return detail::link_inverse(fit.link, X_new * fit.beta);
}

// Coefficient table: term,coef,exp_coef,se,z,p,ci_lo,ci_hi. coef and se are on
// the link scale; under the log link the interval is exponentiated so it sits
// next to exp_coef as in published GLM tables.
inline void write_coefficient_table(std::ostream& out, const FitResult& fit) {
  out << "term,coef,exp_coef,se,z,p,ci_lo,ci_hi\n";
  for (std::size_t j = 0; j < fit.p; ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    const double lo = fit.link == Link::Log ? std::exp(fit.ci_lo[k]) : fit.ci_lo[k];
    const double hi = fit.link == Link::Log ? std::exp(fit.ci_hi[k]) : fit.ci_hi[k];
    out << fit.labels[j] << ',' << text::format_double(fit.beta[k]) << ','
        << text::format_double(std::exp(fit.beta[k])) << ',' << text::format_double(fit.se[k])
        << ',' << text::format_double(fit.z[k]) << ','
        << text::format_double(two_sided_normal_p(fit.z[k])) << ',' << text::format_double(lo)
        << ',' << text::format_double(hi) << '\n';
  }
}

}  // namespace hubfair
