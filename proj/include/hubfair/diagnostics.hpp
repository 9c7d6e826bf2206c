#pragma once

// Multicollinearity screening with generalized variance inflation factors and
// post-fit influence diagnostics.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "hubfair/design.hpp"
#include "hubfair/error.hpp"
#include "hubfair/glm.hpp"
#include "hubfair/stats.hpp"

namespace hubfair {

struct GvifEntry {
  std::string term;
  std::size_t df = 1;
  double gvif = 1.0;
  double adjusted = 1.0;  // gvif^(1 / (2 df))
  bool removable = false;
};

struct GvifReport {
  std::vector<GvifEntry> entries;  // term order of the design

  const GvifEntry* find(const std::string& term) const {
    for (const auto& e : entries)
      if (e.term == term) return &e;
    return nullptr;
  }
};

// Sensitive attributes, model-data characteristics and their interactions.
inline std::set<std::string> default_protected_terms(const DesignMatrix& d) {
  std::set<std::string> out;
  for (const auto& t : d.terms)
    if (t.kind == TermKind::Sensitive || t.kind == TermKind::Characteristic ||
        t.kind == TermKind::Interaction)
      out.insert(t.name);
  return out;
}

namespace detail {

inline double log_det_spd(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m(idx[a], idx[b]);
  return out;
}

}  // namespace detail

// GVIF_g = det(R_gg) det(R_-g,-g) / det(R), with R the correlation matrix of
// all non-intercept columns.
inline GvifReport gvif(const DesignMatrix& d, const std::set<std::string>& protected_terms) {
  std::vector<const Term*> terms;
  for (const auto& t : d.terms)
    if (t.kind != TermKind::Intercept) terms.push_back(&t);
  if (terms.size() < 2) throw AnalysisError("gvif needs at least two non-intercept terms");

  // Non-intercept columns, centered and scaled to unit norm.
  std::vector<std::size_t> cols;
  for (const auto* t : terms) cols.insert(cols.end(), t->columns.begin(), t->columns.end());
  const auto m = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd Z(d.X.rows(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::VectorXd c = d.X.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(k)]));
    c.array() -= c.mean();
    const double norm = c.norm();
    if (norm == 0.0) {
      throw CollinearityError("column '" + d.column_labels[cols[static_cast<std::size_t>(k)]] +
                              "' is constant");
    }
    Z.col(k) = c / norm;
  }
  if (auto dep = detail::dependent_columns(Z); !dep.empty()) {
    std::string msg = "correlation matrix is singular; near-dependent columns:";
    for (auto k : dep) msg += " " + d.column_labels[cols[k]];
    throw CollinearityError(msg);
  }
  const Eigen::MatrixXd R = Z.transpose() * Z;
  const double log_det_all = detail::log_det_spd(R);
  if (!std::isfinite(log_det_all)) throw CollinearityError("correlation matrix is not positive definite");

  GvifReport report;
  Eigen::Index offset = 0;
  for (const auto* t : terms) {
    std::vector<Eigen::Index> in, out;
    const auto width = static_cast<Eigen::Index>(t->columns.size());
    for (Eigen::Index k = 0; k < m; ++k) (k >= offset && k < offset + width ? in : out).push_back(k);
    offset += width;
    const double log_g = detail::log_det_spd(detail::submatrix(R, in)) +
                         detail::log_det_spd(detail::submatrix(R, out)) - log_det_all;
    GvifEntry e;
    e.term = t->name;
    e.df = t->columns.size();
    e.gvif = std::exp(log_g);
    e.adjusted = std::pow(e.gvif, 1.0 / (2.0 * static_cast<double>(e.df)));
    e.removable = !protected_terms.count(t->name);
    report.entries.push_back(std::move(e));
  }
  return report;
}

inline GvifReport gvif(const DesignMatrix& d) { return gvif(d, default_protected_terms(d)); }

struct Removal {
  std::string term;
  std::size_t df = 1;
  double gvif = 1.0;
  double adjusted = 1.0;
};

struct ScreenResult {
  DesignMatrix design;
  std::vector<Removal> removed;  // in removal order
  GvifReport final_report;
};

// Repeatedly drops the removable term with the largest adjusted GVIF (the
// later term on ties) while it is >= threshold. Fails if a protected term is
// still >= threshold once nothing removable remains above it.
inline ScreenResult screen_collinearity(const DesignMatrix& design, double threshold,
                                        const std::set<std::string>& protected_terms) {
  for (const auto& name : protected_terms) {
    if (!design.term(name)) throw InputError("protected term '" + name + "' is not in the design");
  }
  ScreenResult result{design, {}, {}};
  for (;;) {
    std::size_t non_intercept = 0;
    for (const auto& t : result.design.terms) non_intercept += t.kind != TermKind::Intercept;
    if (non_intercept < 2) break;
    result.final_report = gvif(result.design, protected_terms);
    const GvifEntry* worst = nullptr;
    for (const auto& e : result.final_report.entries) {
      if (!e.removable || e.adjusted < threshold) continue;
      if (!worst || e.adjusted >= worst->adjusted * (1.0 - 1e-12)) worst = &e;
    }
    if (!worst) break;
    result.removed.push_back({worst->term, worst->df, worst->gvif, worst->adjusted});
    result.design = result.design.without_term(worst->term);
  }
  for (const auto& e : result.final_report.entries) {
    if (!e.removable && e.adjusted >= threshold) {
      throw CollinearityError("protected term '" + e.term + "' has adjusted GVIF " +
                              std::to_string(e.adjusted) + " >= " + std::to_string(threshold));
    }
  }
  return result;
}

inline void write_gvif_table(std::ostream& out, const GvifReport& report,
                             const std::vector<Removal>& removed) {
  out << "term,df,gvif,adjusted,removed\n";
  for (const auto& r : removed) {
    out << r.term << ',' << r.df << ',' << text::format_double(r.gvif) << ','
        << text::format_double(r.adjusted) << ",1\n";
  }
  for (const auto& e : report.entries) {
    out << e.term << ',' << e.df << ',' << text::format_double(e.gvif) << ','
        << text::format_double(e.adjusted) << ",0\n";
  }
}

struct FitDiagnostics {
  std::array<double, 5> residual_quantiles{};  // min, q25, median, q75, max of y - mu
  Eigen::VectorXd leverage;
  Eigen::VectorXd cooks_distance;
  double max_cooks = 0.0;
  std::size_t argmax_cooks = 0;
};

// Leverage is the diagonal of the weighted hat matrix W^(1/2) X (X'WX)^-1 X'
// W^(1/2). Cook's distance uses working residuals on the weighted scale,
// sqrt(w_i) (z_i - eta_i), which for the Gaussian family equal y_i - mu_i.
inline FitDiagnostics fit_diagnostics(const FitResult& fit, const DesignMatrix& design) {
  if (!fit.converged) throw AnalysisError("fit_diagnostics needs a converged fit");
  const auto& X = design.X;
  const auto n = X.rows();
  const auto p = X.cols();
  if (p != fit.beta.size()) throw DomainError("fit_diagnostics: design does not match fit");
  const Eigen::VectorXd mu = predict(fit, X);
  const Eigen::VectorXd w =
      fit.link == Link::Log ? Eigen::VectorXd(mu.array().square()) : Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd sw = w.array().sqrt();
  const Eigen::MatrixXd Xw = sw.asDiagonal() * X;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xw);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  // Rows of Xw R^-1 are the rows of the thin Q factor.
  const Eigen::MatrixXd Q =
      R.transpose().triangularView<Eigen::Lower>().solve(Xw.transpose()).transpose();

  FitDiagnostics out;
  out.leverage = Q.rowwise().squaredNorm();
  const Eigen::VectorXd resid = design.y - mu;
  out.cooks_distance.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = out.leverage[i];
    const double r = resid[i];  // sqrt(w) * working residual
    out.cooks_distance[i] =
        r * r * h / (static_cast<double>(p) * fit.dispersion * (1.0 - h) * (1.0 - h));
  }
  Eigen::Index arg = 0;
  out.max_cooks = out.cooks_distance.maxCoeff(&arg);
  out.argmax_cooks = static_cast<std::size_t>(arg);
  std::vector<double> r(resid.data(), resid.data() + n);
  const std::array<double, 5> probs = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t k = 0; k < probs.size(); ++k) out.residual_quantiles[k] = stats::quantile(r, probs[k]);
  return out;
}

}  // namespace hubfair
