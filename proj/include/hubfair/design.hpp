#pragma once

// Declarative GLM specifications (GLM-1, GLM-2 and their a-d interaction
// variants) and their realization as labeled, treatment-coded design matrices.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hubfair/error.hpp"
#include "hubfair/ingest.hpp"
#include "hubfair/metrics.hpp"
#include "hubfair/text.hpp"

namespace hubfair {

class DesignError : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

enum class SensitiveBlock { Race, Urbanicity };

// Categorical factors. The first four are the model-data characteristics, in
// the order their columns appear.
enum class Factor { Lookahead, Phase, ModelType, Mobility, Urbanicity };
inline constexpr std::array<Factor, 4> kCharacteristics = {Factor::Lookahead, Factor::Phase,
                                                           Factor::ModelType, Factor::Mobility};

inline std::string_view term_name(Factor f) {
  switch (f) {
    case Factor::Lookahead: return "lookahead";
    case Factor::Phase: return "phase";
    case Factor::ModelType: return "model_type";
    case Factor::Mobility: return "mobility";
    case Factor::Urbanicity: return "urbanicity";
  }
  return "?";
}

inline std::optional<Factor> factor_from_string(std::string_view s) {
  for (Factor f : {Factor::Lookahead, Factor::Phase, Factor::ModelType, Factor::Mobility,
                   Factor::Urbanicity})
    if (term_name(f) == s) return f;
  return std::nullopt;
}

// Column label of one non-reference level, e.g. "lookahead14", "phase5",
// "model_type_Baseline", "mobility_Yes", "urb_MC".
inline std::string level_column(Factor f, std::string_view level) {
  switch (f) {
    case Factor::Lookahead: return "lookahead" + std::string(level);
    case Factor::Phase: return "phase" + std::string(level);
    case Factor::ModelType: return "model_type_" + std::string(level);
    case Factor::Mobility: return "mobility_" + std::string(level);
    case Factor::Urbanicity: return "urb_" + std::string(level);
  }
  return std::string(level);
}

inline std::string level_of(Factor f, const PblObservation& o) {
  switch (f) {
    case Factor::Lookahead: return std::to_string(o.lookahead_days);
    case Factor::Phase: return std::to_string(o.phase);
    case Factor::ModelType: return std::string(to_string(o.metadata->model_type));
    case Factor::Mobility: return std::string(to_string(o.metadata->mobility));
    case Factor::Urbanicity: return std::string(to_string(o.covariates->urbanicity()));
  }
  return {};
}

// Canonical sort rank of a level within its factor.
inline long level_rank(Factor f, const std::string& level) {
  switch (f) {
    case Factor::Lookahead:
    case Factor::Phase: {
      auto v = text::parse_int(level);
      return v ? static_cast<long>(*v) : 1'000'000L;
    }
    case Factor::ModelType: {
      auto t = model_type_from_string(level);
      return t ? static_cast<long>(*t) : 1'000'000L;
    }
    case Factor::Mobility: {
      auto m = mobility_from_string(level);
      return m ? static_cast<long>(*m) : 1'000'000L;
    }
    case Factor::Urbanicity:
      if (level == "LM") return 0;
      if (level == "SMM") return 1;
      if (level == "MC") return 2;
      return 1'000'000L;
  }
  return 0;
}

inline std::string default_reference(Factor f) {
  switch (f) {
    case Factor::Lookahead: return "7";
    case Factor::Phase: return "0";
    case Factor::ModelType: return "Compartmental";
    case Factor::Mobility: return "No";
    case Factor::Urbanicity: return "LM";
  }
  return {};
}

struct Controls {
  std::vector<HealthOutcome> health{
      HealthOutcome::BPHIGH, HealthOutcome::CANCER, HealthOutcome::DIABETES,
      HealthOutcome::OBESITY, HealthOutcome::STROKE, HealthOutcome::COPD,
      HealthOutcome::KIDNEY, HealthOutcome::CASTHMA, HealthOutcome::CHD};
  bool age65 = true;
  bool state_effects = true;
};

struct ModelSpec {
  std::string name;
  SensitiveBlock sensitive = SensitiveBlock::Race;
  std::optional<Factor> interaction_with;  // one of kCharacteristics
  Controls controls;
  std::map<Factor, std::string> reference_levels;  // overrides default_reference
  // Levels that may serve as reference even when absent from the data.
  std::map<Factor, std::vector<std::string>> declared_levels;
  std::string state_reference;  // empty: alphabetically first state

  std::string reference(Factor f) const {
    auto it = reference_levels.find(f);
    return it == reference_levels.end() ? default_reference(f) : it->second;
  }

  ModelSpec main_effects() const {
    ModelSpec m = *this;
    m.interaction_with.reset();
    return m;
  }
};

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"GLM-1",  "GLM-2",  "GLM-1a", "GLM-1b",
                                                 "GLM-1c", "GLM-1d", "GLM-2a", "GLM-2b",
                                                 "GLM-2c", "GLM-2d"};
  return names;
}

// The catalog of models: GLM-1 (race) and GLM-2 (urbanicity), and suffixes
// a-d adding interactions with lookahead, phase, model type and mobility.
inline ModelSpec model_spec(std::string_view name) {
  ModelSpec spec;
  spec.name = std::string(name);
  if (name.size() < 5 || name.substr(0, 4) != "GLM-" || (name[4] != '1' && name[4] != '2') ||
      name.size() > 6) {
    throw InputError("unknown model spec '" + std::string(name) + "'");
  }
  spec.sensitive = name[4] == '1' ? SensitiveBlock::Race : SensitiveBlock::Urbanicity;
  if (name.size() == 6) {
    switch (name[5]) {
      case 'a': spec.interaction_with = Factor::Lookahead; break;
      case 'b': spec.interaction_with = Factor::Phase; break;
      case 'c': spec.interaction_with = Factor::ModelType; break;
      case 'd': spec.interaction_with = Factor::Mobility; break;
      default: throw InputError("unknown model spec '" + std::string(name) + "'");
    }
  }
  return spec;
}

enum class TermKind { Intercept, Sensitive, Characteristic, Interaction, Control, State };

struct Term {
  std::string name;
  TermKind kind = TermKind::Control;
  std::vector<std::size_t> columns;
};

struct FactorLevels {
  std::vector<std::string> levels;  // canonical order, reference included
  std::string reference;
};

struct DesignMatrix {
  std::vector<std::string> column_labels;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<Term> terms;  // column order; terms[0] is the intercept
  ModelSpec spec;
  std::map<Factor, FactorLevels> factors;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }

  std::optional<std::size_t> column(std::string_view label) const {
    for (std::size_t j = 0; j < column_labels.size(); ++j)
      if (column_labels[j] == label) return j;
    return std::nullopt;
  }

  const Term* term(std::string_view name) const {
    for (const auto& t : terms)
      if (t.name == name) return &t;
    return nullptr;
  }

  std::map<std::string, std::vector<std::size_t>> term_groups() const {
    std::map<std::string, std::vector<std::size_t>> out;
    for (const auto& t : terms) out[t.name] = t.columns;
    return out;
  }

  std::vector<std::string> sensitive_columns() const {
    std::vector<std::string> out;
    for (const auto& t : terms)
      if (t.kind == TermKind::Sensitive)
        for (auto c : t.columns) out.push_back(column_labels[c]);
    return out;
  }

  // Removes one term's columns, renumbering the rest.
  DesignMatrix without_term(std::string_view name) const {
    const Term* victim = term(name);
    if (!victim) throw DesignError("unknown term '" + std::string(name) + "'");
    if (victim->kind == TermKind::Intercept) throw DesignError("cannot drop the intercept");
    std::vector<bool> drop(cols(), false);
    for (auto c : victim->columns) drop[c] = true;
    std::vector<std::size_t> remap(cols(), 0);
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < cols(); ++j) {
      if (drop[j]) continue;
      remap[j] = keep.size();
      keep.push_back(static_cast<Eigen::Index>(j));
    }
    DesignMatrix out;
    out.spec = spec;
    out.factors = factors;
    out.y = y;
    out.X.resize(X.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      out.X.col(static_cast<Eigen::Index>(k)) = X.col(keep[k]);
      out.column_labels.push_back(column_labels[static_cast<std::size_t>(keep[k])]);
    }
    for (const auto& t : terms) {
      if (t.name == victim->name) continue;
      Term nt{t.name, t.kind, {}};
      for (auto c : t.columns) nt.columns.push_back(remap[c]);
      out.terms.push_back(std::move(nt));
    }
    // Keep the spec's control list in sync so rebuilt designs match.
    if (victim->kind == TermKind::Control) {
      auto& h = out.spec.controls.health;
      h.erase(std::remove_if(h.begin(), h.end(),
                             [&](HealthOutcome o) { return to_string(o) == victim->name; }),
              h.end());
      if (victim->name == "pct_age65") out.spec.controls.age65 = false;
    }
    if (victim->kind == TermKind::State) out.spec.controls.state_effects = false;
    return out;
  }
};

namespace detail {

inline FactorLevels collect_levels(Factor f, const ModelSpec& spec,
                                   std::span<const PblObservation> obs) {
  std::set<std::string> seen;
  for (const auto& o : obs) seen.insert(level_of(f, o));
  FactorLevels out;
  out.reference = spec.reference(f);
  if (!seen.count(out.reference)) {
    auto declared = spec.declared_levels.find(f);
    const bool ok = declared != spec.declared_levels.end() &&
                    std::find(declared->second.begin(), declared->second.end(), out.reference) !=
                        declared->second.end();
    if (!ok) {
      throw DesignError("reference level '" + out.reference + "' of factor " +
                        std::string(term_name(f)) + " is absent from the data and not declared");
    }
    seen.insert(out.reference);
  }
  out.levels.assign(seen.begin(), seen.end());
  std::stable_sort(out.levels.begin(), out.levels.end(),
                   [&](const std::string& a, const std::string& b) {
                     const auto ra = level_rank(f, a), rb = level_rank(f, b);
                     return ra != rb ? ra < rb : a < b;
                   });
  return out;
}

}  // namespace detail

// Builds the treatment-coded design for `spec`. Column order: intercept,
// sensitive block, characteristic dummies (lookahead, phase, model type,
// mobility), interactions, health and age controls, state dummies.
inline DesignMatrix build_design(const ModelSpec& spec, std::span<const PblObservation> obs) {
  if (obs.empty()) throw DesignError("build_design: no observations");
  if (spec.interaction_with && *spec.interaction_with == Factor::Urbanicity) {
    throw DesignError("interactions are defined only for model-data characteristics");
  }
  const auto n = static_cast<Eigen::Index>(obs.size());

  DesignMatrix d;
  d.spec = spec;
  std::vector<Eigen::VectorXd> columns;
  auto add_column = [&](std::string label, Eigen::VectorXd values) {
    columns.push_back(std::move(values));
    d.column_labels.push_back(std::move(label));
    return columns.size() - 1;
  };
  auto add_term = [&](std::string name, TermKind kind, std::vector<std::size_t> cols) {
    if (!cols.empty()) d.terms.push_back(Term{std::move(name), kind, std::move(cols)});
  };

  add_term("(Intercept)", TermKind::Intercept,
           {add_column("(Intercept)", Eigen::VectorXd::Ones(n))});

  // Sensitive block.
  std::vector<std::size_t> sensitive_cols;
  if (spec.sensitive == SensitiveBlock::Race) {
    using Getter = double (*)(const CountyCovariates&);
    const std::array<std::pair<const char*, Getter>, 3> shares = {{
        {"pct_asian", [](const CountyCovariates& c) { return c.pct_asian; }},
        {"pct_black", [](const CountyCovariates& c) { return c.pct_black; }},
        {"pct_hispanic", [](const CountyCovariates& c) { return c.pct_hispanic; }},
    }};
    for (const auto& [label, get] : shares) {
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = get(*obs[static_cast<std::size_t>(i)].covariates);
      auto c = add_column(label, std::move(v));
      sensitive_cols.push_back(c);
      add_term(label, TermKind::Sensitive, {c});
    }
  } else {
    auto levels = detail::collect_levels(Factor::Urbanicity, spec, obs);
    std::vector<std::size_t> cols;
    for (const auto& level : levels.levels) {
      if (level == levels.reference) continue;
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i)
        v[i] = level_of(Factor::Urbanicity, obs[static_cast<std::size_t>(i)]) == level ? 1.0 : 0.0;
      cols.push_back(add_column(level_column(Factor::Urbanicity, level), std::move(v)));
    }
    sensitive_cols = cols;
    d.factors[Factor::Urbanicity] = std::move(levels);
    add_term("urbanicity", TermKind::Sensitive, cols);
  }

  // Characteristic dummies, remembering each non-reference level's column.
  std::map<Factor, std::vector<std::pair<std::string, std::size_t>>> dummies;
  for (Factor f : kCharacteristics) {
    auto levels = detail::collect_levels(f, spec, obs);
    std::vector<std::size_t> cols;
    std::vector<std::string> per_obs(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) per_obs[i] = level_of(f, obs[i]);
    for (const auto& level : levels.levels) {
      if (level == levels.reference) continue;
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i)
        v[i] = per_obs[static_cast<std::size_t>(i)] == level ? 1.0 : 0.0;
      auto c = add_column(level_column(f, level), std::move(v));
      cols.push_back(c);
      dummies[f].push_back({level, c});
    }
    d.factors[f] = std::move(levels);
    add_term(std::string(term_name(f)), TermKind::Characteristic, cols);
  }

  // Interactions: each sensitive column times each non-reference dummy.
  if (spec.interaction_with) {
    const Factor f = *spec.interaction_with;
    for (auto s : sensitive_cols) {
      std::vector<std::size_t> cols;
      for (const auto& [level, dc] : dummies[f]) {
        Eigen::VectorXd v = columns[s].cwiseProduct(columns[dc]);
        cols.push_back(add_column(d.column_labels[s] + ":" + level_column(f, level), std::move(v)));
      }
      add_term(d.column_labels[s] + ":" + std::string(term_name(f)), TermKind::Interaction, cols);
    }
  }

  for (HealthOutcome h : spec.controls.health) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v[i] = obs[static_cast<std::size_t>(i)].covariates->health_outcome(h);
    const std::string label(to_string(h));
    add_term(label, TermKind::Control, {add_column(label, std::move(v))});
  }
  if (spec.controls.age65) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = obs[static_cast<std::size_t>(i)].covariates->pct_age65;
    add_term("pct_age65", TermKind::Control, {add_column("pct_age65", std::move(v))});
  }
  if (spec.controls.state_effects) {
    std::set<std::string> states;
    for (const auto& o : obs) states.insert(o.covariates->state);
    const std::string ref = spec.state_reference.empty() ? *states.begin() : spec.state_reference;
    if (!states.count(ref)) throw DesignError("reference state '" + ref + "' absent from data");
    std::vector<std::size_t> cols;
    for (const auto& s : states) {
      if (s == ref) continue;
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i)
        v[i] = obs[static_cast<std::size_t>(i)].covariates->state == s ? 1.0 : 0.0;
      cols.push_back(add_column("state_" + s, std::move(v)));
    }
    add_term("state", TermKind::State, cols);
  }

  {
    std::set<std::string> unique(d.column_labels.begin(), d.column_labels.end());
    if (unique.size() != d.column_labels.size()) throw DesignError("duplicate column labels");
  }

  d.X.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j > 0 && columns[j].maxCoeff() == columns[j].minCoeff()) {
      throw DesignError("column '" + d.column_labels[j] + "' is constant");
    }
    d.X.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d.y[i] = obs[static_cast<std::size_t>(i)].sqrt_pbl;
  return d;
}

// Contrast selecting beta_i + delta_ijk for sensitive column `sensitive` at
// `level` of `characteristic`; at the reference level it selects beta_i alone.
inline Eigen::VectorXd hypothesis_vector(const DesignMatrix& design, std::string_view sensitive,
                                         Factor characteristic, std::string_view level) {
  auto s = design.column(sensitive);
  if (!s) throw DesignError("unknown sensitive term '" + std::string(sensitive) + "'");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design.cols()));
  c[static_cast<Eigen::Index>(*s)] = 1.0;
  auto f = design.factors.find(characteristic);
  if (f != design.factors.end() && f->second.reference == level) return c;
  const auto label = std::string(sensitive) + ":" + level_column(characteristic, level);
  auto k = design.column(label);
  if (!k) throw DesignError("unknown interaction term '" + label + "'");
  c[static_cast<Eigen::Index>(*k)] = 1.0;
  return c;
}

inline void write_design(std::ostream& out, const DesignMatrix& d) {
  out << "sqrt_pbl";
  for (const auto& label : d.column_labels) out << ',' << label;
  out << '\n';
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    out << text::format_double(d.y[i]);
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) out << ',' << text::format_double(d.X(i, j));
    out << '\n';
  }
}

}  // namespace hubfair
