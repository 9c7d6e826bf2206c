#pragma once

// Fairness outputs: relative effects from interaction fits, Accuracy Equality
// Ratio (AER) cells, nutritional cards, and the audit bundle consumed by the
// dashboard.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hubfair/design.hpp"
#include "hubfair/error.hpp"
#include "hubfair/glm.hpp"
#include "hubfair/metrics.hpp"
#include "hubfair/stats.hpp"
#include "hubfair/text.hpp"

namespace hubfair {

// ---------------------------------------------------------------------------
// Relative effects

struct RelativeEffect {
  std::string model;
  std::string sensitive_term;
  Factor characteristic = Factor::Lookahead;
  std::string level;
  bool reference_level = false;
  double estimate = 0.0;  // beta_i + delta_ijk on the link scale
  double exp_combined = 1.0;
  double pct_diff = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  double exp_ci_lo = 1.0;
  double exp_ci_hi = 1.0;
  bool significant = false;  // p < 0.05
};

inline double pct_diff(double exp_combined) { return (exp_combined - 1.0) * 100.0; }

inline std::vector<RelativeEffect> relative_effects(const FitResult& fit, const DesignMatrix& design,
                                                    Factor characteristic) {
  if (fit.p != design.cols()) throw DesignError("relative_effects: fit does not match design");
  const auto levels = design.factors.find(characteristic);
  const bool has_block = design.spec.interaction_with == characteristic &&
                         levels != design.factors.end() && levels->second.levels.size() > 1;
  if (!has_block) {
    const char* suffix = characteristic == Factor::Lookahead ? "a"
                         : characteristic == Factor::Phase   ? "b"
                         : characteristic == Factor::ModelType ? "c"
                                                               : "d";
    const char* base = design.spec.sensitive == SensitiveBlock::Race ? "GLM-1" : "GLM-2";
    throw DesignError("design has no sensitive x " + std::string(term_name(characteristic)) +
                      " interaction block; fit " + base + suffix + " instead");
  }
  std::vector<RelativeEffect> out;
  for (const auto& s : design.sensitive_columns()) {
    for (const auto& level : levels->second.levels) {
      const auto c = hypothesis_vector(design, s, characteristic, level);
      const auto w = wald_linear_hypothesis(fit, c);
      RelativeEffect e;
      e.model = design.spec.name;
      e.sensitive_term = s;
      e.characteristic = characteristic;
      e.level = level;
      e.reference_level = level == levels->second.reference;
      e.estimate = w.estimate;
      e.exp_combined = w.exp_estimate;
      e.pct_diff = pct_diff(w.exp_estimate);
      e.se = w.se;
      e.z = w.z;
      e.p_value = w.p_value;
      e.exp_ci_lo = w.exp_ci_lo;
      e.exp_ci_hi = w.exp_ci_hi;
      e.significant = w.p_value < 0.05;
      out.push_back(std::move(e));
    }
  }
  return out;
}

inline void write_relative_effects(std::ostream& out, const std::vector<RelativeEffect>& effects) {
  out << "model,sensitive_term,characteristic,level,exp_combined,pct_diff,se,z,p,ci_lo,ci_hi,"
         "significant\n";
  for (const auto& e : effects) {
    out << e.model << ',' << e.sensitive_term << ',' << term_name(e.characteristic) << ','
        << e.level << ',' << text::format_double(e.exp_combined) << ','
        << text::format_double(e.pct_diff) << ',' << text::format_double(e.se) << ','
        << text::format_double(e.z) << ',' << text::format_double(e.p_value) << ','
        << text::format_double(e.exp_ci_lo) << ',' << text::format_double(e.exp_ci_hi) << ','
        << (e.significant ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Groups and AER

enum class GroupingAttribute { Race, Urbanicity };

inline std::string_view to_string(GroupingAttribute a) {
  return a == GroupingAttribute::Race ? "race" : "urbanicity";
}

enum class RaceGroup { White, Black, Hispanic, Asian };

inline std::string_view to_string(RaceGroup g) {
  switch (g) {
    case RaceGroup::White: return "White";
    case RaceGroup::Black: return "Black";
    case RaceGroup::Hispanic: return "Hispanic";
    case RaceGroup::Asian: return "Asian";
  }
  return "?";
}

struct RaceShares {
  double white = 0.0;
  double black = 0.0;
  double hispanic = 0.0;
  double asian = 0.0;
};

// Largest share wins; exact ties go to the first of White, Black, Hispanic,
// Asian.
inline RaceGroup plurality_group(const RaceShares& s) {
  const std::array<std::pair<RaceGroup, double>, 4> shares = {
      {{RaceGroup::White, s.white},
       {RaceGroup::Black, s.black},
       {RaceGroup::Hispanic, s.hispanic},
       {RaceGroup::Asian, s.asian}}};
  if (std::all_of(shares.begin(), shares.end(), [](const auto& p) { return p.second == 0.0; })) {
    throw DomainError("plurality_group: all race shares are zero");
  }
  auto best = shares.begin();
  for (auto it = shares.begin() + 1; it != shares.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

inline RaceGroup plurality_group(const CountyCovariates& c) {
  return plurality_group(RaceShares{c.pct_white, c.pct_black, c.pct_hispanic, c.pct_asian});
}

inline std::string group_of(const CountyCovariates& c, GroupingAttribute a) {
  return a == GroupingAttribute::Race ? std::string(to_string(plurality_group(c)))
                                      : std::string(to_string(c.urbanicity()));
}

inline std::string unprotected_group(GroupingAttribute a) {
  return a == GroupingAttribute::Race ? "White" : "LM";
}

inline std::vector<std::string> protected_groups(GroupingAttribute a) {
  if (a == GroupingAttribute::Race) return {"Black", "Hispanic", "Asian"};
  return {"SMM", "MC"};
}

inline double aer(std::span<const double> pbl_protected, std::span<const double> pbl_unprotected) {
  if (pbl_protected.empty() || pbl_unprotected.empty()) {
    throw DomainError("aer: both groups need at least one observation");
  }
  const double denom = stats::mean(pbl_unprotected);
  if (denom == 0.0) throw DomainError("aer: unprotected mean PBL is zero; ratio undefined");
  return stats::mean(pbl_protected) / denom;
}

// ---------------------------------------------------------------------------
// Bundle

struct AerCell {
  std::string group;
  int phase = 0;
  int lookahead = 0;
  std::optional<double> aer;  // absent when a side is empty or the ratio is undefined
  stats::Moments protected_pbl;
  stats::Moments unprotected_pbl;
};

struct MeanDifference {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct NutritionalCard {
  std::string team_id;
  std::string variables;  // e.g. "race: Hispanic vs White"
  std::string protected_group;
  std::optional<int> phase;      // nullopt: all phases
  std::optional<int> lookahead;  // nullopt: all lookaheads
  MeanDifference mean_difference;
  std::optional<double> aer_median;
  std::optional<double> aer_min;
  std::optional<double> aer_max;
  std::optional<double> aer_this_view;
  std::size_t county_count = 0;
  std::size_t prediction_count = 0;
};

struct TeamAudit {
  std::string team_id;
  ModelType model_type = ModelType::Compartmental;
  Mobility mobility = Mobility::No;
  std::vector<AerCell> cells;
  std::map<std::string, std::optional<double>> median_aer;  // protected group -> median
  std::vector<NutritionalCard> cards;
};

struct RunInfo {
  std::string config_hash;
  std::size_t n_obs = 0;
  TrimReport trimmed;
};

struct AuditBundle {
  RunInfo run;
  GroupingAttribute grouping = GroupingAttribute::Race;
  std::string interval_method = "normal";
  std::vector<TeamAudit> teams;
  std::vector<RelativeEffect> relative_effects;
};

struct BundleConfig {
  GroupingAttribute grouping = GroupingAttribute::Race;
  bool bootstrap = false;
  int bootstrap_reps = 1000;
  std::uint64_t seed = 1;
  RunInfo run;
};

namespace detail {

inline std::optional<double> ratio(const stats::Moments& p, const stats::Moments& u) {
  if (p.n == 0 || u.n == 0 || u.mean == 0.0) return std::nullopt;
  return p.mean / u.mean;
}

inline MeanDifference normal_interval(const stats::Moments& p, const stats::Moments& u) {
  MeanDifference md;
  md.value = p.mean - u.mean;
  const double se = std::sqrt(p.variance() / static_cast<double>(p.n) +
                              u.variance() / static_cast<double>(u.n));
  md.lower = md.value - kZ975 * se;
  md.upper = md.value + kZ975 * se;
  return md;
}

inline MeanDifference bootstrap_interval(const std::vector<double>& prot,
                                         const std::vector<double>& unprot, int reps,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_p(0, prot.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_u(0, unprot.size() - 1);
  std::vector<double> diffs;
  diffs.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    double sp = 0.0, su = 0.0;
    for (std::size_t i = 0; i < prot.size(); ++i) sp += prot[pick_p(rng)];
    for (std::size_t i = 0; i < unprot.size(); ++i) su += unprot[pick_u(rng)];
    diffs.push_back(sp / static_cast<double>(prot.size()) - su / static_cast<double>(unprot.size()));
  }
  MeanDifference md;
  md.value = stats::mean(prot) - stats::mean(unprot);
  md.lower = stats::quantile(diffs, 0.025);
  md.upper = stats::quantile(diffs, 0.975);
  return md;
}

}  // namespace detail

// AER per team per (protected group x phase x lookahead) cell against the
// unprotected group in the same phase and lookahead, plus one card for every
// view: all cells, each phase, each lookahead, each phase x lookahead.
inline AuditBundle build_bundle(std::span<const PblObservation> observations,
                                std::vector<RelativeEffect> effects, const BundleConfig& config) {
  AuditBundle bundle;
  bundle.run = config.run;
  bundle.run.n_obs = observations.size();
  bundle.grouping = config.grouping;
  bundle.interval_method = config.bootstrap ? "bootstrap" : "normal";
  bundle.relative_effects = std::move(effects);

  const auto unprotected = unprotected_group(config.grouping);
  const auto groups = protected_groups(config.grouping);

  std::map<std::string, std::vector<const PblObservation*>> by_team;
  for (const auto& o : observations) by_team[o.team_id].push_back(&o);

  for (const auto& [team_id, rows] : by_team) {
    TeamAudit team;
    team.team_id = team_id;
    team.model_type = rows.front()->metadata->model_type;
    team.mobility = rows.front()->metadata->mobility;

    std::set<int> phases, lookaheads;
    // (group, phase, lookahead) -> moments; the unprotected side keyed by group "".
    std::map<std::tuple<std::string, int, int>, stats::Moments> moments;
    for (const auto* o : rows) {
      phases.insert(o->phase);
      lookaheads.insert(o->lookahead_days);
      auto g = group_of(*o->covariates, config.grouping);
      if (g == unprotected) g.clear();
      moments[{g, o->phase, o->lookahead_days}].add(o->pbl_norm);
    }
    auto get = [&](const std::string& g, int ph, int la) {
      auto it = moments.find({g, ph, la});
      return it == moments.end() ? stats::Moments{} : it->second;
    };

    for (const auto& g : groups) {
      std::vector<double> present;
      for (int ph : phases) {
        for (int la : lookaheads) {
          AerCell cell{g, ph, la, std::nullopt, get(g, ph, la), get("", ph, la)};
          cell.aer = detail::ratio(cell.protected_pbl, cell.unprotected_pbl);
          if (cell.aer) present.push_back(*cell.aer);
          team.cells.push_back(std::move(cell));
        }
      }
      team.median_aer[g] = present.empty() ? std::nullopt : std::optional(stats::median(present));
    }

    // Cards.
    std::vector<std::pair<std::optional<int>, std::optional<int>>> views = {{std::nullopt, std::nullopt}};
    for (int ph : phases) views.push_back({ph, std::nullopt});
    for (int la : lookaheads) views.push_back({std::nullopt, la});
    for (int ph : phases)
      for (int la : lookaheads) views.push_back({ph, la});

    for (const auto& g : groups) {
      for (const auto& [vph, vla] : views) {
        auto in_view = [&](int ph, int la) {
          return (!vph || *vph == ph) && (!vla || *vla == la);
        };
        stats::Moments p, u;
        std::vector<double> cell_aers;
        for (const auto& c : team.cells) {
          if (c.group != g || !in_view(c.phase, c.lookahead)) continue;
          p.merge(c.protected_pbl);
          u.merge(c.unprotected_pbl);
          if (c.aer) cell_aers.push_back(*c.aer);
        }
        if (p.n == 0 || u.n == 0) continue;

        NutritionalCard card;
        card.team_id = team_id;
        card.variables = std::string(to_string(config.grouping)) + ": " + g + " vs " + unprotected;
        card.protected_group = g;
        card.phase = vph;
        card.lookahead = vla;
        std::set<std::string> counties;
        std::vector<double> pv, uv;
        for (const auto* o : rows) {
          if (!in_view(o->phase, o->lookahead_days)) continue;
          const auto og = group_of(*o->covariates, config.grouping);
          if (og == g) {
            pv.push_back(o->pbl_norm);
          } else if (og == unprotected) {
            uv.push_back(o->pbl_norm);
          } else {
            continue;
          }
          counties.insert(o->fips);
        }
        if (config.bootstrap) {
          std::uint64_t h = text::fnv1a(team_id + "|" + g + "|" +
                                        (vph ? std::to_string(*vph) : "all") + "|" +
                                        (vla ? std::to_string(*vla) : "all"));
          card.mean_difference =
              detail::bootstrap_interval(pv, uv, config.bootstrap_reps, config.seed ^ h);
        } else {
          card.mean_difference = detail::normal_interval(p, u);
        }
        if (!cell_aers.empty()) {
          card.aer_median = stats::median(cell_aers);
          card.aer_min = *std::min_element(cell_aers.begin(), cell_aers.end());
          card.aer_max = *std::max_element(cell_aers.begin(), cell_aers.end());
        }
        card.aer_this_view = detail::ratio(p, u);
        card.county_count = counties.size();
        card.prediction_count = pv.size() + uv.size();
        team.cards.push_back(std::move(card));
      }
    }
    bundle.teams.push_back(std::move(team));
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// JSON

using Json = nlohmann::ordered_json;

namespace detail {
inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
inline Json opt_int(const std::optional<int>& v) { return v ? Json(*v) : Json("all"); }
}  // namespace detail

inline Json to_json(const RelativeEffect& e) {
  return Json{{"model", e.model},
              {"sensitive_term", e.sensitive_term},
              {"characteristic", std::string(term_name(e.characteristic))},
              {"level", e.level},
              {"reference_level", e.reference_level},
              {"exp_combined", e.exp_combined},
              {"pct_diff", e.pct_diff},
              {"se", e.se},
              {"z", e.z},
              {"p_value", e.p_value},
              {"ci95", {e.exp_ci_lo, e.exp_ci_hi}},
              {"significant", e.significant}};
}

inline Json to_json(const AuditBundle& b) {
  Json run{{"config_hash", b.run.config_hash},
           {"n_obs", b.run.n_obs},
           {"trimmed",
            {{"n_in", b.run.trimmed.n_in},
             {"removed", b.run.trimmed.removed},
             {"trim_frac", b.run.trimmed.trim_frac},
             {"threshold", std::isnan(b.run.trimmed.threshold) ? Json(nullptr)
                                                              : Json(b.run.trimmed.threshold)}}},
           {"grouping", std::string(to_string(b.grouping))},
           {"unprotected_group", unprotected_group(b.grouping)},
           {"protected_groups", protected_groups(b.grouping)},
           {"interval_method", b.interval_method}};
  Json teams = Json::array();
  for (const auto& t : b.teams) {
    Json cells = Json::array();
    for (const auto& c : t.cells) {
      cells.push_back(Json{{"group", c.group},
                           {"phase", c.phase},
                           {"lookahead", c.lookahead},
                           {"aer", detail::opt(c.aer)},
                           {"n_protected", c.protected_pbl.n},
                           {"n_unprotected", c.unprotected_pbl.n},
                           {"mean_protected", c.protected_pbl.mean},
                           {"mean_unprotected", c.unprotected_pbl.mean},
                           {"var_protected", c.protected_pbl.variance()},
                           {"var_unprotected", c.unprotected_pbl.variance()}});
    }
    Json medians = Json::object();
    for (const auto& [g, m] : t.median_aer) medians[g] = detail::opt(m);
    Json cards = Json::array();
    for (const auto& c : t.cards) {
      cards.push_back(Json{
          {"model_info",
           {{"team", c.team_id},
            {"variables", c.variables},
            {"protected_group", c.protected_group},
            {"phase", detail::opt_int(c.phase)},
            {"lookahead", detail::opt_int(c.lookahead)}}},
          {"mean_difference",
           {{"value", c.mean_difference.value},
            {"lower", c.mean_difference.lower},
            {"upper", c.mean_difference.upper}}},
          {"aer_values",
           {{"median", detail::opt(c.aer_median)},
            {"min", detail::opt(c.aer_min)},
            {"max", detail::opt(c.aer_max)},
            {"this_view", detail::opt(c.aer_this_view)}}},
          {"coverage",
           {{"county_count", c.county_count}, {"prediction_count", c.prediction_count}}}});
    }
    teams.push_back(Json{{"team_id", t.team_id},
                         {"model_type", std::string(to_string(t.model_type))},
                         {"mobility", std::string(to_string(t.mobility))},
                         {"cells", std::move(cells)},
                         {"median_aer", std::move(medians)},
                         {"cards", std::move(cards)}});
  }
  Json effects = Json::array();
  for (const auto& e : b.relative_effects) effects.push_back(to_json(e));
  return Json{{"run", std::move(run)},
              {"teams", std::move(teams)},
              {"relative_effects", std::move(effects)}};
}

// Structural check of a serialized bundle against the published schema.
// Returns a list of problems; empty means valid.
inline std::vector<std::string> validate_bundle_schema(const Json& j) {
  std::vector<std::string> problems;
  auto need = [&](const Json& obj, const char* key, Json::value_t type, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    const auto& v = obj.at(key);
    const bool number_ok = type == Json::value_t::number_float && v.is_number();
    const bool unsigned_ok = type == Json::value_t::number_unsigned && v.is_number_integer() &&
                             v.get<long long>() >= 0;
    if (v.type() != type && !number_ok && !unsigned_ok) {
      problems.push_back(where + ": '" + key + "' has wrong type");
      return false;
    }
    return true;
  };
  auto number_or_null = [&](const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !(obj.at(key).is_number() || obj.at(key).is_null())) {
      problems.push_back(where + ": '" + key + "' must be a number or null");
    }
  };
  using VT = Json::value_t;
  if (!j.is_object()) return {"bundle is not an object"};
  if (need(j, "run", VT::object, "bundle")) {
    const auto& r = j["run"];
    need(r, "config_hash", VT::string, "run");
    need(r, "n_obs", VT::number_unsigned, "run");
    need(r, "trimmed", VT::object, "run");
    need(r, "grouping", VT::string, "run");
  }
  if (need(j, "teams", VT::array, "bundle")) {
    for (const auto& t : j["teams"]) {
      const std::string where = "team " + (t.contains("team_id") ? t["team_id"].dump() : "?");
      need(t, "team_id", VT::string, where);
      need(t, "model_type", VT::string, where);
      need(t, "mobility", VT::string, where);
      need(t, "median_aer", VT::object, where);
      if (need(t, "cells", VT::array, where)) {
        for (const auto& c : t["cells"]) {
          need(c, "group", VT::string, where + " cell");
          need(c, "phase", VT::number_unsigned, where + " cell");
          need(c, "lookahead", VT::number_unsigned, where + " cell");
          number_or_null(c, "aer", where + " cell");
          need(c, "n_protected", VT::number_unsigned, where + " cell");
          need(c, "n_unprotected", VT::number_unsigned, where + " cell");
          if (c.contains("aer") && c["aer"].is_number() && !(c["aer"].get<double>() > 0.0)) {
            problems.push_back(where + " cell: aer must be positive");
          }
        }
      }
      if (need(t, "cards", VT::array, where)) {
        for (const auto& c : t["cards"]) {
          const std::string cw = where + " card";
          need(c, "model_info", VT::object, cw);
          if (need(c, "mean_difference", VT::object, cw)) {
            const auto& md = c["mean_difference"];
            need(md, "value", VT::number_float, cw);
            need(md, "lower", VT::number_float, cw);
            need(md, "upper", VT::number_float, cw);
          }
          if (need(c, "aer_values", VT::object, cw)) {
            number_or_null(c["aer_values"], "median", cw);
            number_or_null(c["aer_values"], "this_view", cw);
          }
          if (need(c, "coverage", VT::object, cw)) {
            need(c["coverage"], "county_count", VT::number_unsigned, cw);
            need(c["coverage"], "prediction_count", VT::number_unsigned, cw);
          }
        }
      }
    }
  }
  need(j, "relative_effects", VT::array, "bundle");
  return problems;
}

// Recomputes every card's mean difference (normal interval) and AER values
// from the bundle's cells. Returns mismatches larger than `tol`.
inline std::vector<std::string> audit_bundle(const Json& j, double tol = 1e-9) {
  std::vector<std::string> problems;
  const bool normal = j["run"].value("interval_method", "normal") == "normal";
  auto close = [&](double a, double b) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  };
  auto check = [&](const std::string& what, const Json& got, std::optional<double> want) {
    if (got.is_null() != !want.has_value() || (want && !close(got.get<double>(), *want))) {
      problems.push_back(what + ": card " + got.dump() + " vs recomputed " +
                         (want ? text::format_double(*want) : std::string("null")));
    }
  };
  for (const auto& t : j["teams"]) {
    for (const auto& c : t["cells"]) {
      stats::Moments p{c["n_protected"].get<std::size_t>(), c["mean_protected"].get<double>(), 0.0};
      stats::Moments u{c["n_unprotected"].get<std::size_t>(), c["mean_unprotected"].get<double>(), 0.0};
      check(t["team_id"].get<std::string>() + " cell aer", c["aer"], detail::ratio(p, u));
    }
    for (const auto& card : t["cards"]) {
      const auto& info = card["model_info"];
      const auto g = info["protected_group"].get<std::string>();
      const auto& ph = info["phase"];
      const auto& la = info["lookahead"];
      stats::Moments p, u;
      std::vector<double> aers;
      for (const auto& c : t["cells"]) {
        if (c["group"] != g) continue;
        if (!ph.is_string() && c["phase"] != ph) continue;
        if (!la.is_string() && c["lookahead"] != la) continue;
        auto moments = [](std::size_t n, double mean, double var) {
          return stats::Moments{n, mean, n > 1 ? var * static_cast<double>(n - 1) : 0.0};
        };
        p.merge(moments(c["n_protected"], c["mean_protected"], c["var_protected"]));
        u.merge(moments(c["n_unprotected"], c["mean_unprotected"], c["var_unprotected"]));
        if (c["aer"].is_number()) aers.push_back(c["aer"].get<double>());
      }
      const std::string where = t["team_id"].get<std::string>() + " " + g + " phase=" + ph.dump() +
                                " lookahead=" + la.dump();
      if (p.n == 0 || u.n == 0) {
        problems.push_back(where + ": card has no backing cells");
        continue;
      }
      const auto& md = card["mean_difference"];
      check(where + " mean_difference.value", md["value"], p.mean - u.mean);
      if (normal) {
        const auto ni = detail::normal_interval(p, u);
        check(where + " mean_difference.lower", md["lower"], ni.lower);
        check(where + " mean_difference.upper", md["upper"], ni.upper);
      }
      const auto& av = card["aer_values"];
      std::optional<double> med, lo, hi;
      if (!aers.empty()) {
        med = stats::median(aers);
        lo = *std::min_element(aers.begin(), aers.end());
        hi = *std::max_element(aers.begin(), aers.end());
      }
      check(where + " aer_values.median", av["median"], med);
      check(where + " aer_values.min", av["min"], lo);
      check(where + " aer_values.max", av["max"], hi);
      check(where + " aer_values.this_view", av["this_view"], detail::ratio(p, u));
      const auto& cov = card["coverage"];
      if (cov["prediction_count"].get<std::size_t>() != p.n + u.n) {
        problems.push_back(where + ": prediction_count does not match cells");
      }
      const double lower = md["lower"].get<double>(), upper = md["upper"].get<double>(),
                   value = md["value"].get<double>();
      if (!(lower <= value && value <= upper)) problems.push_back(where + ": interval excludes value");
    }
  }
  return problems;
}

}  // namespace hubfair
