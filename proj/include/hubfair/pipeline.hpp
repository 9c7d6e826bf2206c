#pragma once

// Run configuration and the score / fit / bundle stages behind the CLI.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hubfair/design.hpp"
#include "hubfair/diagnostics.hpp"
#include "hubfair/error.hpp"
#include "hubfair/fairness.hpp"
#include "hubfair/glm.hpp"
#include "hubfair/ingest.hpp"
#include "hubfair/metrics.hpp"
#include "hubfair/phases.hpp"
#include "hubfair/synth.hpp"
#include "hubfair/text.hpp"

namespace hubfair {

namespace fs = std::filesystem;

struct InputPaths {
  fs::path forecasts_dir;  // one <team_id>.csv per team
  fs::path truth;
  fs::path demographics;
  fs::path urbanization;
  fs::path health;
  fs::path metadata;
};

struct RunConfig {
  InputPaths inputs;
  std::vector<double> quantile_whitelist{kHubQuantiles.begin(), kHubQuantiles.end()};
  bool strict_monotone = false;
  double trim_frac = 0.01;
  double scale_factor = 1e5;
  std::string phases = "standard";  // "standard", "detect", or a phase CSV path
  std::vector<std::string> specs = {"GLM-1", "GLM-2"};
  double gvif_threshold = 2.0;
  GroupingAttribute group = GroupingAttribute::Race;
  std::uint64_t seed = 1;
  bool bootstrap = false;
  int bootstrap_reps = 1000;
  fs::path out = "out";
  int threads = 1;
  SynthConfig synth;
};

namespace detail {

inline Json synth_to_json(const SynthConfig& s) {
  Json teams = Json::array();
  for (const auto& t : s.teams)
    teams.push_back({{"team_id", t.team_id},
                     {"model_type", std::string(to_string(t.model_type))},
                     {"mobility", std::string(to_string(t.mobility))}});
  Json planted = Json::object();
  for (const auto& [k, v] : s.planted) planted[k] = v;
  auto range = [](Range r) { return Json::array({r.lo, r.hi}); };
  return Json{{"n_counties", s.n_counties},
              {"n_weeks", s.n_weeks},
              {"start_week", format_date(s.start_week)},
              {"lookaheads", s.lookaheads},
              {"teams", teams},
              {"planted", planted},
              {"baseline", s.baseline},
              {"noise_sd", s.noise_sd},
              {"heavy_tail_frac", s.heavy_tail_frac},
              {"pct_black", range(s.pct_black)},
              {"pct_hispanic", range(s.pct_hispanic)},
              {"pct_asian", range(s.pct_asian)},
              {"minority_plurality_frac", s.minority_plurality_frac},
              {"minority_share", range(s.minority_share)},
              {"pct_age65", range(s.pct_age65)},
              {"health", range(s.health)},
              {"population", range(s.population)},
              {"states", s.states},
              {"state_fips", s.state_fips},
              {"max_weekly_cases", s.max_weekly_cases}};
}

inline void synth_from_json(const Json& j, SynthConfig& s) {
  for (const auto& [key, v] : j.items()) {
    if (key == "n_counties") s.n_counties = v.get<int>();
    else if (key == "n_weeks") s.n_weeks = v.get<int>();
    else if (key == "start_week") {
      auto d = parse_date(v.get<std::string>());
      if (!d) throw InputError("config: synth.start_week is not a date");
      s.start_week = *d;
    } else if (key == "lookaheads") s.lookaheads = v.get<std::vector<int>>();
    else if (key == "teams") {
      s.teams.clear();
      for (const auto& t : v) {
        auto type = model_type_from_string(t.at("model_type").get<std::string>());
        auto mob = mobility_from_string(t.at("mobility").get<std::string>());
        if (!type || !mob) throw InputError("config: synth team has unknown model_type or mobility");
        s.teams.push_back({t.at("team_id").get<std::string>(), *type, *mob});
      }
    } else if (key == "planted") {
      s.planted.clear();
      for (const auto& [k, e] : v.items()) s.planted[k] = e.get<double>();
    } else if (key == "baseline") s.baseline = v.get<double>();
    else if (key == "noise_sd") s.noise_sd = v.get<double>();
    else if (key == "heavy_tail_frac") s.heavy_tail_frac = v.get<double>();
    else if (key == "minority_plurality_frac") s.minority_plurality_frac = v.get<double>();
    else if (key == "pct_black" || key == "pct_hispanic" || key == "pct_asian" ||
             key == "pct_age65" || key == "health" || key == "population" ||
             key == "minority_share") {
      const auto r = v.get<std::vector<double>>();
      if (r.size() != 2 || !(r[0] <= r[1])) throw InputError("config: synth." + key + " must be [lo, hi]");
      Range& dst = key == "pct_black"      ? s.pct_black
                   : key == "pct_hispanic" ? s.pct_hispanic
                   : key == "pct_asian"    ? s.pct_asian
                   : key == "pct_age65"    ? s.pct_age65
                   : key == "health"       ? s.health
                   : key == "minority_share" ? s.minority_share
                                           : s.population;
      dst = {r[0], r[1]};
    } else if (key == "states") s.states = v.get<std::vector<std::string>>();
    else if (key == "state_fips") s.state_fips = v.get<std::vector<std::string>>();
    else if (key == "max_weekly_cases") s.max_weekly_cases = v.get<long long>();
    else throw InputError("config: unknown key synth." + key);
  }
}

}  // namespace detail

// Analysis-relevant settings in canonical form; `out` and `threads` are
// excluded so relocating a run does not change its hash.
inline Json to_json(const RunConfig& c) {
  return Json{{"inputs",
               {{"forecasts_dir", c.inputs.forecasts_dir.generic_string()},
                {"truth", c.inputs.truth.generic_string()},
                {"demographics", c.inputs.demographics.generic_string()},
                {"urbanization", c.inputs.urbanization.generic_string()},
                {"health", c.inputs.health.generic_string()},
                {"metadata", c.inputs.metadata.generic_string()}}},
              {"quantile_whitelist", c.quantile_whitelist},
              {"strict_monotone", c.strict_monotone},
              {"trim_frac", c.trim_frac},
              {"scale_factor", c.scale_factor},
              {"phases", c.phases},
              {"specs", c.specs},
              {"gvif_threshold", c.gvif_threshold},
              {"group", std::string(to_string(c.group))},
              {"seed", c.seed},
              {"bootstrap", c.bootstrap},
              {"bootstrap_reps", c.bootstrap_reps},
              {"synth", detail::synth_to_json(c.synth)}};
}

inline std::string config_hash(const RunConfig& c) { return text::hex64(text::fnv1a(to_json(c).dump())); }

inline GroupingAttribute parse_group(std::string_view s) {
  if (s == "race") return GroupingAttribute::Race;
  if (s == "urbanicity") return GroupingAttribute::Urbanicity;
  throw InputError("group must be 'race' or 'urbanicity', got '" + std::string(s) + "'");
}

inline void validate_specs(const std::vector<std::string>& specs) {
  if (specs.empty()) throw InputError("spec list is empty");
  for (const auto& s : specs) (void)model_spec(s);
}

// Relative input paths resolve against `base` (the config file's directory).
inline RunConfig parse_run_config(const Json& j, const fs::path& base) {
  RunConfig c;
  if (!j.is_object()) throw InputError("config: top level must be an object");
  auto resolve = [&](const Json& v) {
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "inputs") {
        for (const auto& [k, p] : v.items()) {
          if (k == "forecasts_dir") c.inputs.forecasts_dir = resolve(p);
          else if (k == "truth") c.inputs.truth = resolve(p);
          else if (k == "demographics") c.inputs.demographics = resolve(p);
          else if (k == "urbanization") c.inputs.urbanization = resolve(p);
          else if (k == "health") c.inputs.health = resolve(p);
          else if (k == "metadata") c.inputs.metadata = resolve(p);
          else throw InputError("config: unknown key inputs." + k);
        }
      } else if (key == "quantile_whitelist") c.quantile_whitelist = v.get<std::vector<double>>();
      else if (key == "strict_monotone") c.strict_monotone = v.get<bool>();
      else if (key == "trim_frac") c.trim_frac = v.get<double>();
      else if (key == "scale_factor") c.scale_factor = v.get<double>();
      else if (key == "phases") {
        c.phases = v.get<std::string>();
        if (c.phases != "standard" && c.phases != "detect") c.phases = resolve(v).string();
      } else if (key == "specs") c.specs = v.get<std::vector<std::string>>();
      else if (key == "gvif_threshold") c.gvif_threshold = v.get<double>();
      else if (key == "group") c.group = parse_group(v.get<std::string>());
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "bootstrap") c.bootstrap = v.get<bool>();
      else if (key == "bootstrap_reps") c.bootstrap_reps = v.get<int>();
      else if (key == "out") c.out = resolve(v);
      else if (key == "threads") c.threads = v.get<int>();
      else if (key == "synth") detail::synth_from_json(v, c.synth);
      else throw InputError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  c.synth.seed = c.seed;
  c.synth.scale_factor = c.scale_factor;
  validate_specs(c.specs);
  if (!(c.trim_frac >= 0.0 && c.trim_frac < 0.5)) throw InputError("trim_frac must lie in [0, 0.5)");
  if (!(c.scale_factor > 0.0)) throw InputError("scale_factor must be positive");
  if (!(c.gvif_threshold > 1.0)) throw InputError("gvif_threshold must exceed 1");
  if (c.threads < 1) throw InputError("threads must be at least 1");
  if (c.bootstrap_reps < 10) throw InputError("bootstrap_reps must be at least 10");
  return c;
}

inline RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

inline void require_inputs(const RunConfig& c) {
  const std::vector<std::pair<const char*, fs::path>> paths = {
      {"forecasts_dir", c.inputs.forecasts_dir}, {"truth", c.inputs.truth},
      {"demographics", c.inputs.demographics},   {"urbanization", c.inputs.urbanization},
      {"health", c.inputs.health},               {"metadata", c.inputs.metadata}};
  for (const auto& [name, p] : paths) {
    if (p.empty()) throw InputError(std::string("config: inputs.") + name + " is not set");
    if (!fs::exists(p)) throw InputError(std::string("input ") + name + " not found: " + p.string());
  }
  if (c.phases != "standard" && c.phases != "detect" && !fs::exists(c.phases)) {
    throw InputError("phase config not found: " + c.phases);
  }
}

// Loaded reference data shared by every stage.
struct Inputs {
  CovariateMap covariates;
  std::size_t covariates_excluded = 0;
  MetadataMap metadata;
};

inline Inputs load_reference_inputs(const RunConfig& c) {
  auto cov = parse_covariates(c.inputs.demographics.string(), c.inputs.urbanization.string(),
                              c.inputs.health.string());
  return {std::move(cov.counties), cov.excluded, parse_metadata(c.inputs.metadata.string())};
}

inline PhaseConfig resolve_phases(const RunConfig& c, const std::vector<GroundTruth>& truth) {
  if (c.phases == "standard") return PhaseConfig::standard();
  if (c.phases == "detect") {
    std::map<Date, double> national;
    for (const auto& t : truth) national[t.week_end] += static_cast<double>(t.incident_cases);
    std::vector<WeeklyCount> series;
    for (const auto& [week, cases] : national) series.push_back({week, cases});
    return detect_phases(series, 7);
  }
  return read_phase_config(c.phases);
}

// ---------------------------------------------------------------------------
// score

struct ScoreResult {
  std::vector<PblObservation> observations;  // untrimmed, panel order
  JoinReport join;
  TrimReport trim;
  PhaseConfig phases;
  std::size_t forecast_rows = 0;
  std::size_t record_errors = 0;
  std::size_t covariates_excluded = 0;
};

inline ScoreResult score_inputs(const RunConfig& c, const Inputs& inputs, std::ostream& log) {
  ForecastParseOptions opts;
  opts.quantile_whitelist = c.quantile_whitelist;
  opts.strict_monotone = c.strict_monotone;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(c.inputs.forecasts_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no forecast CSV files in " + c.inputs.forecasts_dir.string());

  ScoreResult result;
  std::vector<QuantileForecast> forecasts;
  for (const auto& f : files) {
    auto parsed = parse_forecasts(f.string(), f.stem().string(), opts);
    result.forecast_rows += parsed.rows_read;
    result.record_errors += parsed.errors.size();
    for (const auto& e : parsed.errors) log << "warning: " << e.source << ':' << e.line << ": " << e.message << '\n';
    forecasts.insert(forecasts.end(), std::make_move_iterator(parsed.forecasts.begin()),
                     std::make_move_iterator(parsed.forecasts.end()));
  }
  auto truth = parse_truth(c.inputs.truth.string());
  for (const auto& e : truth.errors) log << "warning: " << e.source << ':' << e.line << ": " << e.message << '\n';
  for (const auto& w : truth.warnings) log << "warning: " << w << '\n';
  result.record_errors += truth.errors.size();

  result.phases = resolve_phases(c, truth.truth);
  auto panel = join_panel(forecasts, truth.truth, inputs.covariates, inputs.metadata, result.phases);
  result.join = panel.report;
  result.covariates_excluded = inputs.covariates_excluded;
  result.observations = score_panel(panel, c.scale_factor);
  if (result.observations.empty()) throw InputError("no forecast groups survived the join");
  result.trim = trim_observations(result.observations, c.trim_frac).report;
  return result;
}

inline Json trim_report_json(const TrimReport& t) {
  return Json{{"n_in", t.n_in},
              {"removed", t.removed},
              {"trim_frac", t.trim_frac},
              {"threshold", std::isnan(t.threshold) ? Json(nullptr) : Json(t.threshold)}};
}

inline Json score_report_json(const ScoreResult& r) {
  Json dropped = Json::object();
  for (const auto& [k, v] : r.join.dropped) dropped[k] = v;
  return Json{{"forecast_rows", r.forecast_rows},
              {"record_errors", r.record_errors},
              {"covariates_excluded", r.covariates_excluded},
              {"groups", r.join.input_groups},
              {"retained", r.join.retained},
              {"dropped", dropped},
              {"trim", trim_report_json(r.trim)}};
}

inline std::ofstream open_output(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

// Writes panel.csv (untrimmed scored panel), phases.csv and score_report.json.
inline ScoreResult cmd_score(const RunConfig& c, std::ostream& log) {
  require_inputs(c);
  const auto inputs = load_reference_inputs(c);
  auto result = score_inputs(c, inputs, log);
  {
    auto out = open_output(c.out / "panel.csv");
    write_scored_panel(out, result.observations);
  }
  {
    auto out = open_output(c.out / "phases.csv");
    write_phase_config(out, result.phases);
  }
  {
    auto out = open_output(c.out / "score_report.json");
    out << score_report_json(result).dump(2) << '\n';
  }
  log << "scored " << result.observations.size() << " forecast groups (" << result.join.total_dropped()
      << " dropped at join); trimming removes " << result.trim.removed << '\n';
  return result;
}

inline std::vector<PblObservation> load_panel(const RunConfig& c, const Inputs& inputs) {
  const auto path = c.out / "panel.csv";
  std::ifstream in(path);
  if (!in) throw InputError("scored panel not found: " + path.string() + " (run 'score' first)");
  return read_scored_panel(in, inputs.covariates, inputs.metadata, path.string());
}

// ---------------------------------------------------------------------------
// fit

struct SpecOutcome {
  std::string spec;
  bool ok = false;
  std::string error;
  std::vector<Removal> removed;
  GvifReport gvif;
  std::optional<DesignMatrix> design;
  std::optional<FitResult> fit;
  std::vector<RelativeEffect> effects;
};

// GVIF screening runs on the main-effects design of the spec; the surviving
// controls are then used to build the spec's own design (with interactions).
// Collinearity among protected terms is a hard error for the whole run.
inline SpecOutcome fit_spec(const std::string& name, std::span<const PblObservation> obs,
                            double gvif_threshold) {
  SpecOutcome o;
  o.spec = name;
  auto spec = model_spec(name);
  const auto main = build_design(spec.main_effects(), obs);
  auto screen = screen_collinearity(main, gvif_threshold, default_protected_terms(main));
  o.removed = screen.removed;
  o.gvif = screen.final_report;
  spec.controls = screen.design.spec.controls;
  o.design = spec.interaction_with ? build_design(spec, obs) : std::move(screen.design);
  try {
    o.fit = fit_glm(*o.design);
    if (spec.interaction_with) o.effects = relative_effects(*o.fit, *o.design, *spec.interaction_with);
    o.ok = true;
  } catch (const NonConvergence& e) {
    o.error = e.what();
  } catch (const RankDeficient& e) {
    o.error = e.what();
  }
  return o;
}

inline Json diagnostics_json(const SpecOutcome& o) {
  Json j{{"spec", o.spec}, {"ok", o.ok}};
  if (!o.ok) {
    j["error"] = o.error;
    return j;
  }
  const auto& f = *o.fit;
  const auto d = fit_diagnostics(f, *o.design);
  j["n"] = f.n;
  j["p"] = f.p;
  j["link"] = std::string(to_string(f.link));
  j["iterations"] = f.iterations;
  j["dispersion"] = f.dispersion;
  j["deviance"] = f.deviance;
  j["loglik"] = f.loglik;
  j["loglik_null"] = f.loglik_null;
  j["pseudo_r2_cs"] = f.pseudo_r2_cs;
  j["residual_quantiles"] = {{"min", d.residual_quantiles[0]},
                             {"q25", d.residual_quantiles[1]},
                             {"median", d.residual_quantiles[2]},
                             {"q75", d.residual_quantiles[3]},
                             {"max", d.residual_quantiles[4]}};
  j["max_leverage"] = d.leverage.maxCoeff();
  j["max_cooks_distance"] = d.max_cooks;
  j["argmax_cooks_distance"] = d.argmax_cooks;
  Json removed = Json::array();
  for (const auto& r : o.removed) removed.push_back(r.term);
  j["gvif_removed"] = removed;
  return j;
}

struct FitStageResult {
  std::vector<SpecOutcome> outcomes;
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += !o.ok;
    return n;
  }
};

// Writes <spec>.coefficients.csv, <spec>.gvif.csv, <spec>.diagnostics.json and,
// for interaction specs, <spec>.relative_effects.csv; plus fit_summary.json.
inline FitStageResult cmd_fit(const RunConfig& c, std::ostream& log) {
  require_inputs(c);
  const auto inputs = load_reference_inputs(c);
  const auto panel = load_panel(c, inputs);
  const auto trimmed = trim_observations(panel, c.trim_frac);
  FitStageResult result;
  Json summary = Json::array();
  for (const auto& name : c.specs) {
    auto o = fit_spec(name, trimmed.observations, c.gvif_threshold);
    {
      auto out = open_output(c.out / (name + ".gvif.csv"));
      write_gvif_table(out, o.gvif, o.removed);
    }
    {
      auto out = open_output(c.out / (name + ".diagnostics.json"));
      out << diagnostics_json(o).dump(2) << '\n';
    }
    if (o.ok) {
      auto out = open_output(c.out / (name + ".coefficients.csv"));
      write_coefficient_table(out, *o.fit);
      if (!o.effects.empty()) {
        auto eff = open_output(c.out / (name + ".relative_effects.csv"));
        write_relative_effects(eff, o.effects);
      }
      log << name << ": n=" << o.fit->n << " p=" << o.fit->p << " iterations=" << o.fit->iterations
          << " pseudo_r2_cs=" << text::format_double(o.fit->pseudo_r2_cs) << '\n';
    } else {
      log << name << ": FAILED: " << o.error << '\n';
    }
    summary.push_back({{"spec", name}, {"ok", o.ok}, {"error", o.ok ? Json(nullptr) : Json(o.error)}});
    result.outcomes.push_back(std::move(o));
  }
  auto out = open_output(c.out / "fit_summary.json");
  out << summary.dump(2) << '\n';
  return result;
}

// ---------------------------------------------------------------------------
// bundle

inline std::vector<RelativeEffect> read_relative_effects(std::istream& in, const std::string& source) {
  text::CsvReader csv(in, source);
  std::vector<RelativeEffect> out;
  if (csv.empty_file()) return out;
  const auto c_model = csv.column("model"), c_term = csv.column("sensitive_term"),
             c_char = csv.column("characteristic"), c_level = csv.column("level"),
             c_exp = csv.column("exp_combined"), c_pct = csv.column("pct_diff"), c_se = csv.column("se"),
             c_z = csv.column("z"), c_p = csv.column("p"), c_lo = csv.column("ci_lo"),
             c_hi = csv.column("ci_hi"), c_sig = csv.column("significant");
  std::vector<std::string> f;
  while (csv.next(f)) {
    const auto where = source + ":" + std::to_string(csv.line_number());
    if (f.size() != csv.width()) throw InputError(where + ": wrong field count");
    RelativeEffect e;
    e.model = f[c_model];
    e.sensitive_term = f[c_term];
    auto ch = factor_from_string(f[c_char]);
    if (!ch) throw InputError(where + ": unknown characteristic '" + f[c_char] + "'");
    e.characteristic = *ch;
    e.level = f[c_level];
    const auto spec = model_spec(e.model);
    e.reference_level = e.level == spec.reference(*ch);
    auto num = [&](std::size_t col) {
      auto v = text::parse_double(f[col]);
      if (!v) throw InputError(where + ": malformed number '" + f[col] + "'");
      return *v;
    };
    e.exp_combined = num(c_exp);
    e.estimate = std::log(e.exp_combined);
    e.pct_diff = num(c_pct);
    e.se = num(c_se);
    e.z = num(c_z);
    e.p_value = num(c_p);
    e.exp_ci_lo = num(c_lo);
    e.exp_ci_hi = num(c_hi);
    e.significant = f[c_sig] == "1";
    out.push_back(std::move(e));
  }
  return out;
}

// The bundle is computed on the trimmed panel, the same observations the
// models are fitted on.
inline AuditBundle assemble_bundle(const RunConfig& c, std::span<const PblObservation> panel,
                                   std::vector<RelativeEffect> effects) {
  const std::vector<PblObservation> all(panel.begin(), panel.end());
  const auto trimmed = trim_observations(all, c.trim_frac);
  BundleConfig bc;
  bc.grouping = c.group;
  bc.bootstrap = c.bootstrap;
  bc.bootstrap_reps = c.bootstrap_reps;
  bc.seed = c.seed;
  bc.run.config_hash = config_hash(c);
  bc.run.trimmed = trimmed.report;
  return build_bundle(trimmed.observations, std::move(effects), bc);
}

inline Json cmd_bundle(const RunConfig& c, std::ostream& log) {
  require_inputs(c);
  const auto inputs = load_reference_inputs(c);
  const auto panel = load_panel(c, inputs);
  std::vector<RelativeEffect> effects;
  for (const auto& name : c.specs) {
    const auto path = c.out / (name + ".relative_effects.csv");
    std::ifstream in(path);
    if (!in) continue;
    auto e = read_relative_effects(in, path.string());
    effects.insert(effects.end(), e.begin(), e.end());
  }
  const auto bundle = assemble_bundle(c, panel, std::move(effects));
  const auto j = to_json(bundle);
  if (auto problems = validate_bundle_schema(j); !problems.empty()) {
    throw AnalysisError("bundle failed schema validation: " + problems.front());
  }
  {
    auto out = open_output(c.out / "bundle.json");
    out << j.dump(2) << '\n';
  }
  log << "bundle: " << bundle.teams.size() << " teams, grouping " << to_string(bundle.grouping)
      << ", config_hash " << bundle.run.config_hash << '\n';
  for (const auto& t : bundle.teams) {
    log << "  " << t.team_id << " (" << to_string(t.model_type) << "): " << t.cells.size() << " cells;";
    for (const auto& [g, m] : t.median_aer)
      log << ' ' << g << " median AER " << (m ? text::format_double(*m) : std::string("n/a")) << ';';
    log << '\n';
  }
  return j;
}

}  // namespace hubfair
