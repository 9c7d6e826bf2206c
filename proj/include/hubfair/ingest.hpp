#pragma once

// Readers for forecast-hub quantile files, ground truth, county covariates and
// team metadata, plus the join that aligns them on county x epi-week keys.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hubfair/dates.hpp"
#include "hubfair/error.hpp"
#include "hubfair/phases.hpp"
#include "hubfair/text.hpp"

namespace hubfair {

inline constexpr std::array<double, 7> kHubQuantiles = {0.025, 0.100, 0.250, 0.500,
                                                        0.750, 0.900, 0.975};
inline constexpr std::array<int, 4> kLookaheads = {7, 14, 21, 28};

enum class HealthOutcome { BPHIGH, CANCER, DIABETES, OBESITY, STROKE, COPD, KIDNEY, CASTHMA, CHD };
inline constexpr std::size_t kHealthOutcomeCount = 9;
inline constexpr std::array<std::string_view, kHealthOutcomeCount> kHealthOutcomeNames = {
    "BPHIGH", "CANCER", "DIABETES", "OBESITY", "STROKE", "COPD", "KIDNEY", "CASTHMA", "CHD"};

inline std::string_view to_string(HealthOutcome h) {
  return kHealthOutcomeNames[static_cast<std::size_t>(h)];
}

inline std::optional<HealthOutcome> health_outcome_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kHealthOutcomeCount; ++i)
    if (kHealthOutcomeNames[i] == s) return static_cast<HealthOutcome>(i);
  return std::nullopt;
}

enum class UrbanicityGroup { LM, SMM, MC };

inline std::string_view to_string(UrbanicityGroup g) {
  switch (g) {
    case UrbanicityGroup::LM: return "LM";
    case UrbanicityGroup::SMM: return "SMM";
    case UrbanicityGroup::MC: return "MC";
  }
  return "?";
}

// CDC urbanization codes 1-6 collapsed to three groups.
inline UrbanicityGroup urbanicity_from_code(int code) {
  if (code == 1 || code == 2) return UrbanicityGroup::LM;
  if (code == 3 || code == 4) return UrbanicityGroup::SMM;
  if (code == 5 || code == 6) return UrbanicityGroup::MC;
  throw DomainError("urbanization code must be in 1..6, got " + std::to_string(code));
}

// Level order matters: it fixes design-matrix column order.
enum class ModelType { Compartmental, Baseline, DeepLearning, Ensemble, Statistical };
enum class Mobility { No, Yes, Mixed };

inline std::string_view to_string(ModelType t) {
  switch (t) {
    case ModelType::Compartmental: return "Compartmental";
    case ModelType::Baseline: return "Baseline";
    case ModelType::DeepLearning: return "DeepLearning";
    case ModelType::Ensemble: return "Ensemble";
    case ModelType::Statistical: return "Statistical";
  }
  return "?";
}

inline std::string_view to_string(Mobility m) {
  switch (m) {
    case Mobility::No: return "No";
    case Mobility::Yes: return "Yes";
    case Mobility::Mixed: return "Mixed";
  }
  return "?";
}

inline std::optional<ModelType> model_type_from_string(std::string_view s) {
  if (s == "Compartmental") return ModelType::Compartmental;
  if (s == "Baseline") return ModelType::Baseline;
  if (s == "DeepLearning" || s == "Deep Learning") return ModelType::DeepLearning;
  if (s == "Ensemble") return ModelType::Ensemble;
  if (s == "Statistical") return ModelType::Statistical;
  return std::nullopt;
}

inline std::optional<Mobility> mobility_from_string(std::string_view s) {
  if (s == "No") return Mobility::No;
  if (s == "Yes") return Mobility::Yes;
  if (s == "Mixed") return Mobility::Mixed;
  return std::nullopt;
}

struct QuantileForecast {
  std::string team_id;
  Date forecast_date;
  int lookahead_days = 0;
  Date target_end_date;
  std::string fips;
  double quantile = 0.0;
  double value = 0.0;

  friend bool operator==(const QuantileForecast&, const QuantileForecast&) = default;
};

struct GroundTruth {
  std::string fips;
  Date week_end;
  long long incident_cases = 0;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct CountyCovariates {
  std::string fips;
  long long population = 0;
  double pct_white = 0.0;
  double pct_black = 0.0;
  double pct_hispanic = 0.0;
  double pct_asian = 0.0;
  double pct_age65 = 0.0;
  std::array<double, kHealthOutcomeCount> health{};
  std::string state;
  int urbanization_code = 1;

  double health_outcome(HealthOutcome h) const { return health[static_cast<std::size_t>(h)]; }
  UrbanicityGroup urbanicity() const { return urbanicity_from_code(urbanization_code); }
};

struct TeamMetadata {
  std::string team_id;
  ModelType model_type = ModelType::Compartmental;
  Mobility mobility = Mobility::No;
};

using CovariateMap = std::map<std::string, std::shared_ptr<const CountyCovariates>>;
using MetadataMap = std::map<std::string, std::shared_ptr<const TeamMetadata>>;

struct RecordError {
  std::string source;
  std::size_t line = 0;
  std::string message;
};

// ---------------------------------------------------------------------------
// Forecasts

struct ForecastParseOptions {
  std::vector<double> quantile_whitelist{kHubQuantiles.begin(), kHubQuantiles.end()};
  // Drop groups whose values decrease in quantile instead of sorting them.
  bool strict_monotone = false;
};

struct ForecastParseResult {
  std::vector<QuantileForecast> forecasts;
  std::vector<RecordError> errors;
  std::size_t rows_read = 0;
  std::size_t non_county_rows = 0;
  std::size_t non_quantile_rows = 0;
  std::size_t other_target_rows = 0;
  std::size_t off_whitelist_rows = 0;
  std::size_t groups_seen = 0;
  std::size_t groups_incomplete = 0;
  std::size_t groups_duplicate_quantile = 0;
  std::size_t groups_repaired = 0;
  std::size_t groups_crossing_dropped = 0;

  std::size_t groups_retained() const {
    return groups_seen - groups_incomplete - groups_duplicate_quantile - groups_crossing_dropped;
  }
};

namespace detail {

// "N wk ahead inc case" -> N, or nullopt for any other target.
inline std::optional<int> weeks_ahead(std::string_view target) {
  target = text::trim(target);
  const auto sp = target.find(' ');
  if (sp == std::string_view::npos) return std::nullopt;
  if (target.substr(sp) != " wk ahead inc case") return std::nullopt;
  auto n = text::parse_int(target.substr(0, sp));
  if (!n || *n < 1 || *n > 4) return std::nullopt;
  return static_cast<int>(*n);
}

}  // namespace detail

inline ForecastParseResult parse_forecasts(std::istream& in, const std::string& team_id,
                                           const ForecastParseOptions& options = {},
                                           const std::string& source = "forecasts") {
  ForecastParseResult result;
  text::CsvReader csv(in, source);
  if (csv.empty_file()) return result;
  csv.require({"forecast_date", "target", "target_end_date", "location", "type", "quantile",
               "value"});
  const auto c_fdate = csv.column("forecast_date");
  const auto c_target = csv.column("target");
  const auto c_tend = csv.column("target_end_date");
  const auto c_loc = csv.column("location");
  const auto c_type = csv.column("type");
  const auto c_q = csv.column("quantile");
  const auto c_value = csv.column("value");

  auto whitelist = options.quantile_whitelist;
  std::sort(whitelist.begin(), whitelist.end());

  using Key = std::tuple<std::string, Date, int>;  // fips, target_end_date, lookahead
  std::map<Key, std::vector<QuantileForecast>> groups;

  std::vector<std::string> f;
  while (csv.next(f)) {
    ++result.rows_read;
    auto fail = [&](std::string msg) {
      result.errors.push_back({source, csv.line_number(), std::move(msg)});
    };
    if (f.size() != csv.width()) {
      fail("expected " + std::to_string(csv.width()) + " fields, got " +
           std::to_string(f.size()));
      continue;
    }
    const auto& loc = f[c_loc];
    if (!text::is_county_fips(loc)) {
      if (loc == "US" || (loc.size() == 2 && text::parse_int(loc))) {
        ++result.non_county_rows;
      } else {
        fail("malformed location '" + loc + "'");
      }
      continue;
    }
    if (f[c_type] != "quantile") {
      if (f[c_type] == "point") {
        ++result.non_quantile_rows;
      } else {
        fail("unknown type '" + f[c_type] + "'");
      }
      continue;
    }
    auto n_weeks = detail::weeks_ahead(f[c_target]);
    if (!n_weeks) {
      ++result.other_target_rows;
      continue;
    }
    auto fdate = parse_date(f[c_fdate]);
    auto tend = parse_date(f[c_tend]);
    if (!fdate || !tend) {
      fail("malformed date");
      continue;
    }
    auto q = text::parse_double(f[c_q]);
    auto v = text::parse_double(f[c_value]);
    if (!q || !v || !std::isfinite(*q) || !std::isfinite(*v)) {
      fail("malformed quantile or value");
      continue;
    }
    if (*v < 0.0) {
      fail("negative forecast value");
      continue;
    }
    const int lookahead = 7 * *n_weeks;
    const auto gap = (*tend - *fdate).count();
    if (!is_saturday(*tend) || gap < lookahead - 6 || gap > lookahead + 6) {
      fail("target_end_date " + f[c_tend] + " inconsistent with '" + f[c_target] +
           "' issued " + f[c_fdate]);
      continue;
    }
    auto wl = std::find_if(whitelist.begin(), whitelist.end(),
                           [&](double w) { return std::abs(w - *q) < 1e-9; });
    if (wl == whitelist.end()) {
      ++result.off_whitelist_rows;
      continue;
    }
    groups[Key{loc, *tend, lookahead}].push_back(
        QuantileForecast{team_id, *fdate, lookahead, *tend, loc, *wl, *v});
  }

  result.groups_seen = groups.size();
  for (auto& [key, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const QuantileForecast& a, const QuantileForecast& b) {
                       return a.quantile < b.quantile;
                     });
    bool duplicate = false;
    for (std::size_t i = 1; i < rows.size(); ++i)
      duplicate = duplicate || rows[i].quantile == rows[i - 1].quantile;
    if (duplicate) {
      ++result.groups_duplicate_quantile;
      continue;
    }
    if (rows.size() != whitelist.size()) {
      ++result.groups_incomplete;
      continue;
    }
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      monotone = monotone && rows[i - 1].value <= rows[i].value;
    if (!monotone) {
      if (options.strict_monotone) {
        ++result.groups_crossing_dropped;
        continue;
      }
      std::vector<double> values;
      for (const auto& r : rows) values.push_back(r.value);
      std::sort(values.begin(), values.end());
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i].value = values[i];
      ++result.groups_repaired;
    }
    result.forecasts.insert(result.forecasts.end(), rows.begin(), rows.end());
  }
  return result;
}

inline ForecastParseResult parse_forecasts(const std::string& path, const std::string& team_id,
                                           const ForecastParseOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open forecast file: " + path);
  return parse_forecasts(in, team_id, options, path);
}

// Writes rows in the hub forecast schema; parse_forecasts reads it back
// unchanged.
inline void write_forecasts(std::ostream& out, const std::vector<QuantileForecast>& rows) {
  out << "forecast_date,target,target_end_date,location,type,quantile,value\n";
  for (const auto& r : rows) {
    out << format_date(r.forecast_date) << ',' << r.lookahead_days / 7 << " wk ahead inc case,"
        << format_date(r.target_end_date) << ',' << r.fips << ",quantile,"
        << text::format_double(r.quantile) << ',' << text::format_double(r.value) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Ground truth

struct TruthParseResult {
  std::vector<GroundTruth> truth;
  std::vector<RecordError> errors;
  std::vector<std::string> warnings;
  std::size_t clamped = 0;
  std::size_t skipped_unknown = 0;
};

// Accepts either cumulative counts (date,location,value; daily or weekly) or
// weekly incidence (week_end,location,incident). Cumulative input is reduced
// to the last reading in each Sunday-Saturday epi week and differenced between
// consecutive weeks; a week without a preceding week produces no row.
// Negative increments are clamped to zero and counted.
inline TruthParseResult parse_truth(std::istream& in, const std::string& source = "truth",
                                    const std::set<std::string>* known_fips = nullptr) {
  TruthParseResult result;
  text::CsvReader csv(in, source);
  if (csv.empty_file()) return result;

  const bool weekly = csv.has("week_end") && csv.has("incident");
  if (!weekly) csv.require({"date", "location", "value"});
  const auto c_date = csv.column(weekly ? "week_end" : "date");
  const auto c_loc = csv.column("location");
  const auto c_val = csv.column(weekly ? "incident" : "value");

  std::set<std::string> warned;
  auto known = [&](const std::string& fips) {
    if (text::is_county_fips(fips) && (!known_fips || known_fips->count(fips))) return true;
    ++result.skipped_unknown;
    if (warned.insert(fips).second) result.warnings.push_back("unknown location '" + fips + "' skipped");
    return false;
  };

  // fips -> week_end -> (latest date seen, cumulative value) or incident.
  std::map<std::string, std::map<Date, std::pair<Date, long long>>> by_week;
  std::map<std::pair<std::string, Date>, long long> incident;

  std::vector<std::string> f;
  while (csv.next(f)) {
    auto fail = [&](std::string msg) {
      result.errors.push_back({source, csv.line_number(), std::move(msg)});
    };
    if (f.size() != csv.width()) {
      fail("wrong field count");
      continue;
    }
    auto date = parse_date(f[c_date]);
    auto value = text::parse_int(f[c_val]);
    if (!date || !value) {
      fail("malformed date or count");
      continue;
    }
    if (!known(f[c_loc])) continue;
    if (weekly) {
      if (!is_saturday(*date)) {
        fail("week_end " + f[c_date] + " is not a Saturday");
        continue;
      }
      long long v = *value;
      if (v < 0) {
        v = 0;
        ++result.clamped;
      }
      auto [it, inserted] = incident.emplace(std::pair{f[c_loc], *date}, v);
      if (!inserted) fail("duplicate row for " + f[c_loc] + " " + f[c_date]);
    } else {
      auto [it, inserted] =
          by_week[f[c_loc]].try_emplace(epi_week_end(*date), *date, *value);
      if (!inserted && *date >= it->second.first) it->second = {*date, *value};
    }
  }

  if (weekly) {
    for (const auto& [key, v] : incident) result.truth.push_back({key.first, key.second, v});
    return result;
  }
  for (const auto& [fips, weeks] : by_week) {
    const std::pair<Date, long long>* prev = nullptr;
    Date prev_week{};
    for (const auto& [week_end, reading] : weeks) {
      if (prev && week_end - prev_week == std::chrono::days{7}) {
        long long inc = reading.second - prev->second;
        if (inc < 0) {
          inc = 0;
          ++result.clamped;
        }
        result.truth.push_back({fips, week_end, inc});
      }
      prev = &reading;
      prev_week = week_end;
    }
  }
  return result;
}

inline TruthParseResult parse_truth(const std::string& path,
                                    const std::set<std::string>* known_fips = nullptr) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open truth file: " + path);
  return parse_truth(in, path, known_fips);
}

inline void write_truth_weekly(std::ostream& out, const std::vector<GroundTruth>& rows) {
  out << "week_end,location,incident\n";
  for (const auto& r : rows)
    out << format_date(r.week_end) << ',' << r.fips << ',' << r.incident_cases << '\n';
}

// ---------------------------------------------------------------------------
// Covariates and metadata

struct CovariateParseResult {
  CovariateMap counties;
  std::size_t demographic_rows = 0;
  std::size_t excluded = 0;  // present in some source but not all
};

namespace detail {

inline double read_percent(const std::vector<std::string>& f, std::size_t col,
                           const std::string& field, const std::string& fips,
                           const std::string& where) {
  auto v = text::parse_double(f[col]);
  if (!v) throw InputError(where + ": malformed " + field + " for fips " + fips);
  if (!(*v >= 0.0 && *v <= 100.0)) {
    throw InputError(where + ": " + field + " = " + f[col] + " outside [0,100] for fips " + fips);
  }
  return *v;
}

}  // namespace detail

inline CovariateParseResult parse_covariates(std::istream& demo, std::istream& urban,
                                             std::istream& health,
                                             const std::string& demo_source = "demographics",
                                             const std::string& urban_source = "urbanization",
                                             const std::string& health_source = "health") {
  std::map<std::string, CountyCovariates> rows;
  std::vector<std::string> f;

  text::CsvReader d(demo, demo_source);
  if (d.empty_file()) throw InputError(demo_source + ": empty file");
  const auto c_fips = d.column("fips");
  const auto c_pop = d.column("population");
  const auto c_w = d.column("pct_white");
  const auto c_b = d.column("pct_black");
  const auto c_h = d.column("pct_hispanic");
  const auto c_a = d.column("pct_asian");
  const auto c_65 = d.column("pct_age65");
  const auto c_state = d.column("state");
  std::size_t demographic_rows = 0;
  while (d.next(f)) {
    const auto where = demo_source + ":" + std::to_string(d.line_number());
    if (f.size() != d.width()) throw InputError(where + ": wrong field count");
    CountyCovariates c;
    c.fips = f[c_fips];
    if (!text::is_county_fips(c.fips)) throw InputError(where + ": malformed fips '" + c.fips + "'");
    auto pop = text::parse_int(f[c_pop]);
    if (!pop || *pop <= 0) throw InputError(where + ": population must be positive for fips " + c.fips);
    c.population = *pop;
    c.pct_white = detail::read_percent(f, c_w, "pct_white", c.fips, where);
    c.pct_black = detail::read_percent(f, c_b, "pct_black", c.fips, where);
    c.pct_hispanic = detail::read_percent(f, c_h, "pct_hispanic", c.fips, where);
    c.pct_asian = detail::read_percent(f, c_a, "pct_asian", c.fips, where);
    c.pct_age65 = detail::read_percent(f, c_65, "pct_age65", c.fips, where);
    c.state = f[c_state];
    if (c.state.empty()) throw InputError(where + ": missing state for fips " + c.fips);
    if (!rows.emplace(c.fips, c).second) throw InputError(where + ": duplicate fips " + c.fips);
    ++demographic_rows;
  }

  std::map<std::string, int> codes;
  text::CsvReader u(urban, urban_source);
  if (u.empty_file()) throw InputError(urban_source + ": empty file");
  const auto u_fips = u.column("fips");
  const auto u_code = u.column("code");
  while (u.next(f)) {
    const auto where = urban_source + ":" + std::to_string(u.line_number());
    if (f.size() != u.width()) throw InputError(where + ": wrong field count");
    auto code = text::parse_int(f[u_code]);
    if (!code || *code < 1 || *code > 6) {
      throw InputError(where + ": urbanization code must be in 1..6 for fips " + f[u_fips]);
    }
    codes[f[u_fips]] = static_cast<int>(*code);
  }

  std::map<std::string, std::array<double, kHealthOutcomeCount>> outcomes;
  text::CsvReader h(health, health_source);
  if (h.empty_file()) throw InputError(health_source + ": empty file");
  const auto h_fips = h.column("fips");
  std::array<std::size_t, kHealthOutcomeCount> h_cols{};
  for (std::size_t i = 0; i < kHealthOutcomeCount; ++i)
    h_cols[i] = h.column(std::string(kHealthOutcomeNames[i]));
  while (h.next(f)) {
    const auto where = health_source + ":" + std::to_string(h.line_number());
    if (f.size() != h.width()) throw InputError(where + ": wrong field count");
    std::array<double, kHealthOutcomeCount> vals{};
    for (std::size_t i = 0; i < kHealthOutcomeCount; ++i) {
      vals[i] = detail::read_percent(f, h_cols[i], std::string(kHealthOutcomeNames[i]),
                                     f[h_fips], where);
    }
    outcomes[f[h_fips]] = vals;
  }

  CovariateParseResult result;
  result.demographic_rows = demographic_rows;
  std::set<std::string> all;
  for (const auto& [k, _] : rows) all.insert(k);
  for (const auto& [k, _] : codes) all.insert(k);
  for (const auto& [k, _] : outcomes) all.insert(k);
  for (const auto& fips : all) {
    auto r = rows.find(fips);
    auto c = codes.find(fips);
    auto o = outcomes.find(fips);
    if (r == rows.end() || c == codes.end() || o == outcomes.end()) {
      ++result.excluded;
      continue;
    }
    auto county = r->second;
    county.urbanization_code = c->second;
    county.health = o->second;
    result.counties.emplace(fips, std::make_shared<const CountyCovariates>(std::move(county)));
  }
  return result;
}

inline CovariateParseResult parse_covariates(const std::string& demo_path,
                                             const std::string& urban_path,
                                             const std::string& health_path) {
  std::ifstream demo(demo_path), urban(urban_path), health(health_path);
  if (!demo) throw InputError("cannot open demographics file: " + demo_path);
  if (!urban) throw InputError("cannot open urbanization file: " + urban_path);
  if (!health) throw InputError("cannot open health file: " + health_path);
  return parse_covariates(demo, urban, health, demo_path, urban_path, health_path);
}

inline MetadataMap parse_metadata(std::istream& in, const std::string& source = "metadata") {
  text::CsvReader csv(in, source);
  MetadataMap out;
  if (csv.empty_file()) return out;
  const auto c_team = csv.column("team_id");
  const auto c_type = csv.column("model_type");
  const auto c_mob = csv.column("mobility");
  std::vector<std::string> f;
  while (csv.next(f)) {
    const auto where = source + ":" + std::to_string(csv.line_number());
    if (f.size() != csv.width()) throw InputError(where + ": wrong field count");
    auto type = model_type_from_string(f[c_type]);
    auto mob = mobility_from_string(f[c_mob]);
    if (!type) throw InputError(where + ": unknown model_type '" + f[c_type] + "'");
    if (!mob) throw InputError(where + ": unknown mobility '" + f[c_mob] + "'");
    auto meta = std::make_shared<const TeamMetadata>(TeamMetadata{f[c_team], *type, *mob});
    if (!out.emplace(f[c_team], std::move(meta)).second) {
      throw InputError(where + ": duplicate team_id '" + f[c_team] + "'");
    }
  }
  return out;
}

inline MetadataMap parse_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open metadata file: " + path);
  return parse_metadata(in, path);
}

// ---------------------------------------------------------------------------
// Join

struct QuantilePoint {
  double quantile = 0.0;
  double value = 0.0;
};

struct ForecastGroup {
  std::string team_id;
  std::string fips;
  Date target_end_date;
  int lookahead_days = 0;
  std::vector<QuantilePoint> quantiles;  // strictly increasing quantile
};

struct PanelRow {
  ForecastGroup group;
  long long truth = 0;
  std::shared_ptr<const CountyCovariates> covariates;
  std::shared_ptr<const TeamMetadata> metadata;
  int phase = 0;
};

struct JoinReport {
  std::size_t input_groups = 0;
  std::size_t retained = 0;
  std::map<std::string, std::size_t> dropped;  // cause -> count

  std::size_t total_dropped() const {
    std::size_t n = 0;
    for (const auto& [_, c] : dropped) n += c;
    return n;
  }
};

struct Panel {
  std::vector<PanelRow> rows;
  JoinReport report;
};

// Groups quantile rows by (team, fips, target_end_date, lookahead) and attaches
// truth, covariates, metadata and phase. Output is sorted by that key.
inline Panel join_panel(const std::vector<QuantileForecast>& forecasts,
                        const std::vector<GroundTruth>& truth, const CovariateMap& covariates,
                        const MetadataMap& metadata, const PhaseConfig& phases) {
  using Key = std::tuple<std::string, std::string, Date, int>;
  std::map<Key, ForecastGroup> groups;
  for (const auto& q : forecasts) {
    auto& g = groups[Key{q.team_id, q.fips, q.target_end_date, q.lookahead_days}];
    if (g.quantiles.empty()) {
      g.team_id = q.team_id;
      g.fips = q.fips;
      g.target_end_date = q.target_end_date;
      g.lookahead_days = q.lookahead_days;
    }
    g.quantiles.push_back({q.quantile, q.value});
  }

  std::map<std::pair<std::string, Date>, long long> truth_index;
  for (const auto& t : truth) truth_index[{t.fips, t.week_end}] = t.incident_cases;

  Panel panel;
  panel.report.input_groups = groups.size();
  auto drop = [&](const char* cause) { ++panel.report.dropped[cause]; };
  for (auto& [key, g] : groups) {
    std::sort(g.quantiles.begin(), g.quantiles.end(),
              [](const QuantilePoint& a, const QuantilePoint& b) { return a.quantile < b.quantile; });
    bool valid = g.quantiles.size() == kHubQuantiles.size();
    for (std::size_t i = 1; valid && i < g.quantiles.size(); ++i) {
      valid = g.quantiles[i - 1].quantile < g.quantiles[i].quantile &&
              g.quantiles[i - 1].value <= g.quantiles[i].value;
    }
    if (!valid) {
      drop("invalid_group");
      continue;
    }
    auto t = truth_index.find({g.fips, g.target_end_date});
    if (t == truth_index.end()) {
      drop("missing_truth");
      continue;
    }
    auto c = covariates.find(g.fips);
    if (c == covariates.end()) {
      drop("missing_covariates");
      continue;
    }
    auto m = metadata.find(g.team_id);
    if (m == metadata.end()) {
      drop("missing_metadata");
      continue;
    }
    if (!phases.contains(g.target_end_date)) {
      drop("outside_phase_span");
      continue;
    }
    const int phase = phases.assign(g.target_end_date);
    panel.rows.push_back(PanelRow{std::move(g), t->second, c->second, m->second, phase});
  }
  panel.report.retained = panel.rows.size();
  return panel;
}

}  // namespace hubfair
