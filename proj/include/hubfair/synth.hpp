#pragma once

// Synthetic hub data with planted effects on the expected square-root PBL.
// Forecasts over-forecast the truth by a constant offset d at all seven
// quantiles, so the mean pinball loss is exactly d/2 and the target PBL can be
// inverted in closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "hubfair/dates.hpp"
#include "hubfair/design.hpp"
#include "hubfair/error.hpp"
#include "hubfair/ingest.hpp"
#include "hubfair/phases.hpp"
#include "hubfair/text.hpp"

namespace hubfair {

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_counties = 300;
  int n_weeks = 40;
  Date start_week = make_date(2020, 6, 6);  // first target week (a Saturday)
  std::vector<int> lookaheads{kLookaheads.begin(), kLookaheads.end()};
  std::vector<TeamMetadata> teams = {{"TeamA-Compartmental", ModelType::Compartmental, Mobility::No},
                                     {"TeamB-Statistical", ModelType::Statistical, Mobility::No}};
  // Design column label -> multiplicative effect per unit (race shares are in
  // percent). Recognized labels: pct_white/black/hispanic/asian, urb_SMM,
  // urb_MC and characteristic dummies such as lookahead14 or phase1.
  std::map<std::string, double> planted = {{"pct_hispanic", 1.216}};
  double baseline = 1.0;    // exp(intercept)
  double noise_sd = 0.1;    // additive Gaussian noise on sqrt PBL
  // Share of observations replaced by outliers above every clean value; match
  // the pipeline's trim fraction so trimming removes exactly these.
  double heavy_tail_frac = 0.01;
  double scale_factor = 1e5;  // must match the scoring scale factor

  Range pct_black{0.0, 10.0};
  Range pct_hispanic{0.0, 10.0};
  Range pct_asian{0.0, 5.0};
  // Counties whose plurality is Black, Hispanic or Asian (chosen uniformly);
  // that group's share is drawn from minority_share instead of its range.
  double minority_plurality_frac = 0.0;
  Range minority_share{55.0, 75.0};
  Range pct_age65{10.0, 25.0};
  Range health{5.0, 40.0};
  Range population{1e4, 5e5};
  std::vector<std::string> states = {"AL", "GA", "OH", "TX"};
  std::vector<std::string> state_fips = {"01", "13", "39", "48"};
  long long max_weekly_cases = 2000;
};

struct SynthData {
  std::vector<QuantileForecast> forecasts;  // all teams
  std::vector<GroundTruth> truth;
  std::vector<CountyCovariates> counties;
  std::vector<TeamMetadata> teams;
  std::size_t n_outliers = 0;

  CovariateMap covariate_map() const {
    CovariateMap m;
    for (const auto& c : counties) m.emplace(c.fips, std::make_shared<const CountyCovariates>(c));
    return m;
  }
  MetadataMap metadata_map() const {
    MetadataMap m;
    for (const auto& t : teams) m.emplace(t.team_id, std::make_shared<const TeamMetadata>(t));
    return m;
  }
};

namespace detail {

// Value of a planted-effect column for one observation.
inline double planted_column(const std::string& label, const CountyCovariates& c,
                             const TeamMetadata& team, int lookahead, int phase) {
  if (label == "pct_white") return c.pct_white;
  if (label == "pct_black") return c.pct_black;
  if (label == "pct_hispanic") return c.pct_hispanic;
  if (label == "pct_asian") return c.pct_asian;
  if (label == "urb_SMM") return c.urbanicity() == UrbanicityGroup::SMM ? 1.0 : 0.0;
  if (label == "urb_MC") return c.urbanicity() == UrbanicityGroup::MC ? 1.0 : 0.0;
  if (label == level_column(Factor::Lookahead, std::to_string(lookahead))) return 1.0;
  if (label == level_column(Factor::Phase, std::to_string(phase))) return 1.0;
  if (label == level_column(Factor::ModelType, to_string(team.model_type))) return 1.0;
  if (label == level_column(Factor::Mobility, to_string(team.mobility))) return 1.0;
  return 0.0;
}

inline bool known_planted_label(const std::string& label) {
  static const std::vector<std::string> fixed = {"pct_white", "pct_black", "pct_hispanic",
                                                 "pct_asian", "urb_SMM",   "urb_MC"};
  if (std::find(fixed.begin(), fixed.end(), label) != fixed.end()) return true;
  for (auto prefix : {"lookahead", "phase", "model_type_", "mobility_"})
    if (label.rfind(prefix, 0) == 0) return true;
  return false;
}

}  // namespace detail

inline void validate(const SynthConfig& c) {
  if (c.n_counties < 50) throw InputError("synth: n_counties must be at least 50");
  if (c.n_counties > 999) throw InputError("synth: n_counties must be at most 999");
  if (c.n_weeks < 1) throw InputError("synth: n_weeks must be positive");
  if (!is_saturday(c.start_week)) throw InputError("synth: start_week must be a Saturday");
  if (c.teams.empty()) throw InputError("synth: at least one team is required");
  if (c.lookaheads.empty()) throw InputError("synth: at least one lookahead is required");
  for (int la : c.lookaheads)
    if (std::find(kLookaheads.begin(), kLookaheads.end(), la) == kLookaheads.end())
      throw InputError("synth: lookahead must be one of 7, 14, 21, 28");
  for (const auto& [label, effect] : c.planted) {
    if (!(effect > 0.0)) throw InputError("synth: planted effect for " + label + " must be > 0");
    if (!detail::known_planted_label(label))
      throw InputError("synth: unknown planted column '" + label + "'");
  }
  if (!(c.baseline > 0.0)) throw InputError("synth: baseline must be > 0");
  if (!(c.noise_sd >= 0.0)) throw InputError("synth: noise_sd must be >= 0");
  if (!(c.heavy_tail_frac >= 0.0 && c.heavy_tail_frac < 0.5))
    throw InputError("synth: heavy_tail_frac must lie in [0, 0.5)");
  if (c.states.empty() || c.states.size() != c.state_fips.size())
    throw InputError("synth: states and state_fips must be non-empty and equal length");
  if (c.pct_black.hi + c.pct_hispanic.hi + c.pct_asian.hi > 100.0)
    throw InputError("synth: race share ranges can exceed 100%");
  if (!(c.minority_plurality_frac >= 0.0 && c.minority_plurality_frac <= 1.0))
    throw InputError("synth: minority_plurality_frac must lie in [0, 1]");
  if (c.minority_plurality_frac > 0.0) {
    // The chosen group holds a majority, and the others still fit beside it.
    const double largest_two = c.pct_black.hi + c.pct_hispanic.hi + c.pct_asian.hi -
                               std::min({c.pct_black.hi, c.pct_hispanic.hi, c.pct_asian.hi});
    if (!(c.minority_share.lo > 50.0) || c.minority_share.hi + largest_two > 100.0)
      throw InputError("synth: minority_share must lie above 50% and leave room for the other groups");
  }
}

inline SynthData generate(const SynthConfig& config, const PhaseConfig& phases = PhaseConfig::standard()) {
  validate(config);
  std::mt19937_64 rng(config.seed);
  auto uniform = [&](Range r) { return std::uniform_real_distribution<double>(r.lo, r.hi)(rng); };

  SynthData data;
  data.teams = config.teams;
  std::uniform_int_distribution<std::size_t> pick_state(0, config.states.size() - 1);
  std::uniform_int_distribution<int> pick_code(1, 6);
  for (int i = 0; i < config.n_counties; ++i) {
    CountyCovariates c;
    const auto s = pick_state(rng);
    auto seq = std::to_string(i + 1);
    c.fips = config.state_fips[s] + std::string(3 - seq.size(), '0') + seq;
    c.state = config.states[s];
    c.population = static_cast<long long>(std::llround(uniform(config.population)));
    c.pct_black = uniform(config.pct_black);
    c.pct_hispanic = uniform(config.pct_hispanic);
    c.pct_asian = uniform(config.pct_asian);
    if (config.minority_plurality_frac > 0.0 &&
        std::uniform_real_distribution<double>(0.0, 1.0)(rng) < config.minority_plurality_frac) {
      double* shares[] = {&c.pct_black, &c.pct_hispanic, &c.pct_asian};
      *shares[std::uniform_int_distribution<int>(0, 2)(rng)] = uniform(config.minority_share);
    }
    c.pct_white = 100.0 - c.pct_black - c.pct_hispanic - c.pct_asian;
    c.pct_age65 = uniform(config.pct_age65);
    for (auto& h : c.health) h = uniform(config.health);
    c.urbanization_code = pick_code(rng);
    data.counties.push_back(std::move(c));
  }

  std::uniform_int_distribution<long long> pick_cases(0, config.max_weekly_cases);
  std::vector<Date> weeks;
  for (int w = 0; w < config.n_weeks; ++w) weeks.push_back(config.start_week + std::chrono::days(7 * w));
  std::vector<long long> cases(data.counties.size() * weeks.size());
  for (std::size_t ci = 0; ci < data.counties.size(); ++ci) {
    for (std::size_t w = 0; w < weeks.size(); ++w) {
      cases[ci * weeks.size() + w] = pick_cases(rng);
      data.truth.push_back({data.counties[ci].fips, weeks[w], cases[ci * weeks.size() + w]});
    }
  }

  // Target sqrt PBL per (team, county, week, lookahead).
  struct Target {
    std::size_t team, county, week;
    int lookahead;
    double s;
  };
  std::vector<Target> targets;
  std::normal_distribution<double> noise(0.0, 1.0);
  const double log_base = std::log(config.baseline);
  for (std::size_t t = 0; t < config.teams.size(); ++t) {
    for (std::size_t ci = 0; ci < data.counties.size(); ++ci) {
      for (std::size_t w = 0; w < weeks.size(); ++w) {
        const int phase = phases.contains(weeks[w]) ? phases.assign(weeks[w]) : -1;
        for (int la : config.lookaheads) {
          double eta = log_base;
          for (const auto& [label, effect] : config.planted) {
            eta += std::log(effect) *
                   detail::planted_column(label, data.counties[ci], config.teams[t], la, phase);
          }
          const double s = std::exp(eta) + config.noise_sd * noise(rng);
          if (!(s >= 0.0)) {
            throw InputError("synth: planted effects and noise_sd produce a negative sqrt-PBL target");
          }
          targets.push_back({t, ci, w, la, s});
        }
      }
    }
  }

  const auto n_out =
      static_cast<std::size_t>(std::floor(static_cast<double>(targets.size()) * config.heavy_tail_frac));
  if (n_out > 0) {
    double max_clean = 0.0;
    for (const auto& t : targets) max_clean = std::max(max_clean, t.s);
    std::vector<std::size_t> idx(targets.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    // Partial Fisher-Yates: the first n_out entries are a uniform sample.
    for (std::size_t i = 0; i < n_out; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    std::uniform_real_distribution<double> inflate(2.0, 10.0);
    for (std::size_t i = 0; i < n_out; ++i) targets[idx[i]].s = max_clean * inflate(rng);
  }
  data.n_outliers = n_out;

  data.forecasts.reserve(targets.size() * kHubQuantiles.size());
  for (const auto& t : targets) {
    const auto& county = data.counties[t.county];
    const Date target_end = weeks[t.week];
    const long long y = cases[t.county * weeks.size() + t.week];
    // pbl_norm = s^2 = mean_pbl * scale / pop and mean_pbl = d / 2.
    const double mean_pbl = t.s * t.s * static_cast<double>(county.population) / config.scale_factor;
    const double d = 2.0 * mean_pbl;
    const Date forecast_date = target_end - std::chrono::days(5 + (t.lookahead - 7));
    for (double q : kHubQuantiles) {
      data.forecasts.push_back({config.teams[t.team].team_id, forecast_date, t.lookahead, target_end,
                                county.fips, q, static_cast<double>(y) + d});
    }
  }
  return data;
}

inline void write_demographics(std::ostream& out, const std::vector<CountyCovariates>& counties) {
  out << "fips,population,pct_white,pct_black,pct_hispanic,pct_asian,pct_age65,state\n";
  for (const auto& c : counties) {
    out << c.fips << ',' << c.population << ',' << text::format_double(c.pct_white) << ','
        << text::format_double(c.pct_black) << ',' << text::format_double(c.pct_hispanic) << ','
        << text::format_double(c.pct_asian) << ',' << text::format_double(c.pct_age65) << ','
        << c.state << '\n';
  }
}

inline void write_urbanization(std::ostream& out, const std::vector<CountyCovariates>& counties) {
  out << "fips,code\n";
  for (const auto& c : counties) out << c.fips << ',' << c.urbanization_code << '\n';
}

inline void write_health(std::ostream& out, const std::vector<CountyCovariates>& counties) {
  out << "fips";
  for (auto name : kHealthOutcomeNames) out << ',' << name;
  out << '\n';
  for (const auto& c : counties) {
    out << c.fips;
    for (double v : c.health) out << ',' << text::format_double(v);
    out << '\n';
  }
}

inline void write_metadata(std::ostream& out, const std::vector<TeamMetadata>& teams) {
  out << "team_id,model_type,mobility\n";
  for (const auto& t : teams) out << t.team_id << ',' << to_string(t.model_type) << ',' << to_string(t.mobility) << '\n';
}

// Writes the ingest file layout under `dir`: forecasts/<team>.csv, truth.csv,
// demographics.csv, urbanization.csv, health.csv, metadata.csv.
inline void write_synth_files(const SynthData& data, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "forecasts");
  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write " + p.string());
    return out;
  };
  for (const auto& team : data.teams) {
    std::vector<QuantileForecast> rows;
    for (const auto& f : data.forecasts)
      if (f.team_id == team.team_id) rows.push_back(f);
    auto out = open(dir / "forecasts" / (team.team_id + ".csv"));
    write_forecasts(out, rows);
  }
  {
    auto out = open(dir / "truth.csv");
    write_truth_weekly(out, data.truth);
  }
  {
    auto out = open(dir / "demographics.csv");
    write_demographics(out, data.counties);
  }
  {
    auto out = open(dir / "urbanization.csv");
    write_urbanization(out, data.counties);
  }
  {
    auto out = open(dir / "health.csv");
    write_health(out, data.counties);
  }
  {
    auto out = open(dir / "metadata.csv");
    write_metadata(out, data.teams);
  }
}

}  // namespace hubfair
