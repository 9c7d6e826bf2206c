#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hubfair/error.hpp"
#include "hubfair/ingest.hpp"

namespace hubfair {

// Quantile (pinball) loss of forecast f for observation y at level tau.
// Under-forecasts cost tau per unit, over-forecasts (1 - tau) per unit.
inline double pinball_loss(double y, double f, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("pinball_loss: tau must lie in (0,1), got " + std::to_string(tau));
  }
  if (!std::isfinite(y) || !std::isfinite(f)) throw DomainError("pinball_loss: non-finite input");
  return y >= f ? tau * (y - f) : (1.0 - tau) * (f - y);
}

// Mean pinball loss over the seven hub quantiles.
inline double mean_pbl(double y, std::span<const QuantilePoint> forecasts) {
  if (forecasts.size() != kHubQuantiles.size()) {
    throw DomainError("mean_pbl: expected " + std::to_string(kHubQuantiles.size()) +
                      " quantiles, got " + std::to_string(forecasts.size()));
  }
  std::array<bool, kHubQuantiles.size()> seen{};
  double sum = 0.0;
  for (const auto& p : forecasts) {
    auto it = std::find_if(kHubQuantiles.begin(), kHubQuantiles.end(),
                           [&](double q) { return std::abs(q - p.quantile) < 1e-9; });
    if (it == kHubQuantiles.end()) {
      throw DomainError("mean_pbl: quantile " + std::to_string(p.quantile) + " not in the hub set");
    }
    auto idx = static_cast<std::size_t>(it - kHubQuantiles.begin());
    if (seen[idx]) throw DomainError("mean_pbl: duplicate quantile");
    seen[idx] = true;
    sum += pinball_loss(y, p.value, p.quantile);
  }
  return sum / static_cast<double>(forecasts.size());
}

inline double normalize(double mean_pbl_value, double population, double scale_factor = 1.0) {
  if (!(population > 0.0)) throw DomainError("normalize: population must be positive");
  if (!(scale_factor > 0.0)) throw DomainError("normalize: scale_factor must be positive");
  return mean_pbl_value * scale_factor / population;
}

struct TrimReport {
  std::size_t n_in = 0;
  std::size_t removed = 0;
  double trim_frac = 0.0;
  // Smallest removed value; NaN when nothing was removed.
  double threshold = std::numeric_limits<double>::quiet_NaN();
};

struct TrimResult {
  std::vector<double> sqrt_values;
  std::vector<std::size_t> kept;  // input indices of survivors, in input order
  TrimReport report;
};

// Drops the floor(n * trim_frac) largest values (earlier inputs go first among
// ties) and square-roots the survivors.
inline TrimResult trim_and_transform(std::span<const double> values, double trim_frac) {
  if (values.empty()) throw DomainError("trim_and_transform: empty input");
  if (!(trim_frac >= 0.0 && trim_frac < 0.5)) {
    throw DomainError("trim_and_transform: trim_frac must lie in [0, 0.5)");
  }
  const std::size_t n = values.size();
  const auto n_remove = static_cast<std::size_t>(std::floor(static_cast<double>(n) * trim_frac));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<bool> removed(n, false);
  TrimResult out;
  out.report = {n, n_remove, trim_frac, std::numeric_limits<double>::quiet_NaN()};
  for (std::size_t i = 0; i < n_remove; ++i) removed[order[i]] = true;
  if (n_remove > 0) out.report.threshold = values[order[n_remove - 1]];

  out.sqrt_values.reserve(n - n_remove);
  out.kept.reserve(n - n_remove);
  for (std::size_t i = 0; i < n; ++i) {
    if (removed[i]) continue;
    if (values[i] < 0.0) throw DomainError("trim_and_transform: negative value");
    out.sqrt_values.push_back(std::sqrt(values[i]));
    out.kept.push_back(i);
  }
  return out;
}

struct PblObservation {
  std::string team_id;
  std::string fips;
  Date week_end;
  int lookahead_days = 0;
  int phase = 0;
  double pbl_norm = 0.0;
  double sqrt_pbl = 0.0;
  std::shared_ptr<const CountyCovariates> covariates;
  std::shared_ptr<const TeamMetadata> metadata;
};

inline std::vector<PblObservation> score_panel(const Panel& panel, double scale_factor = 1.0) {
  std::vector<PblObservation> out;
  out.reserve(panel.rows.size());
  for (const auto& row : panel.rows) {
    const double m = mean_pbl(static_cast<double>(row.truth), row.group.quantiles);
    const double norm =
        normalize(m, static_cast<double>(row.covariates->population), scale_factor);
    out.push_back(PblObservation{row.group.team_id, row.group.fips, row.group.target_end_date,
                                 row.group.lookahead_days, row.phase, norm, std::sqrt(norm),
                                 row.covariates, row.metadata});
  }
  return out;
}

struct TrimmedObservations {
  std::vector<PblObservation> observations;
  TrimReport report;
};

inline TrimmedObservations trim_observations(const std::vector<PblObservation>& obs,
                                             double trim_frac) {
  std::vector<double> values;
  values.reserve(obs.size());
  for (const auto& o : obs) values.push_back(o.pbl_norm);
  auto trimmed = trim_and_transform(values, trim_frac);
  TrimmedObservations out;
  out.report = trimmed.report;
  out.observations.reserve(trimmed.kept.size());
  for (std::size_t k = 0; k < trimmed.kept.size(); ++k) {
    auto o = obs[trimmed.kept[k]];
    o.sqrt_pbl = trimmed.sqrt_values[k];
    out.observations.push_back(std::move(o));
  }
  return out;
}

inline void write_scored_panel(std::ostream& out, const std::vector<PblObservation>& obs) {
  out << "team_id,fips,week_end,lookahead,phase,pbl_norm,sqrt_pbl\n";
  for (const auto& o : obs) {
    out << o.team_id << ',' << o.fips << ',' << format_date(o.week_end) << ','
        << o.lookahead_days << ',' << o.phase << ',' << text::format_double(o.pbl_norm) << ','
        << text::format_double(o.sqrt_pbl) << '\n';
  }
}

// Reads a scored panel back and re-attaches county covariates and team
// metadata. Every row must resolve.
inline std::vector<PblObservation> read_scored_panel(std::istream& in,
                                                     const CovariateMap& covariates,
                                                     const MetadataMap& metadata,
                                                     const std::string& source = "panel") {
  text::CsvReader csv(in, source);
  std::vector<PblObservation> out;
  if (csv.empty_file()) return out;
  const auto c_team = csv.column("team_id");
  const auto c_fips = csv.column("fips");
  const auto c_week = csv.column("week_end");
  const auto c_look = csv.column("lookahead");
  const auto c_phase = csv.column("phase");
  const auto c_pbl = csv.column("pbl_norm");
  const auto c_sqrt = csv.column("sqrt_pbl");
  std::vector<std::string> f;
  while (csv.next(f)) {
    const auto where = source + ":" + std::to_string(csv.line_number());
    if (f.size() != csv.width()) throw InputError(where + ": wrong field count");
    auto week = parse_date(f[c_week]);
    auto look = text::parse_int(f[c_look]);
    auto phase = text::parse_int(f[c_phase]);
    auto pbl = text::parse_double(f[c_pbl]);
    auto sq = text::parse_double(f[c_sqrt]);
    if (!week || !look || !phase || !pbl || !sq) throw InputError(where + ": malformed row");
    auto cov = covariates.find(f[c_fips]);
    if (cov == covariates.end()) throw InputError(where + ": no covariates for fips " + f[c_fips]);
    auto meta = metadata.find(f[c_team]);
    if (meta == metadata.end()) throw InputError(where + ": no metadata for team " + f[c_team]);
    out.push_back(PblObservation{f[c_team], f[c_fips], *week, static_cast<int>(*look),
                                 static_cast<int>(*phase), *pbl, *sq, cov->second, meta->second});
  }
  return out;
}

}  // namespace hubfair
