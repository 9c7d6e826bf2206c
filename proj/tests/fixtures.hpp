#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hubfair/hubfair.hpp"

namespace fixture {

inline std::shared_ptr<const hubfair::CountyCovariates> county(
    const std::string& fips, double white, double black, double hispanic, double asian,
    int urban_code = 1, const std::string& state = "AL", long long population = 100000) {
  hubfair::CountyCovariates c;
  c.fips = fips;
  c.population = population;
  c.pct_white = white;
  c.pct_black = black;
  c.pct_hispanic = hispanic;
  c.pct_asian = asian;
  c.pct_age65 = 15.0;
  c.health.fill(10.0);
  c.state = state;
  c.urbanization_code = urban_code;
  return std::make_shared<const hubfair::CountyCovariates>(std::move(c));
}

inline std::shared_ptr<const hubfair::TeamMetadata> team(
    const std::string& id, hubfair::ModelType t = hubfair::ModelType::Compartmental,
    hubfair::Mobility m = hubfair::Mobility::No) {
  return std::make_shared<const hubfair::TeamMetadata>(hubfair::TeamMetadata{id, t, m});
}

inline hubfair::PblObservation obs(std::shared_ptr<const hubfair::CountyCovariates> c,
                                   std::shared_ptr<const hubfair::TeamMetadata> t, int lookahead,
                                   int phase, double pbl) {
  hubfair::PblObservation o;
  o.team_id = t->team_id;
  o.fips = c->fips;
  o.week_end = hubfair::make_date(2020, 7, 11);
  o.lookahead_days = lookahead;
  o.phase = phase;
  o.pbl_norm = pbl;
  o.sqrt_pbl = std::sqrt(pbl);
  o.covariates = std::move(c);
  o.metadata = std::move(t);
  return o;
}

// A varied panel: counties spread over three states and all urbanicity codes,
// three teams with different metadata, four lookaheads, three phases.
inline std::vector<hubfair::PblObservation> toy_panel(std::uint64_t seed, int n_counties = 40) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const char* states[] = {"AL", "GA", "OH"};
  std::vector<std::shared_ptr<const hubfair::CountyCovariates>> counties;
  for (int i = 0; i < n_counties; ++i) {
    hubfair::CountyCovariates c;
    c.fips = std::to_string(10000 + i);
    c.population = 20000 + static_cast<long long>(u(rng) * 200000);
    c.pct_black = 20 * u(rng);
    c.pct_hispanic = 20 * u(rng);
    c.pct_asian = 8 * u(rng);
    c.pct_white = 100 - c.pct_black - c.pct_hispanic - c.pct_asian;
    c.pct_age65 = 10 + 15 * u(rng);
    for (auto& h : c.health) h = 5 + 35 * u(rng);
    c.state = states[i % 3];
    c.urbanization_code = 1 + i % 6;
    counties.push_back(std::make_shared<const hubfair::CountyCovariates>(std::move(c)));
  }
  auto a = team("A", hubfair::ModelType::Compartmental, hubfair::Mobility::No);
  auto b = team("B", hubfair::ModelType::Statistical, hubfair::Mobility::Yes);
  auto c3 = team("C", hubfair::ModelType::Compartmental, hubfair::Mobility::Yes);
  std::vector<hubfair::PblObservation> out;
  for (const auto& c : counties)
    for (const auto& t : {a, b, c3})
      for (int la : {7, 14, 21, 28})
        for (int ph : {0, 1, 2}) out.push_back(obs(c, t, la, ph, 0.5 + 4 * u(rng)));
  return out;
}

}  // namespace fixture
