#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "hubfair/fairness.hpp"

using namespace hubfair;

namespace {

// Three White, two Black, two Hispanic counties; two lookaheads, two phases.
struct SmallPanel {
  std::vector<PblObservation> obs;
  std::vector<std::shared_ptr<const CountyCovariates>> counties;
};

SmallPanel small_panel(double protected_scale, std::uint64_t seed = 1) {
  SmallPanel p;
  p.counties = {fixture::county("01001", 80, 10, 5, 5), fixture::county("01003", 70, 20, 5, 5),
                fixture::county("01005", 60, 20, 15, 5), fixture::county("01007", 20, 60, 15, 5),
                fixture::county("01009", 30, 50, 15, 5), fixture::county("01011", 30, 10, 55, 5),
                fixture::county("01013", 20, 10, 65, 5)};
  auto t = fixture::team("T");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  // Protected counties reuse the first two White draws, scaled; the third
  // White county sits at their mean so both sides share it.
  for (int ph : {0, 1})
    for (int la : {7, 14}) {
      const double a = u(rng), b = u(rng);
      const std::array<double, 3> white = {a, b, 0.5 * (a + b)};
      for (std::size_t k = 0; k < 3; ++k) p.obs.push_back(fixture::obs(p.counties[k], t, la, ph, white[k]));
      for (std::size_t k = 3; k < 7; ++k)
        p.obs.push_back(fixture::obs(p.counties[k], t, la, ph, protected_scale * (k % 2 ? a : b)));
    }
  return p;
}

}  // namespace

TEST(PctDiff, PublishedMapping) {
  EXPECT_NEAR(pct_diff(1.246), 24.6, 1e-12);
  EXPECT_NEAR(pct_diff(0.8), -20.0, 1e-12);
  EXPECT_EQ(pct_diff(1.0), 0.0);
}

TEST(Plurality, Examples) {
  EXPECT_EQ(plurality_group(RaceShares{83.09, 2.14, 4.64, 0.70}), RaceGroup::White);
  EXPECT_EQ(plurality_group(RaceShares{10, 40, 30, 20}), RaceGroup::Black);
  EXPECT_EQ(plurality_group(RaceShares{10, 40, 40, 10}), RaceGroup::Black);
  EXPECT_EQ(plurality_group(RaceShares{30, 10, 30, 30}), RaceGroup::White);
  EXPECT_EQ(plurality_group(RaceShares{0, 0, 0, 5}), RaceGroup::Asian);
  EXPECT_THROW(plurality_group(RaceShares{}), DomainError);
}

TEST(Aer, Examples) {
  const std::vector<double> a = {1, 2, 3}, two = {2, 2}, one = {1, 1, 1}, none;
  EXPECT_EQ(aer(a, a), 1.0);
  EXPECT_EQ(aer(two, one), 2.0);
  EXPECT_THROW(aer(none, one), DomainError);
  EXPECT_THROW(aer(one, std::vector<double>{0, 0}), DomainError);
}

TEST(Aer, ScaleInvariance) {
  const std::vector<double> p = {0.3, 1.7, 2.2}, u = {0.9, 1.1};
  std::vector<double> p2, u2;
  for (double x : p) p2.push_back(3.7 * x);
  for (double x : u) u2.push_back(3.7 * x);
  EXPECT_NEAR(aer(p2, u2), aer(p, u), 1e-14);
}

TEST(Bundle, IdenticalErrorsGiveUnitAer) {
  auto panel = small_panel(1.0);
  for (auto& o : panel.obs) o.pbl_norm = 2.5;
  const auto b = build_bundle(panel.obs, {}, {});
  ASSERT_EQ(b.teams.size(), 1u);
  std::size_t present = 0;
  for (const auto& c : b.teams[0].cells) {
    if (c.group == "Asian") {
      EXPECT_FALSE(c.aer);
      continue;
    }
    ASSERT_TRUE(c.aer);
    EXPECT_EQ(*c.aer, 1.0);
    ++present;
  }
  EXPECT_EQ(present, 8u);
  for (const auto& card : b.teams[0].cards) {
    EXPECT_EQ(card.mean_difference.value, 0.0);
    EXPECT_EQ(card.protected_group == "Asian", false);
  }
  EXPECT_FALSE(b.teams[0].median_aer.at("Asian"));
}

TEST(Bundle, UniformScalingGivesThatRatio) {
  const auto panel = small_panel(1.5, 9);
  const auto b = build_bundle(panel.obs, {}, {});
  for (const auto& c : b.teams[0].cells)
    if (c.aer) EXPECT_NEAR(*c.aer, 1.5, 1e-9);
  EXPECT_NEAR(*b.teams[0].median_aer.at("Hispanic"), 1.5, 1e-9);
}

TEST(Bundle, CardsAndAudit) {
  const auto panel = small_panel(1.3, 4);
  const auto b = build_bundle(panel.obs, {}, {});
  // Views: all, 2 phases, 2 lookaheads, 4 cells; two protected groups present.
  EXPECT_EQ(b.teams[0].cards.size(), 2u * 9u);
  const auto& all = b.teams[0].cards.front();
  EXPECT_FALSE(all.phase);
  EXPECT_FALSE(all.lookahead);
  EXPECT_EQ(all.variables, "race: Black vs White");
  EXPECT_EQ(all.county_count, 5u);
  EXPECT_EQ(all.prediction_count, 4u * 5u);

  // Independent mean-difference check for the all-view card.
  std::vector<double> p, u;
  for (const auto& o : panel.obs) {
    const auto g = plurality_group(*o.covariates);
    if (g == RaceGroup::Black) p.push_back(o.pbl_norm);
    if (g == RaceGroup::White) u.push_back(o.pbl_norm);
  }
  auto var = [](const std::vector<double>& x) {
    const double m = stats::mean(x);
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
  };
  const double diff = stats::mean(p) - stats::mean(u);
  const double se = std::sqrt(var(p) / static_cast<double>(p.size()) + var(u) / static_cast<double>(u.size()));
  EXPECT_NEAR(all.mean_difference.value, diff, 1e-12);
  EXPECT_NEAR(all.mean_difference.lower, diff - 1.959963984540054 * se, 1e-12);
  EXPECT_NEAR(*all.aer_this_view, stats::mean(p) / stats::mean(u), 1e-12);

  const auto j = to_json(b);
  EXPECT_TRUE(validate_bundle_schema(j).empty());
  EXPECT_TRUE(audit_bundle(j).empty());

  auto tampered = j;
  tampered["teams"][0]["cards"][0]["aer_values"]["median"] = 9.0;
  EXPECT_FALSE(audit_bundle(tampered).empty());
  tampered.erase("relative_effects");
  EXPECT_FALSE(validate_bundle_schema(tampered).empty());
}

TEST(Bundle, UrbanicityGrouping) {
  std::vector<PblObservation> obs;
  auto t = fixture::team("T");
  int code = 1;
  for (const char* f : {"01001", "01003", "01005", "01007", "01009", "01011"}) {
    auto c = fixture::county(f, 80, 10, 5, 5, code++);
    for (int la : {7, 14}) obs.push_back(fixture::obs(c, t, la, 0, 1.0 + code));
  }
  BundleConfig cfg;
  cfg.grouping = GroupingAttribute::Urbanicity;
  const auto j = to_json(build_bundle(obs, {}, cfg));
  EXPECT_EQ(j["run"]["protected_groups"], Json({"SMM", "MC"}));
  EXPECT_EQ(j["run"]["unprotected_group"], "LM");
  EXPECT_TRUE(audit_bundle(j).empty());
}

TEST(Bundle, BootstrapIsSeededAndCoversValue) {
  const auto panel = small_panel(1.4, 2);
  BundleConfig cfg;
  cfg.bootstrap = true;
  cfg.bootstrap_reps = 200;
  cfg.seed = 17;
  const auto a = to_json(build_bundle(panel.obs, {}, cfg)).dump();
  const auto b = to_json(build_bundle(panel.obs, {}, cfg)).dump();
  EXPECT_EQ(a, b);
  const auto j = Json::parse(a);
  EXPECT_EQ(j["run"]["interval_method"], "bootstrap");
  EXPECT_TRUE(audit_bundle(j).empty());
}

TEST(Bundle, PublishedCardValuesSerializeExactly) {
  AuditBundle b;
  TeamAudit t;
  t.team_id = "IowaStateLW-STEM";
  NutritionalCard card;
  card.team_id = t.team_id;
  card.protected_group = "Hispanic";
  card.aer_min = 1.172;
  card.aer_max = 4.772;
  card.aer_median = 1.588;
  t.cards.push_back(card);
  b.teams.push_back(t);
  const auto text = to_json(b).dump();
  EXPECT_NE(text.find(R"("aer_values":{"median":1.588,"min":1.172,"max":4.772,)"), std::string::npos)
      << text;
  const auto back = Json::parse(text);
  EXPECT_EQ(back["teams"][0]["cards"][0]["aer_values"]["max"].get<double>(), 4.772);
}

TEST(RelativeEffects, KnownCoefficients) {
  const auto obs = fixture::toy_panel(41);
  const auto d = build_design(model_spec("GLM-1a"), obs);
  auto fit = fit_glm(d);
  const auto h = static_cast<Eigen::Index>(*d.column("pct_hispanic"));
  const auto k = static_cast<Eigen::Index>(*d.column("pct_hispanic:lookahead14"));
  fit.beta[h] = 0.1;
  fit.beta[k] = std::log(1.246) - 0.1;
  const auto effects = relative_effects(fit, d, Factor::Lookahead);
  ASSERT_EQ(effects.size(), 12u);
  const auto it = std::find_if(effects.begin(), effects.end(), [](const RelativeEffect& e) {
    return e.sensitive_term == "pct_hispanic" && e.level == "14";
  });
  ASSERT_NE(it, effects.end());
  EXPECT_NEAR(it->exp_combined, 1.246, 1e-14);
  EXPECT_NEAR(it->pct_diff, 24.6, 1e-12);
  const double var = fit.vcov(h, h) + fit.vcov(k, k) + 2 * fit.vcov(h, k);
  EXPECT_NEAR(it->se, std::sqrt(var), 1e-10);
  for (const auto& e : effects) {
    EXPECT_EQ(e.pct_diff > 0, e.exp_combined > 1);
    EXPECT_EQ(e.significant, e.p_value < 0.05);
  }
  const auto ref = std::find_if(effects.begin(), effects.end(), [](const RelativeEffect& e) {
    return e.sensitive_term == "pct_hispanic" && e.level == "7";
  });
  EXPECT_TRUE(ref->reference_level);
  EXPECT_NEAR(ref->estimate, 0.1, 1e-15);
}

TEST(RelativeEffects, MissingInteractionBlock) {
  const auto obs = fixture::toy_panel(42);
  const auto d = build_design(model_spec("GLM-2"), obs);
  const auto fit = fit_glm(d);
  try {
    relative_effects(fit, d, Factor::Phase);
    FAIL();
  } catch (const DesignError& e) {
    EXPECT_NE(std::string(e.what()).find("GLM-2b"), std::string::npos);
  }
}
