#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "hubfair/ingest.hpp"

using namespace hubfair;

namespace {

const char* kHeader = "forecast_date,target,target_end_date,location,type,quantile,value\n";

std::string full_group(const std::string& fips, const std::string& fdate, const std::string& target,
                       const std::string& tend, double base) {
  std::string out;
  for (std::size_t i = 0; i < kHubQuantiles.size(); ++i) {
    out += fdate + "," + target + "," + tend + "," + fips + ",quantile," +
           text::format_double(kHubQuantiles[i]) + "," + text::format_double(base + 10.0 * i) + "\n";
  }
  return out;
}

ForecastParseResult parse(const std::string& body, ForecastParseOptions opts = {}) {
  std::istringstream in(body);
  return parse_forecasts(in, "team", opts);
}

}  // namespace

TEST(ParseForecasts, HubRowBecomesQuantileForecast) {
  std::string body = kHeader;
  body += "2020-07-06, 1 wk ahead inc case, 2020-07-11, 24031, quantile, 0.500, 120\n";
  for (double q : kHubQuantiles)
    if (q != 0.5)
      body += "2020-07-06,1 wk ahead inc case,2020-07-11,24031,quantile," + text::format_double(q) +
              "," + (q < 0.5 ? "100" : "140") + "\n";
  const auto r = parse(body);
  ASSERT_EQ(r.forecasts.size(), 7u);
  EXPECT_TRUE(r.errors.empty());
  const auto& median = r.forecasts[3];
  EXPECT_EQ(median.lookahead_days, 7);
  EXPECT_EQ(median.fips, "24031");
  EXPECT_DOUBLE_EQ(median.quantile, 0.5);
  EXPECT_DOUBLE_EQ(median.value, 120.0);
  EXPECT_EQ(median.target_end_date, make_date(2020, 7, 11));
  EXPECT_EQ(median.team_id, "team");
}

TEST(ParseForecasts, EmptyFileIsEmptyResult) {
  const auto r = parse("");
  EXPECT_TRUE(r.forecasts.empty());
  EXPECT_TRUE(r.errors.empty());
}

TEST(ParseForecasts, IncompleteGroupIsExcluded) {
  auto group = full_group("24031", "2020-07-06", "1 wk ahead inc case", "2020-07-11", 100);
  group.erase(group.rfind("2020-07-06"));  // drop the 0.975 row
  const auto r = parse(kHeader + group);
  EXPECT_TRUE(r.forecasts.empty());
  EXPECT_EQ(r.groups_incomplete, 1u);
  EXPECT_EQ(r.groups_retained(), 0u);
}

TEST(ParseForecasts, FiltersNonCountyPointAndOtherTargets) {
  std::string body = kHeader;
  body += full_group("24031", "2020-07-06", "2 wk ahead inc case", "2020-07-18", 5);
  body += "2020-07-06,1 wk ahead inc case,2020-07-11,US,quantile,0.5,1\n";
  body += "2020-07-06,1 wk ahead inc case,2020-07-11,24,quantile,0.5,1\n";
  body += "2020-07-06,1 wk ahead inc case,2020-07-11,24031,point,NA,1\n";
  body += "2020-07-06,1 wk ahead inc death,2020-07-11,24031,quantile,0.5,1\n";
  body += "2020-07-06,1 wk ahead inc case,2020-07-11,24031,quantile,0.01,1\n";
  const auto r = parse(body);
  EXPECT_EQ(r.forecasts.size(), 7u);
  EXPECT_EQ(r.forecasts.front().lookahead_days, 14);
  EXPECT_EQ(r.non_county_rows, 2u);
  EXPECT_EQ(r.non_quantile_rows, 1u);
  EXPECT_EQ(r.other_target_rows, 1u);
  EXPECT_EQ(r.off_whitelist_rows, 1u);
}

TEST(ParseForecasts, MalformedRowsAreReportedWithLine) {
  std::string body = kHeader;
  body += "2020-07-06,1 wk ahead inc case,2020-07-11,24031,quantile,0.5\n";
  body += "2020-07-06,1 wk ahead inc case,2020-07-10,24031,quantile,0.5,1\n";  // Friday
  body += "2020-07-06,1 wk ahead inc case,2020-07-11,24031,quantile,0.5,-3\n";
  const auto r = parse(body);
  ASSERT_EQ(r.errors.size(), 3u);
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_EQ(r.errors[1].line, 3u);
  EXPECT_NE(r.errors[1].message.find("inconsistent"), std::string::npos);
}

TEST(ParseForecasts, CrossingQuantilesRepairedOrDropped) {
  std::string body = kHeader;
  const double vals[] = {5, 4, 6, 7, 8, 9, 10};
  for (std::size_t i = 0; i < 7; ++i)
    body += "2020-07-06,1 wk ahead inc case,2020-07-11,24031,quantile," +
            text::format_double(kHubQuantiles[i]) + "," + text::format_double(vals[i]) + "\n";
  const auto repaired = parse(body);
  ASSERT_EQ(repaired.forecasts.size(), 7u);
  EXPECT_EQ(repaired.groups_repaired, 1u);
  for (std::size_t i = 1; i < 7; ++i)
    EXPECT_LE(repaired.forecasts[i - 1].value, repaired.forecasts[i].value);

  ForecastParseOptions strict;
  strict.strict_monotone = true;
  const auto dropped = parse(body, strict);
  EXPECT_TRUE(dropped.forecasts.empty());
  EXPECT_EQ(dropped.groups_crossing_dropped, 1u);
}

TEST(ParseForecasts, DuplicateQuantileDropsGroup) {
  auto body = std::string(kHeader) + full_group("24031", "2020-07-06", "1 wk ahead inc case", "2020-07-11", 1);
  body += "2020-07-06,1 wk ahead inc case,2020-07-11,24031,quantile,0.5,3\n";
  const auto r = parse(body);
  EXPECT_EQ(r.groups_duplicate_quantile, 1u);
  EXPECT_TRUE(r.forecasts.empty());
}

TEST(ParseForecasts, RoundTripThroughWriter) {
  std::string body = kHeader;
  body += full_group("24031", "2020-07-06", "1 wk ahead inc case", "2020-07-11", 1.25);
  body += full_group("01001", "2020-07-06", "4 wk ahead inc case", "2020-08-01", 1e-3);
  const auto first = parse(body);
  std::ostringstream out;
  write_forecasts(out, first.forecasts);
  const auto second = parse(out.str());
  EXPECT_EQ(first.forecasts, second.forecasts);
}

TEST(ParseTruth, CumulativeSeriesIsDifferenced) {
  std::istringstream in(
      "date,location,value\n2020-07-11,24031,10\n2020-07-18,24031,15\n2020-07-25,24031,15\n");
  const auto r = parse_truth(in);
  ASSERT_EQ(r.truth.size(), 2u);
  EXPECT_EQ(r.truth[0].week_end, make_date(2020, 7, 18));
  EXPECT_EQ(r.truth[0].incident_cases, 5);
  EXPECT_EQ(r.truth[1].incident_cases, 0);
}

TEST(ParseTruth, CumulativeDecreaseIsClamped) {
  std::istringstream in("date,location,value\n2020-07-11,24031,10\n2020-07-18,24031,8\n");
  const auto r = parse_truth(in);
  ASSERT_EQ(r.truth.size(), 1u);
  EXPECT_EQ(r.truth[0].incident_cases, 0);
  EXPECT_EQ(r.clamped, 1u);
}

TEST(ParseTruth, DailyCumulativeMatchesWeeklySumOfDailyNew) {
  // Daily new cases for two full epi weeks; cumulative counts are their prefix sums.
  const long long daily[] = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7};
  std::string body = "date,location,value\n";
  long long cum = 0;
  Date d = make_date(2020, 7, 5);  // Sunday
  for (long long n : daily) {
    cum += n;
    body += format_date(d) + ",24031," + std::to_string(cum) + "\n";
    d += std::chrono::days{1};
  }
  std::istringstream in(body);
  const auto r = parse_truth(in);
  ASSERT_EQ(r.truth.size(), 1u);
  long long second_week = 0;
  for (int i = 7; i < 14; ++i) second_week += daily[i];
  EXPECT_EQ(r.truth[0].week_end, make_date(2020, 7, 18));
  EXPECT_EQ(r.truth[0].incident_cases, second_week);
}

TEST(ParseTruth, WeeklySchemaAndUnknownLocations) {
  std::istringstream in("week_end,location,incident\n2020-07-11,24031,7\n2020-07-11,99999,1\n2020-07-11,US,3\n");
  const std::set<std::string> known = {"24031"};
  const auto r = parse_truth(in, "truth", &known);
  ASSERT_EQ(r.truth.size(), 1u);
  EXPECT_EQ(r.truth[0].incident_cases, 7);
  EXPECT_EQ(r.skipped_unknown, 2u);
  EXPECT_EQ(r.warnings.size(), 2u);
}

TEST(Covariates, UrbanicityCodes) {
  EXPECT_EQ(urbanicity_from_code(2), UrbanicityGroup::LM);
  EXPECT_EQ(urbanicity_from_code(5), UrbanicityGroup::MC);
  EXPECT_EQ(urbanicity_from_code(3), UrbanicityGroup::SMM);
  EXPECT_THROW(urbanicity_from_code(7), DomainError);
}

namespace {
const char* kDemo =
    "fips,population,pct_white,pct_black,pct_hispanic,pct_asian,pct_age65,state\n"
    "24031,1050000,43.1,18.9,20.1,15.6,15.2,MD\n"
    "01001,55000,74.0,19.0,3.0,1.0,15.0,AL\n";
const char* kUrban = "fips,code\n24031,2\n01001,3\n";
const char* kHealthHeader = "fips,BPHIGH,CANCER,DIABETES,OBESITY,STROKE,COPD,KIDNEY,CASTHMA,CHD\n";
}  // namespace

TEST(Covariates, CountyMissingFromHealthIsExcluded) {
  std::istringstream demo(kDemo), urban(kUrban);
  std::istringstream health(std::string(kHealthHeader) + "24031,30,7,9,28,3,5,3,9,5\n");
  const auto r = parse_covariates(demo, urban, health);
  EXPECT_EQ(r.counties.size(), 1u);
  EXPECT_EQ(r.excluded, 1u);
  const auto& c = *r.counties.at("24031");
  EXPECT_EQ(c.urbanicity(), UrbanicityGroup::LM);
  EXPECT_DOUBLE_EQ(c.health_outcome(HealthOutcome::OBESITY), 28.0);
  EXPECT_EQ(c.state, "MD");
}

TEST(Covariates, PercentOutsideRangeIsHardError) {
  std::istringstream demo(
      "fips,population,pct_white,pct_black,pct_hispanic,pct_asian,pct_age65,state\n"
      "24031,100,101,0,0,0,15,MD\n");
  std::istringstream urban(kUrban), health(kHealthHeader);
  try {
    parse_covariates(demo, urban, health);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("24031"), std::string::npos);
  }
}

TEST(Metadata, ParsesAndRejectsUnknownValues) {
  std::istringstream ok("team_id,model_type,mobility\nA,Compartmental,Yes\nB,Deep Learning,No\n");
  const auto m = parse_metadata(ok);
  EXPECT_EQ(m.at("B")->model_type, ModelType::DeepLearning);
  EXPECT_EQ(m.at("A")->mobility, Mobility::Yes);
  std::istringstream bad("team_id,model_type,mobility\nA,Agent,Yes\n");
  EXPECT_THROW(parse_metadata(bad), InputError);
}

namespace {

std::vector<QuantileForecast> toy_forecasts(const std::vector<std::string>& teams,
                                            const std::vector<std::string>& fips,
                                            const std::vector<Date>& weeks) {
  std::vector<QuantileForecast> out;
  for (const auto& t : teams)
    for (const auto& f : fips)
      for (auto w : weeks)
        for (double q : kHubQuantiles)
          out.push_back({t, w - std::chrono::days{5}, 7, w, f, q, 100.0 * q});
  return out;
}

}  // namespace

TEST(JoinPanel, FullyMatchedToyFixtureHasTwelveRows) {
  const std::vector<std::string> fips = {"01001", "01003", "01005"};
  const std::vector<Date> weeks = {make_date(2020, 7, 11), make_date(2020, 7, 18)};
  CovariateMap cov;
  std::vector<GroundTruth> truth;
  for (const auto& f : fips) {
    cov[f] = fixture::county(f, 80, 10, 5, 5);
    for (auto w : weeks) truth.push_back({f, w, 10});
  }
  MetadataMap meta = {{"A", fixture::team("A")}, {"B", fixture::team("B")}};
  const auto panel = join_panel(toy_forecasts({"A", "B"}, fips, weeks), truth, cov, meta,
                                PhaseConfig::standard());
  EXPECT_EQ(panel.rows.size(), 12u);
  EXPECT_EQ(panel.report.input_groups, 12u);
  for (const auto& row : panel.rows) {
    EXPECT_EQ(row.phase, 0);
    ASSERT_EQ(row.group.quantiles.size(), 7u);
    for (std::size_t i = 1; i < 7; ++i) {
      EXPECT_LT(row.group.quantiles[i - 1].quantile, row.group.quantiles[i].quantile);
      EXPECT_LE(row.group.quantiles[i - 1].value, row.group.quantiles[i].value);
    }
  }
}

TEST(JoinPanel, DropCausesAreCountedAndConserved) {
  const std::vector<Date> weeks = {make_date(2020, 7, 11), make_date(2020, 5, 30)};
  CovariateMap cov = {{"01001", fixture::county("01001", 80, 10, 5, 5)}};
  std::vector<GroundTruth> truth = {{"01001", weeks[0], 1}, {"01001", weeks[1], 1},
                                    {"01003", weeks[0], 1}};
  MetadataMap meta = {{"A", fixture::team("A")}};
  auto forecasts = toy_forecasts({"A", "Z"}, {"01001", "01003", "01005"}, weeks);
  const auto panel = join_panel(forecasts, truth, cov, meta, PhaseConfig::standard());
  const auto& d = panel.report.dropped;
  EXPECT_EQ(panel.rows.size(), 1u);
  EXPECT_EQ(d.at("missing_truth"), 6u);       // 01005 always, 01003 on 2020-05-30
  EXPECT_EQ(d.at("missing_covariates"), 2u);  // 01003 on 2020-07-11
  EXPECT_EQ(d.at("missing_metadata"), 2u);    // team Z at 01001
  EXPECT_EQ(d.at("outside_phase_span"), 1u);  // team A at 01001 on 2020-05-30
  EXPECT_EQ(panel.report.retained + panel.report.total_dropped(), panel.report.input_groups);
}
