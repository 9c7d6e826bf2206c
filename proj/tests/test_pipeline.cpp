#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hubfair/pipeline.hpp"

using namespace hubfair;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Result cli(const std::string& args, const fs::path& errfile) {
  const std::string cmd = std::string("\"") + HUBFAIR_CLI + "\" " + args + " 2> \"" + errfile.string() + "\"";
  const int raw = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = slurp(errfile);
  return r;
}

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hubfair_pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // A small synthetic fixture with its run.json under dir_/name.
  fs::path make_fixture(const std::string& name, const Json& synth_overrides = Json::object(),
                        const std::string& specs = "GLM-1,GLM-2,GLM-1a") {
    Json cfg = {{"seed", 3},
                {"specs", Json::array()},
                {"synth",
                 {{"n_counties", 60},
                  {"n_weeks", 16},
                  {"planted", {{"pct_hispanic", 1.02}, {"urb_MC", 1.065}}},
                  {"minority_plurality_frac", 0.2}}}};
    for (const auto& [k, v] : synth_overrides.items()) cfg["synth"][k] = v;
    for (const auto& s : text::split_csv(specs)) cfg["specs"].push_back(s);
    const auto path = dir_ / (name + ".json");
    std::ofstream(path) << cfg.dump(2);
    const auto r = cli("--config \"" + path.string() + "\" --out \"" + (dir_ / name).string() + "\" synth",
                       dir_ / "synth.err");
    EXPECT_EQ(r.code, 0) << r.err;
    return dir_ / name / "run.json";
  }

  Result run(const fs::path& config, const std::string& extra = "", const std::string& sub = "run") {
    return cli("--config \"" + config.string() + "\" " + extra + " " + sub, dir_ / "run.err");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Pipeline, EndToEndOutputs) {
  const auto cfg = make_fixture("a");
  const auto r = run(cfg);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = cfg.parent_path() / "results";
  for (const char* f : {"panel.csv", "phases.csv", "score_report.json", "fit_summary.json", "bundle.json",
                        "GLM-1.coefficients.csv", "GLM-2.coefficients.csv", "GLM-1a.coefficients.csv",
                        "GLM-1a.relative_effects.csv", "GLM-1.gvif.csv", "GLM-1.diagnostics.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  // Conservation: every forecast group is either retained or dropped for a reason.
  const auto report = Json::parse(slurp(out / "score_report.json"));
  std::size_t dropped = 0;
  for (const auto& [k, v] : report["dropped"].items()) dropped += v.get<std::size_t>();
  EXPECT_EQ(report["groups"].get<std::size_t>(), report["retained"].get<std::size_t>() + dropped);
  EXPECT_EQ(report["groups"].get<std::size_t>(), 60u * 16u * 4u * 2u);

  // Three race terms times four lookahead levels.
  std::ifstream eff(out / "GLM-1a.relative_effects.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(eff, line);
  EXPECT_EQ(line, "model,sensitive_term,characteristic,level,exp_combined,pct_diff,se,z,p,ci_lo,ci_hi,significant");
  while (std::getline(eff, line)) ++rows;
  EXPECT_EQ(rows, 12u);

  const auto bundle = Json::parse(slurp(out / "bundle.json"));
  EXPECT_TRUE(validate_bundle_schema(bundle).empty());
  EXPECT_TRUE(audit_bundle(bundle).empty());
  EXPECT_EQ(bundle["teams"].size(), 2u);
  EXPECT_EQ(bundle["relative_effects"].size(), 12u);
  EXPECT_EQ(bundle["run"]["trimmed"]["removed"].get<std::size_t>(),
            report["trim"]["removed"].get<std::size_t>());
}

TEST_F(Pipeline, DeterministicAcrossRuns) {
  const auto cfg = make_fixture("a");
  ASSERT_EQ(run(cfg, "--out \"" + (dir_ / "r1").string() + "\"").code, 0);
  ASSERT_EQ(run(cfg, "--out \"" + (dir_ / "r2").string() + "\"").code, 0);
  for (const char* f : {"panel.csv", "GLM-1.coefficients.csv", "GLM-2.coefficients.csv",
                        "GLM-1a.relative_effects.csv", "bundle.json"})
    EXPECT_EQ(text::fnv1a(slurp(dir_ / "r1" / f)), text::fnv1a(slurp(dir_ / "r2" / f))) << f;
  const auto a = Json::parse(slurp(dir_ / "r1" / "bundle.json"));
  EXPECT_EQ(a["run"]["config_hash"], Json::parse(slurp(dir_ / "r2" / "bundle.json"))["run"]["config_hash"]);
  EXPECT_EQ(a["run"]["config_hash"].get<std::string>(), config_hash(load_run_config(cfg)));
}

TEST_F(Pipeline, SpecSelection) {
  const auto cfg = make_fixture("a");
  ASSERT_EQ(run(cfg, "--specs GLM-1").code, 0);
  std::size_t tables = 0;
  for (const auto& e : fs::directory_iterator(cfg.parent_path() / "results"))
    tables += e.path().filename().string().ends_with(".coefficients.csv");
  EXPECT_EQ(tables, 1u);
  EXPECT_EQ(run(cfg, "--specs GLM-7").code, 2);
}

TEST_F(Pipeline, MissingInputNamesThePath) {
  const auto cfg = make_fixture("a");
  fs::remove(cfg.parent_path() / "data" / "health.csv");
  const auto r = run(cfg);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("health.csv"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("\"kind\":\"input\""), std::string::npos) << r.err;
}

TEST_F(Pipeline, ProtectedCollinearityFails) {
  // Team metadata makes model_type_Statistical and mobility_Yes the same column.
  const Json teams = Json::array({{{"team_id", "A"}, {"model_type", "Compartmental"}, {"mobility", "No"}},
                                  {{"team_id", "B"}, {"model_type", "Statistical"}, {"mobility", "Yes"}}});
  const auto cfg = make_fixture("c", {{"teams", teams}}, "GLM-1");
  const auto r = run(cfg);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("mobility_Yes"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("\"kind\":\"analysis\""), std::string::npos) << r.err;
}

TEST_F(Pipeline, UrbanicityGrouping) {
  const auto cfg = make_fixture("a");
  ASSERT_EQ(run(cfg, "--specs GLM-2 --group urbanicity").code, 0);
  const auto bundle = Json::parse(slurp(cfg.parent_path() / "results" / "bundle.json"));
  EXPECT_EQ(bundle["run"]["protected_groups"], Json({"SMM", "MC"}));
  for (const auto& c : bundle["teams"][0]["cells"]) EXPECT_TRUE(c["group"] == "SMM" || c["group"] == "MC");
  EXPECT_TRUE(audit_bundle(bundle).empty());
}

TEST_F(Pipeline, StagesMatchRun) {
  const auto cfg = make_fixture("a");
  ASSERT_EQ(run(cfg, "--out \"" + (dir_ / "whole").string() + "\"").code, 0);
  const std::string staged = "--out \"" + (dir_ / "staged").string() + "\"";
  ASSERT_EQ(run(cfg, staged, "score").code, 0);
  ASSERT_EQ(run(cfg, staged, "fit").code, 0);
  ASSERT_EQ(run(cfg, staged, "bundle").code, 0);
  EXPECT_EQ(slurp(dir_ / "whole" / "bundle.json"), slurp(dir_ / "staged" / "bundle.json"));
  ASSERT_EQ(run(cfg, staged, "serve-export --dest \"" + (dir_ / "dash").string() + "\"").code, 0);
  EXPECT_EQ(slurp(dir_ / "dash" / "bundle.json"), slurp(dir_ / "staged" / "bundle.json"));
}

TEST(Config, HashIgnoresOutAndThreads) {
  RunConfig a, b;
  b.out = "/elsewhere";
  b.threads = 8;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.trim_frac = 0.02;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_THROW(parse_run_config(Json{{"trim", 0.1}}, "."), InputError);
  EXPECT_THROW(parse_run_config(Json{{"synth", {{"n_countys", 10}}}}, "."), InputError);
  EXPECT_THROW(parse_run_config(Json{{"specs", {"GLM-9"}}}, "."), InputError);
}

TEST(Config, SampleConfigsLoad) {
  for (const char* f : {"synth.json", "hub.json"}) {
    const auto c = load_run_config(fs::path(HUBFAIR_CONFIGS) / f);
    EXPECT_FALSE(c.specs.empty()) << f;
  }
}
