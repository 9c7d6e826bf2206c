// hubfair: score hub forecasts, fit the disparity GLMs and build the audit
// bundle for the dashboard.

#include <CLI11.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hubfair/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hubfair;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<double> trim;
  std::optional<std::string> specs;
  std::optional<std::string> group;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.out) c.out = *o.out;
  if (o.threads) {
    if (*o.threads < 1) throw InputError("--threads must be at least 1");
    c.threads = *o.threads;
  }
  if (o.trim) {
    if (!(*o.trim >= 0.0 && *o.trim < 0.5)) throw InputError("--trim must lie in [0, 0.5)");
    c.trim_frac = *o.trim;
  }
  if (o.specs) {
    c.specs.clear();
    for (const auto& s : text::split_csv(*o.specs)) {
      const auto t = std::string(text::trim(s));
      if (!t.empty()) c.specs.push_back(t);
    }
    validate_specs(c.specs);
  }
  if (o.group) c.group = parse_group(*o.group);
  if (o.seed) {
    c.seed = *o.seed;
    c.synth.seed = *o.seed;
  }
  Eigen::setNbThreads(c.threads);
  return c;
}

void write_json(const fs::path& p, const Json& j) {
  auto out = open_output(p);
  out << j.dump(2) << '\n';
}

// Generates the synthetic fixture under `dir` together with run.json, a config
// that points at it.
void run_synth(const RunConfig& c, const fs::path& dir) {
  const auto data = generate(c.synth);
  write_synth_files(data, dir / "data");
  RunConfig run = c;
  Json j = to_json(run);
  j["inputs"] = {{"forecasts_dir", "data/forecasts"},     {"truth", "data/truth.csv"},
                 {"demographics", "data/demographics.csv"}, {"urbanization", "data/urbanization.csv"},
                 {"health", "data/health.csv"},           {"metadata", "data/metadata.csv"}};
  j["out"] = "results";
  write_json(dir / "run.json", j);
  std::cerr << "synth: " << data.counties.size() << " counties, " << data.teams.size() << " teams, "
            << data.forecasts.size() << " quantile rows, " << data.n_outliers << " planted outliers -> "
            << (dir / "run.json").string() << '\n';
}

void report(const char* kind, const std::string& message) {
  std::cerr << "error: " << Json{{"kind", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness audit of epidemic forecast hub models"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "Run configuration (JSON)");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--threads", o.threads, "Worker cap");
  app.add_option("--trim", o.trim, "Fraction of largest PBL values to trim");
  app.add_option("--specs", o.specs, "Comma-separated model specs, e.g. GLM-1,GLM-2a");
  app.add_option("--group", o.group, "Bundle grouping: race or urbanicity");
  app.add_option("--seed", o.seed, "Random seed");
  app.fallthrough();

  auto* score = app.add_subcommand("score", "Parse inputs and write the scored panel");
  auto* fit = app.add_subcommand("fit", "Fit the requested GLM specs on the scored panel");
  auto* bundle = app.add_subcommand("bundle", "Build the audit bundle JSON");
  auto* run = app.add_subcommand("run", "score, fit and bundle in sequence");
  auto* synth = app.add_subcommand("synth", "Write a synthetic fixture and a run config for it");
  auto* serve = app.add_subcommand("serve-export", "Copy the bundle next to the dashboard assets");
  std::string dest;
  std::optional<std::string> bundle_path;
  serve->add_option("--dest", dest, "Dashboard asset directory")->required();
  serve->add_option("--bundle", bundle_path, "Bundle file (default <out>/bundle.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto c = resolve(o);
    if (score->parsed()) {
      cmd_score(c, std::cerr);
    } else if (fit->parsed()) {
      const auto r = cmd_fit(c, std::cerr);
      if (r.failures() > 0) return 1;
    } else if (bundle->parsed()) {
      cmd_bundle(c, std::cerr);
    } else if (run->parsed()) {
      cmd_score(c, std::cerr);
      const auto r = cmd_fit(c, std::cerr);
      cmd_bundle(c, std::cerr);
      if (r.failures() > 0) return 1;
    } else if (synth->parsed()) {
      run_synth(c, c.out);
    } else if (serve->parsed()) {
      const fs::path src = bundle_path ? fs::path(*bundle_path) : c.out / "bundle.json";
      if (!fs::exists(src)) throw InputError("bundle not found: " + src.string());
      fs::create_directories(dest);
      fs::copy_file(src, fs::path(dest) / "bundle.json", fs::copy_options::overwrite_existing);
      std::cerr << "exported " << src.string() << " -> " << (fs::path(dest) / "bundle.json").string() << '\n';
    }
  } catch (const InputError& e) {
    report("input", e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    report("input", e.what());
    return 2;
  } catch (const std::exception& e) {
    report("analysis", e.what());
    return 1;
  }
  return 0;
}
