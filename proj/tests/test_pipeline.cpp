#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "actgen/pipeline.hpp"

using namespace actgen;
namespace fs = std::filesystem;

namespace {

nlohmann::json tiny_config() {
  return nlohmann::json::parse(R"({
    "seed": 3,
    "primary_thresholds": {"maintenance_min": 30, "discretionary_min": 30},
    "synth": {"n_persons": 400, "corruption_rate": 0.05},
    "dl": {"hidden_layers": 1, "epochs": 2, "batch_size": 64},
    "rf": {"n_estimators": 5, "min_samples_leaf": 5},
    "primary_type_variants": ["RF", "RF&Emb"],
    "generation": {"variant": "RF", "types": "sample", "residual_noise": true}
  })");
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("actgen_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ACTGEN_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, MissingThresholdsNamesTheKey) {
  auto j = tiny_config();
  j.erase("primary_thresholds");
  try {
    parse_config(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    EXPECT_NE(std::string(e.what()).find("primary_thresholds"), std::string::npos);
  }
}

TEST(Config, BadValuesAreConfigErrors) {
  auto j = tiny_config();
  j["generation"]["types"] = "maybe";
  EXPECT_THROW(parse_config(j), Error);
  j = tiny_config();
  j["synth"]["worker_share"] = 0.9;
  EXPECT_THROW(parse_config(j), Error);
}

TEST(Config, SeedOverrideAndHash) {
  const auto a = parse_config(tiny_config());
  const auto b = parse_config(tiny_config());
  const auto c = parse_config(tiny_config(), 4);
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(c.seed, 4u);
  EXPECT_NE(a.synth.seed, c.synth.seed);
}

TEST(Pipeline, EvaluateBeforeTrainCitesManifest) {
  const auto out = scratch("untrained");
  Pipeline p(parse_config(tiny_config()), out);
  try {
    p.evaluate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelMissing);
    EXPECT_NE(std::string(e.what()).find("manifest"), std::string::npos);
  }
  fs::remove_all(out);
}

TEST(Pipeline, EndToEndArtifactsAreStampedAndRepeatable) {
  const auto out = scratch("e2e");
  const auto cfg = parse_config(tiny_config());
  Pipeline p(cfg, out);
  p.run_all();
  for (const char* f : {"config.json", "data/persons.csv", "data/trips.csv", "data/ground_truth.jsonl",
                        "data/schedules.jsonl", "data/patterns.jsonl", "data/build_stats.json", "models/manifest.json",
                        "generated/generated_patterns.jsonl", "generated/generation_report.json",
                        "reports/report.csv", "reports/report.json", "reports/importance.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_TRUE(fs::exists(out / "models" / "worker" / "primary_type" / "manifest.json"));

  for (const char* f : {"data/build_stats.json", "models/manifest.json", "generated/generation_report.json"}) {
    const auto j = nlohmann::json::parse(read_text_file(out / f));
    EXPECT_EQ(j.at("stamp").at("config_hash"), config_hash(cfg)) << f;
    EXPECT_EQ(j.at("stamp").at("seed"), cfg.seed) << f;
  }
  const auto report = nlohmann::json::parse(read_text_file(out / "generated/generation_report.json"));
  EXPECT_EQ(report.at("report").at("invalid_patterns"), 0);

  const std::string generated = read_text_file(out / "generated/generated_patterns.jsonl");
  const std::string evaluated = read_text_file(out / "reports/report.json");
  Pipeline again(cfg, out);
  again.generate();
  again.evaluate();
  EXPECT_EQ(read_text_file(out / "generated/generated_patterns.jsonl"), generated);
  EXPECT_EQ(read_text_file(out / "reports/report.json"), evaluated);
  fs::remove_all(out);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  write_text_file(dir / "good.json", tiny_config().dump());
  auto bad = tiny_config();
  bad.erase("primary_thresholds");
  write_text_file(dir / "bad.json", bad.dump());
  const std::string out = " --out " + (dir / "run").string();

  EXPECT_EQ(cli("synth --config " + (dir / "bad.json").string() + out), 2);
  EXPECT_EQ(cli("synth --config " + (dir / "missing.json").string() + out), 2);
  EXPECT_EQ(cli("synth" + out), 2);
  EXPECT_EQ(cli("teleport --config " + (dir / "good.json").string() + out), 2);
  EXPECT_EQ(cli("evaluate --config " + (dir / "good.json").string() + out), 4);
  EXPECT_EQ(cli("synth --config " + (dir / "good.json").string() + out + " --seed 5"), 0);
  EXPECT_TRUE(fs::exists(dir / "run" / "data" / "persons.csv"));
  fs::remove_all(dir);
}
