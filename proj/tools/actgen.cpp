#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "actgen/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Activity schedule generation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Configuration file (JSON)")->required();
  app.add_option("--seed", seed, "Global seed, overrides the config");
  app.add_option("--out", out_dir, "Output directory");

  const std::pair<const char*, const char*> commands[] = {
      {"synth", "Write a synthetic survey"},
      {"ingest", "Parse and clean the survey into schedules.jsonl"},
      {"build", "Build daily patterns from schedules"},
      {"train", "Fit every model slot and write the manifest"},
      {"generate", "Generate daily patterns for the clean persons"},
      {"evaluate", "Score the models and write reports"},
      {"importance", "Write feature-importance CSVs"},
      {"pipeline", "Run every stage in order"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    actgen::Pipeline p(actgen::load_config(config_path, seed), out_dir);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "synth") p.synth();
    else if (cmd == "ingest") p.ingest();
    else if (cmd == "build") p.build();
    else if (cmd == "train") p.train();
    else if (cmd == "generate") p.generate();
    else if (cmd == "evaluate") p.evaluate();
    else if (cmd == "importance") p.importance();
    else p.run_all();
  } catch (const actgen::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return actgen::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
