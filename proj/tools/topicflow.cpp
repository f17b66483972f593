// Batch CLI over the topicflow library. Each subcommand runs one pipeline
// stage against a run directory; `run` executes the full chain. Exit codes:
// 0 success, 1 invalid configuration or arguments, 2 missing predecessor
// artifact, 3 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topicflow/pipeline.hpp"

namespace {

struct CommandOptions {
  std::string config_path;
  std::string run_dir;
  std::vector<std::string> overrides;
  bool force = false;
  bool verbose = false;
  bool grid = false;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_common_options(CLI::App* cmd, CommandOptions& opt) {
  cmd->add_option("-c,--config", opt.config_path, "JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-r,--run-dir", opt.run_dir, "artifact directory for this run")->required();
  cmd->add_option("--set", opt.overrides,
                  "override a configuration value, e.g. --set lda.k=20");
  cmd->add_flag("--force", opt.force, "rerun even when artifacts are up to date");
  cmd->add_option("--seed", opt.seed, "override run.seed");
  cmd->add_option("--threads", opt.threads, "override run.threads");
  cmd->add_flag("-v,--verbose", opt.verbose, "print stage details");
}

int execute(const CommandOptions& opt, const std::vector<std::string>& stages) {
  std::vector<std::string> overrides = opt.overrides;
  if (opt.seed) overrides.push_back("run.seed=" + std::to_string(*opt.seed));
  if (opt.threads) overrides.push_back("run.threads=" + std::to_string(*opt.threads));

  auto cfg = topicflow::pipeline::load_config(opt.config_path, overrides);
  topicflow::pipeline::LockFile lock{opt.run_dir};
  topicflow::pipeline::Runner runner{opt.run_dir, std::move(cfg), opt.force, opt.verbose};
  for (const auto& stage : stages) {
    const auto result = runner.run_stage(stage);
    if (result.ran)
      std::cout << stage << ": completed in " << result.duration_ms << " ms\n";
    else
      std::cout << stage << ": up to date\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topic model pipeline: corpus ingestion, online LDA training, "
               "coherence selection, topic trends and innovation scoring"};
  app.require_subcommand(1);

  std::map<std::string, CommandOptions> opts;
  const std::vector<std::pair<std::string, std::string>> stage_commands{
      {"ingest", "read records, repair dates, tokenize and store documents"},
      {"preprocess", "build the pruned vocabulary and bag-of-words store"},
      {"train", "fit the online variational topic model"},
      {"coherence", "score the trained model (or --grid: search hyperparameters)"},
      {"trends", "monthly topic shares, group series and correlations"},
      {"innovation", "novelty, transience and resonance per document"},
      {"entities", "author and venue aggregation with standardized scores"},
      {"export", "run summary with artifact fingerprints"},
      {"run", "execute every stage in order"}};
  for (const auto& [name, desc] : stage_commands) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    add_common_options(cmd, opts[name]);
    if (name == "coherence")
      cmd->add_flag("--grid", opts[name].grid, "run the hyperparameter grid search");
  }

  CommandOptions fixture_opt;
  std::string fixture_out;
  std::uint64_t fixture_seed = 7;
  {
    CLI::App* cmd = app.add_subcommand("fixture", "write a small synthetic corpus and config");
    cmd->add_option("-o,--out", fixture_out, "output directory")->required();
    cmd->add_option("--seed", fixture_seed, "generator seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("fixture")) {
      topicflow::pipeline::make_fixture(fixture_out, fixture_seed);
      std::cout << "fixture written to " << fixture_out << "\n";
      return 0;
    }
    for (const auto& [name, desc] : stage_commands) {
      if (!app.got_subcommand(name)) continue;
      if (name == "run") {
        return execute(opts[name], topicflow::pipeline::Runner::stage_order());
      }
      if (name == "coherence" && opts[name].grid) {
        return execute(opts[name], {"grid"});
      }
      return execute(opts[name], {name});
    }
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const topicflow::ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const topicflow::MissingArtifactError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  }
}
