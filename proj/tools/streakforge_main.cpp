// streakforge command line: synthetic corpus generation and the analysis stages.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "streakforge/error.hpp"
#include "streakforge/pipeline/config.hpp"
#include "streakforge/pipeline/pipeline.hpp"
#include "streakforge/pipeline/synthetic.hpp"

namespace sf = streakforge;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "YAML config file");
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out-dir", c.out_dir, "output directory (overrides the config)");
}

sf::PipelineConfig build_config(const Common& c) {
  sf::PipelineConfig cfg = c.config.empty() ? sf::PipelineConfig{} : sf::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  // without explicit inputs, read what `synth` wrote into the output dir
  if (cfg.papers_path.empty()) cfg.papers_path = cfg.out_dir / "papers.ndjson";
  if (cfg.citations_path.empty()) cfg.citations_path = cfg.out_dir / "citations.ndjson";
  cfg.validate();
  return cfg;
}

int run_synth(const Common& c) {
  sf::PipelineConfig cfg = c.config.empty() ? sf::PipelineConfig{} : sf::load_config(c.config);
  if (c.seed) cfg.synth.seed = *c.seed;
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  cfg.synth.validate();
  const sf::SyntheticFiles files = sf::write_synthetic(cfg.synth, cfg.out_dir);
  fmt::print(stderr, "[streakforge] wrote {} authors to {}\n", cfg.synth.authors, cfg.out_dir.string());
  fmt::print("{}\n{}\n{}\n", files.papers.string(), files.citations.string(), files.truth.string());
  return sf::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streakforge: hot-streak detection and career sequence analytics"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> authors;
  std::vector<std::pair<std::string, CLI::App*>> stage_cmds;
  const std::vector<std::pair<std::string, std::string>> docs{
      {"ingest", "ingest, normalize and cluster the corpus; write corpus summaries"},
      {"detect", "detect streak spans and onset densities"},
      {"classify", "label 5-paper windows and count streak types"},
      {"metrics", "collaboration metric curves over relative timing"},
      {"fit", "fit the square-pulse model to smoothed careers"},
      {"stats", "joint maps, temporal distances, overlap and disruption views"},
      {"report", "per-author dossiers"},
      {"all", "run every stage"}};
  for (const auto& [name, doc] : docs) {
    CLI::App* cmd = app.add_subcommand(name, doc);
    add_common(cmd, common);
    if (name == "report") cmd->add_option("-a,--author", authors, "author id (repeatable)");
    stage_cmds.emplace_back(name, cmd);
  }
  CLI::App* synth = app.add_subcommand("synth", "write a seeded synthetic corpus into the output dir");
  add_common(synth, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? sf::kExitOk : sf::kExitUsage;
  }

  try {
    if (synth->parsed()) return run_synth(common);
    for (const auto& [name, cmd] : stage_cmds) {
      if (!cmd->parsed()) continue;
      sf::PipelineConfig cfg = build_config(common);
      if (!authors.empty()) cfg.report_authors = authors;
      if (name == "report" && cfg.report_authors.empty()) {
        fmt::print(stderr, "report: give at least one --author or set report.authors\n");
        return sf::kExitUsage;
      }
      const sf::RunResult r = sf::run_pipeline(cfg, {name});
      if (r.exit_code != sf::kExitOk)
        fmt::print(stderr, "error in stage {}: {}\n", r.failed_stage, r.message);
      return r.exit_code;
    }
  } catch (const sf::PreconditionError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return sf::kExitUsage;
  } catch (const sf::DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return sf::kExitData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return sf::kExitInternal;
  }
  return sf::kExitUsage;
}
