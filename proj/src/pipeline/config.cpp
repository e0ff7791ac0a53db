#include "streakforge/pipeline/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "streakforge/error.hpp"
#include "streakforge/pipeline/hashing.hpp"

namespace streakforge {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw PreconditionError("config: " + what); }

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) bad(where + " must be a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.contains(key)) bad(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    bad(fmt::format("{}.{} has the wrong type", where, key));
  }
}

DetectionParams read_params(const YAML::Node& node, const std::string& where) {
  check_keys(node, where, {"x", "n", "k"});
  DetectionParams p;
  read(node, "x", p.x, where);
  read(node, "n", p.n, where);
  read(node, "k", p.k_percent, where);
  return p;
}

void read_synth(const YAML::Node& node, SyntheticSpec& s) {
  const std::string w = "synth";
  check_keys(node, w,
             {"authors", "seed", "n_min", "n_max", "min_career_years", "max_career_years", "first_year", "last_year",
              "fields", "cross_field_prob", "placement", "streak_fraction", "single_hit_fraction", "hits_per_window",
              "hit_boost", "single_hit_boost", "log_rate", "latent_sd", "late_citation_fraction", "topic_switch",
              "topic_revisit", "refs_per_paper", "ref_pool", "p_dense", "p_big", "p_big_background", "big_team_min",
              "big_team_max", "coauthor_pool", "mean_extra_authors", "emit_fields"});
  read(node, "authors", s.authors, w);
  read(node, "seed", s.seed, w);
  read(node, "n_min", s.n_min, w);
  read(node, "n_max", s.n_max, w);
  read(node, "min_career_years", s.min_career_years, w);
  read(node, "max_career_years", s.max_career_years, w);
  read(node, "first_year", s.first_year, w);
  read(node, "last_year", s.last_year, w);
  read(node, "fields", s.fields, w);
  read(node, "cross_field_prob", s.cross_field_prob, w);
  if (node["placement"]) s.placement = parse_placement(node["placement"].as<std::string>());
  read(node, "streak_fraction", s.streak_fraction, w);
  read(node, "single_hit_fraction", s.single_hit_fraction, w);
  read(node, "hits_per_window", s.hits_per_window, w);
  read(node, "hit_boost", s.hit_boost, w);
  read(node, "single_hit_boost", s.single_hit_boost, w);
  read(node, "log_rate", s.log_rate, w);
  read(node, "latent_sd", s.latent_sd, w);
  read(node, "late_citation_fraction", s.late_citation_fraction, w);
  read(node, "topic_switch", s.topic_switch, w);
  read(node, "topic_revisit", s.topic_revisit, w);
  read(node, "refs_per_paper", s.refs_per_paper, w);
  read(node, "ref_pool", s.ref_pool, w);
  read(node, "p_dense", s.p_dense, w);
  read(node, "p_big", s.p_big, w);
  read(node, "p_big_background", s.p_big_background, w);
  read(node, "big_team_min", s.big_team_min, w);
  read(node, "big_team_max", s.big_team_max, w);
  read(node, "coauthor_pool", s.coauthor_pool, w);
  read(node, "mean_extra_authors", s.mean_extra_authors, w);
  read(node, "emit_fields", s.emit_fields, w);
}

json params_json(const DetectionParams& p) { return {{"x", p.x}, {"n", p.n}, {"k", p.k_percent}}; }

json synth_json(const SyntheticSpec& s) {
  return {{"authors", s.authors},
          {"seed", s.seed},
          {"n_min", s.n_min},
          {"n_max", s.n_max},
          {"min_career_years", s.min_career_years},
          {"max_career_years", s.max_career_years},
          {"first_year", s.first_year},
          {"last_year", s.last_year},
          {"fields", s.fields},
          {"cross_field_prob", s.cross_field_prob},
          {"placement", to_string(s.placement)},
          {"streak_fraction", s.streak_fraction},
          {"single_hit_fraction", s.single_hit_fraction},
          {"hits_per_window", s.hits_per_window},
          {"hit_boost", s.hit_boost},
          {"single_hit_boost", s.single_hit_boost},
          {"log_rate", s.log_rate},
          {"latent_sd", s.latent_sd},
          {"late_citation_fraction", s.late_citation_fraction},
          {"topic_switch", s.topic_switch},
          {"topic_revisit", s.topic_revisit},
          {"refs_per_paper", s.refs_per_paper},
          {"ref_pool", s.ref_pool},
          {"p_dense", s.p_dense},
          {"p_big", s.p_big},
          {"p_big_background", s.p_big_background},
          {"big_team_min", s.big_team_min},
          {"big_team_max", s.big_team_max},
          {"coauthor_pool", s.coauthor_pool},
          {"mean_extra_authors", s.mean_extra_authors},
          {"emit_fields", s.emit_fields}};
}

json ingest_settings(const PipelineConfig& c) {
  return {{"min_papers", c.min_papers},
          {"min_years", c.min_years},
          {"cutoff_year", c.cutoff_year},
          {"field_source", c.field_source == FieldSource::Cluster ? "cluster" : "input"},
          {"field_gamma", c.field_gamma},
          {"field_min_size", c.field_min_size},
          {"k_percent", c.k_percent},
          {"seed", c.seed}};
}

}  // namespace

void PipelineConfig::validate() const {
  if (detection.empty()) bad("detection needs at least one parameter set");
  for (const auto& p : detection) p.validate();
  primary.validate();
  if (primary.n != static_cast<int>(kWindowLength)) bad("primary detection must use N = 5 windows");
  if (min_papers < 1 || min_years < 0) bad("filter thresholds must be min_papers >= 1, min_years >= 0");
  if (!(field_gamma > 0.0) || field_min_size < 1) bad("fields need gamma > 0 and min_size >= 1");
  if (!(k_percent > 0.0 && k_percent <= 100.0)) bad("impact k_percent must lie in (0, 100]");
  if (workers < 1) bad("workers must be >= 1");
  if (bins < 1 || joint_bins < 1) bad("bins must be positive");
  if (!(stage_early > 0.0 && stage_early < stage_late && stage_late < 1.0)) bad("need 0 < stage_early < stage_late < 1");
  if (!(top_quantile > 0.0 && top_quantile <= 1.0)) bad("top_quantile must lie in (0, 1]");
  if (wsr.empty()) bad("fit.wsr needs at least one value");
  for (const double w : wsr) {
    if (!(w >= 0.0 && w <= 1.0)) bad("fit.wsr values must lie in [0, 1]");
  }
  if (!(lambda >= 0.0) || !(epsilon_active >= 0.0) || !(confusion_tol >= 0.0)) bad("fit settings must be nonnegative");
  if (!papers_path.empty() && papers_path == citations_path) bad("papers and citations paths must differ");
  if (!out_dir.empty() && (out_dir == papers_path || out_dir == citations_path)) bad("output dir clashes with an input path");
  synth.validate();
}

std::string PipelineConfig::ingest_json() const { return ingest_settings(*this).dump(); }

std::string PipelineConfig::canonical_json() const {
  json det = json::array();
  for (const auto& p : detection) det.push_back(params_json(p));
  json doc = {
      {"ingest", ingest_settings(*this)},
      {"detection", det},
      {"primary", params_json(primary)},
      {"classify",
       {{"require_first_flag", require_first_flag},
        {"big_project_threshold", big_project_threshold},
        {"small_team_filter", small_team_filter}}},
      {"stats",
       {{"bins", bins},
        {"joint_bins", joint_bins},
        {"min_field_count", min_field_count},
        {"stage_early", stage_early},
        {"stage_late", stage_late},
        {"top_quantile", top_quantile}}},
      {"fit",
       {{"wsr", wsr},
        {"lambda", lambda},
        {"restarts", restarts},
        {"epsilon_active", epsilon_active},
        {"confusion_tol", confusion_tol},
        {"scale", fit_scale == ImpactScale::Log ? "log" : "linear"}}},
      {"report", {{"authors", report_authors}}},
      {"synth", synth_json(synth)},
  };
  return doc.dump();
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical_json()); }

PipelineConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    bad(std::string("cannot parse: ") + e.what());
  }
  PipelineConfig c;
  if (!root || root.IsNull()) {
    c.validate();
    return c;
  }
  check_keys(root, "config",
             {"input", "output", "seed", "workers", "filter", "fields", "impact", "detection", "primary", "classify",
              "stats", "fit", "report", "synth"});
  if (const auto n = root["input"]) {
    check_keys(n, "input", {"papers", "citations"});
    if (n["papers"]) c.papers_path = n["papers"].as<std::string>();
    if (n["citations"]) c.citations_path = n["citations"].as<std::string>();
  }
  if (const auto n = root["output"]) {
    check_keys(n, "output", {"dir"});
    if (n["dir"]) c.out_dir = n["dir"].as<std::string>();
  }
  read(root, "seed", c.seed, "config");
  read(root, "workers", c.workers, "config");
  if (const auto n = root["filter"]) {
    check_keys(n, "filter", {"min_papers", "min_years", "cutoff_year"});
    read(n, "min_papers", c.min_papers, "filter");
    read(n, "min_years", c.min_years, "filter");
    read(n, "cutoff_year", c.cutoff_year, "filter");
  }
  if (const auto n = root["fields"]) {
    check_keys(n, "fields", {"source", "gamma", "min_size"});
    if (n["source"]) {
      const auto s = n["source"].as<std::string>();
      if (s == "cluster") {
        c.field_source = FieldSource::Cluster;
      } else if (s == "input") {
        c.field_source = FieldSource::Input;
      } else {
        bad("fields.source must be 'cluster' or 'input'");
      }
    }
    read(n, "gamma", c.field_gamma, "fields");
    read(n, "min_size", c.field_min_size, "fields");
  }
  if (const auto n = root["impact"]) {
    check_keys(n, "impact", {"k_percent", "fit_scale"});
    read(n, "k_percent", c.k_percent, "impact");
    if (n["fit_scale"]) {
      const auto s = n["fit_scale"].as<std::string>();
      if (s == "log") {
        c.fit_scale = ImpactScale::Log;
      } else if (s == "linear") {
        c.fit_scale = ImpactScale::Linear;
      } else {
        bad("impact.fit_scale must be 'log' or 'linear'");
      }
    }
  }
  if (const auto n = root["detection"]) {
    if (!n.IsSequence()) bad("detection must be a list");
    c.detection.clear();
    for (std::size_t i = 0; i < n.size(); ++i) c.detection.push_back(read_params(n[i], fmt::format("detection[{}]", i)));
  }
  if (const auto n = root["primary"]) c.primary = read_params(n, "primary");
  if (const auto n = root["classify"]) {
    check_keys(n, "classify", {"require_first_flag", "big_project_threshold", "small_team_filter"});
    read(n, "require_first_flag", c.require_first_flag, "classify");
    read(n, "big_project_threshold", c.big_project_threshold, "classify");
    read(n, "small_team_filter", c.small_team_filter, "classify");
  }
  if (const auto n = root["stats"]) {
    check_keys(n, "stats", {"bins", "joint_bins", "min_field_count", "stage_early", "stage_late", "top_quantile"});
    read(n, "bins", c.bins, "stats");
    read(n, "joint_bins", c.joint_bins, "stats");
    read(n, "min_field_count", c.min_field_count, "stats");
    read(n, "stage_early", c.stage_early, "stats");
    read(n, "stage_late", c.stage_late, "stats");
    read(n, "top_quantile", c.top_quantile, "stats");
  }
  if (const auto n = root["fit"]) {
    check_keys(n, "fit", {"wsr", "lambda", "restarts", "epsilon_active", "confusion_tol"});
    read(n, "wsr", c.wsr, "fit");
    read(n, "lambda", c.lambda, "fit");
    read(n, "restarts", c.restarts, "fit");
    read(n, "epsilon_active", c.epsilon_active, "fit");
    read(n, "confusion_tol", c.confusion_tol, "fit");
  }
  if (const auto n = root["report"]) {
    check_keys(n, "report", {"authors"});
    read(n, "authors", c.report_authors, "report");
  }
  if (const auto n = root["synth"]) read_synth(n, c.synth);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace streakforge
