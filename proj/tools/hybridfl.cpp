// hybridfl command-line front end. Subcommands cover the whole pipeline:
//   synth         generate a synthetic corpus with planted error-proneness
//   validate      load a corpus and report diagnostics
//   report-types  per-type error-proneness summary of a corpus
//   learn         learn a statement-type priority model
//   rank          rank each version's suspicious statements
//   eval          take-one-out evaluation (AWE), optionally against a baseline
//
// Exit codes: 0 success, 1 data errors, 2 usage errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridfl/eval.hpp"
#include "hybridfl/ingest.hpp"
#include "hybridfl/parallel.hpp"
#include "hybridfl/priority.hpp"
#include "hybridfl/ranking.hpp"
#include "hybridfl/sbfl.hpp"
#include "hybridfl/synth.hpp"

namespace fs = std::filesystem;
using namespace hybridfl;

namespace {

std::string fmt(double value) { return detail::format_double(value); }

std::string fmt_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
  return buf;
}

struct CommonOpts {
  std::string corpus;
  std::string formula = "ochiai";
  std::string model_path;
  std::string mode = "hybrid";
  std::string aggregation = "avg";
  std::string selection = "on";
  double same_side = 0.95;
  double min_type_share = 0.0;
  std::string ties = "mid";
  int min_defects = 30;
  bool min_defects_set = false;
  std::string baseline;
  std::string out;
  double min_share = 0.01;
  int quantize = -1;
  unsigned jobs = 0;
};

LearnerConfig learner_config(const CommonOpts& opts) {
  LearnerConfig cfg;
  cfg.same_side_fraction = opts.same_side;
  cfg.aggregation = opts.aggregation == "median" ? Aggregation::Median : Aggregation::Average;
  cfg.selection_enabled = opts.selection == "on";
  cfg.min_type_share = opts.min_type_share;
  return cfg;
}

LoadOptions load_options(const CommonOpts& opts) {
  LoadOptions load;
  if (opts.min_defects_set) load.min_defects = opts.min_defects;
  load.jobs = opts.jobs;
  return load;
}

LoadResult load_corpus(const CommonOpts& opts) {
  LoadResult result = load_repository(opts.corpus, load_options(opts));
  for (const Diagnostic& d : result.report.diagnostics)
    std::cerr << d.to_string() << "\n";
  if (result.repo.projects.empty())
    throw CorpusError("no usable projects in " + opts.corpus);
  return result;
}

std::map<std::string, double> parse_weight_list(const std::string& text, const char* what) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos || colon == 0)
      throw CLI::ValidationError(std::string(what) + ": expected label:value pairs");
    try {
      out[item.substr(0, colon)] = std::stod(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError(std::string(what) + ": bad number in '" + item + "'");
    }
    pos = comma + 1;
  }
  return out;
}

// --- eval report rendering -------------------------------------------------

std::vector<std::string> project_order(const EvalReport& report) {
  std::vector<std::string> order;
  for (const AweResult& r : report.results) {
    bool seen = false;
    for (const std::string& p : order) seen = seen || p == r.project_id;
    if (!seen) order.push_back(r.project_id);
  }
  return order;
}

std::string awe_table(const EvalReport& report, const EvalReport* baseline) {
  const std::vector<std::string> projects =
      project_order(baseline != nullptr ? *baseline : report);
  std::string out = "setting";
  for (const std::string& p : projects) out += "\t" + p;
  out += "\tOverall\n";

  auto row = [&](const std::string& label, const EvalReport& r) {
    out += label;
    for (const std::string& p : projects) {
      auto it = r.per_project_awe.find(p);
      out += "\t" + fmt(it == r.per_project_awe.end() ? 0.0 : it->second);
    }
    out += "\t" + fmt(r.overall_awe) + "\n";
  };

  if (baseline != nullptr)
    row(baseline->formula + "+" + to_string(baseline->mode) + " (x)", *baseline);
  row(report.formula + "+" + to_string(report.mode) + (baseline != nullptr ? " (y)" : ""),
      report);

  if (baseline != nullptr) {
    const Comparison cmp = compare_reports(*baseline, report);
    out += "relative-reduction (1-y/x)";
    for (const std::string& p : projects) out += "\t" + fmt_percent(cmp.per_project_reduction.at(p));
    out += "\t" + fmt_percent(cmp.relative_reduction) + "\n";
  }
  return out;
}

std::string breakdown_table(const Comparison& cmp) {
  std::string out =
      "type_label\timproved\tdecreased\tdraws\tchance_improvement\tchance_reduction\n";
  for (const TypeBreakdownRow& row : cmp.per_type) {
    out += row.type_label + "\t" + std::to_string(row.improved) + "\t" +
           std::to_string(row.decreased) + "\t" + std::to_string(row.draws) + "\t" +
           fmt_percent(row.chance_improvement()) + "\t" +
           fmt_percent(row.chance_reduction()) + "\n";
  }
  return out;
}

nlohmann::ordered_json summary_json(const EvalReport& report, const CommonOpts& opts) {
  nlohmann::ordered_json j;
  j["formula"] = report.formula;
  j["mode"] = to_string(report.mode);
  j["ties"] = to_string(report.ties);
  j["aggregation"] = opts.aggregation;
  j["selection"] = opts.selection == "on";
  j["same_side_fraction"] = report.learner_config.same_side_fraction;
  j["overall_awe"] = report.overall_awe;
  j["per_project_awe"] = nlohmann::ordered_json::object();
  for (const auto& [project, awe_sum] : report.per_project_awe)
    j["per_project_awe"][project] = awe_sum;
  j["unlocatable"] = report.unlocatable;
  j["skipped_folds"] = report.skipped_folds;
  j["results"] = nlohmann::ordered_json::array();
  for (const AweResult& r : report.results) {
    nlohmann::ordered_json e;
    e["project"] = r.project_id;
    e["version"] = r.version_id;
    e["awe"] = r.awe;
    e["fault_statement"] = r.fault_statement;
    e["fault_type"] = r.fault_type;
    j["results"].push_back(std::move(e));
  }
  return j;
}

EvalReport load_summary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open baseline summary " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
  EvalReport report;
  try {
    report.formula = j.at("formula").get<std::string>();
    report.mode = parse_sorting_mode(j.at("mode").get<std::string>());
    report.overall_awe = j.at("overall_awe").get<double>();
    for (const auto& [project, awe_sum] : j.at("per_project_awe").items())
      report.per_project_awe[project] = awe_sum.get<double>();
    for (const auto& e : j.at("results")) {
      AweResult r;
      r.project_id = e.at("project").get<std::string>();
      r.version_id = e.at("version").get<std::string>();
      r.awe = e.at("awe").get<double>();
      r.fault_statement = e.value("fault_statement", "");
      r.fault_type = e.value("fault_type", "");
      report.results.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
  return report;
}

// --- subcommands -------------------------------------------------------------

int run_learn(const CommonOpts& opts) {
  const LoadResult loaded = load_corpus(opts);
  const PriorityModel model = learn(loaded.repo, learner_config(opts));
  save_priority_model(model, opts.out);
  std::cout << "learned priorities from " << loaded.repo.projects.size() << " projects, "
            << loaded.repo.version_count() << " versions\n";
  for (const auto& [label, weight] : model.weights())
    std::cout << label << "\t" << fmt(weight) << "\t"
              << (model.selected(label) ? "selected" : "default") << "\n";
  std::cout << "model written to " << opts.out << "\n";
  return 0;
}

int run_rank(const CommonOpts& opts) {
  const LoadResult loaded = load_corpus(opts);
  const FormulaId formula = FormulaId::parse(opts.formula);
  const SortingMode mode = parse_sorting_mode(opts.mode);
  const TiePolicy ties = parse_tie_policy(opts.ties);
  const PriorityModel model =
      opts.model_path.empty() ? PriorityModel::all_ones() : load_priority_model(opts.model_path);

  std::vector<const FaultyVersion*> versions;
  for (const ProjectVersions& project : loaded.repo.projects)
    for (const FaultyVersion& version : project.versions) versions.push_back(&version);

  parallel_for_index(versions.size(), opts.jobs, [&](std::size_t i) {
    const FaultyVersion& version = *versions[i];
    const auto ranked = rank(version, formula, model, mode, ties, opts.quantize);
    save_ranked_list(ranked,
                     fs::path(opts.out) / version.project_id / (version.version_id + ".tsv"));
  });
  std::cout << "ranked " << versions.size() << " versions into " << opts.out << "\n";
  return 0;
}

int run_eval(const CommonOpts& opts) {
  const LoadResult loaded = load_corpus(opts);
  const EvalReport report =
      take_one_out(loaded.repo, FormulaId::parse(opts.formula), parse_sorting_mode(opts.mode),
                   learner_config(opts), parse_tie_policy(opts.ties), opts.jobs,
                   opts.quantize);

  std::optional<EvalReport> baseline;
  if (!opts.baseline.empty()) baseline = load_summary(opts.baseline);

  const std::string table = awe_table(report, baseline ? &*baseline : nullptr);
  std::cout << table;
  if (!report.unlocatable.empty()) {
    std::cout << "unlocatable versions (excluded): " << report.unlocatable.size() << "\n";
    for (const std::string& u : report.unlocatable) std::cout << "  " << u << "\n";
  }
  for (const std::string& fold : report.skipped_folds)
    std::cout << "skipped fold (degenerate training data): " << fold << "\n";

  std::optional<Comparison> cmp;
  if (baseline) {
    cmp = compare_reports(*baseline, report);
    std::cout << "\n" << breakdown_table(*cmp);
  }

  if (!opts.out.empty()) {
    const fs::path out_dir(opts.out);
    write_file_atomic(out_dir / "awe_table.tsv", table);
    write_file_atomic(out_dir / "summary.json", summary_json(report, opts).dump(2) + "\n");
    if (cmp) write_file_atomic(out_dir / "breakdown.tsv", breakdown_table(*cmp));
    std::cout << "report written to " << opts.out << "\n";
  }
  return 0;
}

int run_report_types(const CommonOpts& opts) {
  const LoadResult loaded = load_corpus(opts);
  const auto rows = report_error_proneness(loaded.repo, opts.min_share);
  std::string out =
      "type_label\ttotal_suspicious\tprojects\trp_min\trp_max\trp_avg\trp_median\n";
  for (const TypeReportRow& row : rows)
    out += row.type_label + "\t" + std::to_string(row.total_suspicious) + "\t" +
           std::to_string(row.project_count) + "\t" + fmt(row.rp_min) + "\t" +
           fmt(row.rp_max) + "\t" + fmt(row.rp_avg) + "\t" + fmt(row.rp_median) + "\n";
  std::cout << out;
  if (!opts.out.empty()) write_file_atomic(opts.out, out);
  return 0;
}

int run_validate(const CommonOpts& opts) {
  const LoadResult result = load_repository(opts.corpus, load_options(opts));
  for (const Diagnostic& d : result.report.diagnostics) std::cout << d.to_string() << "\n";
  std::cout << "projects: " << result.report.loaded_projects
            << ", versions: " << result.report.loaded_versions
            << ", rejected versions: " << result.report.rejected_versions
            << ", excluded projects: " << result.report.excluded_projects << "\n";
  if (result.repo.projects.empty()) {
    std::cout << "validation failed: no usable projects\n";
    return 1;
  }
  if (result.report.has_rejections()) {
    std::cout << "validation failed: corpus has rejected content\n";
    return 1;
  }
  std::cout << "corpus ok\n";
  return 0;
}

struct SynthOpts {
  SynthConfig cfg;
  std::string type_mix;
  std::string planted_rp;
  std::string out;
};

int run_synth(SynthOpts& opts) {
  if (!opts.type_mix.empty()) opts.cfg.type_mix = parse_weight_list(opts.type_mix, "--type-mix");
  if (!opts.planted_rp.empty())
    opts.cfg.planted_rp = parse_weight_list(opts.planted_rp, "--planted-rp");
  const FaultRepository repo = generate(opts.cfg);
  CorpusFilterPolicy policy;
  policy.min_defects_per_project = 1;  // synthetic corpora skip the dataset filter
  policy.exclude_insert_only = true;
  save_repository(repo, opts.out, policy);
  std::cout << "wrote " << repo.projects.size() << " projects, " << repo.version_count()
            << " versions to " << opts.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid statement-level fault localization toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  SynthOpts synth_opts;

  // Lives on the parent so every subcommand shares it; fallthrough (below)
  // lets it appear after the subcommand name too.
  app.add_option("--jobs", opts.jobs, "worker thread cap (0 = all cores)")
      ->envname("HYBRIDFL_JOBS");
  app.fallthrough();

  const auto add_corpus = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", opts.corpus, "corpus directory")->required();
  };
  const auto add_min_defects = [&](CLI::App* cmd) {
    cmd->add_option("--min-defects", opts.min_defects,
                    "minimum usable defects per project (default 30)")
        ->each([&](const std::string&) { opts.min_defects_set = true; });
  };
  const auto add_learner = [&](CLI::App* cmd) {
    cmd->add_option("--aggregation", opts.aggregation, "priority aggregation (default avg)")
        ->check(CLI::IsMember({"avg", "median"}));
    cmd->add_option("--selection", opts.selection,
                    "restrict priorities to steady types (default on)")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--same-side", opts.same_side,
                    "same-side fraction for selection (default 0.95)");
    cmd->add_option("--min-type-share", opts.min_type_share,
                    "ignore types below this share of suspicious statements");
  };
  const CLI::Validator formula_check(
      [](std::string& s) -> std::string {
        try {
          FormulaId::parse(s);
          return {};
        } catch (const std::exception& e) {
          return e.what();
        }
      },
      "FORMULA");
  const auto add_ranking = [&](CLI::App* cmd) {
    cmd->add_option("--formula", opts.formula,
                    "tarantula|jaccard|ochiai|dstar:<exp>|barinel (default ochiai)")
        ->check(formula_check);
    cmd->add_option("--mode", opts.mode, "sorting mode (default hybrid)")
        ->check(CLI::IsMember({"hybrid", "sbfl-only", "priority-only", "ml-sbfl-first",
                               "ml-priority-first"}));
    cmd->add_option("--ties", opts.ties, "tie policy (default mid)")
        ->check(CLI::IsMember({"mid", "worst", "best"}));
    cmd->add_option("--quantize", opts.quantize,
                    "round the first multi-level key to this many digits");
  };

  CLI::App* learn_cmd = app.add_subcommand("learn", "learn a priority model from a corpus");
  add_corpus(learn_cmd);
  add_min_defects(learn_cmd);
  add_learner(learn_cmd);
  learn_cmd->add_option("--out", opts.out, "priority model output file")->required();

  CLI::App* rank_cmd = app.add_subcommand("rank", "rank suspicious statements per version");
  add_corpus(rank_cmd);
  add_min_defects(rank_cmd);
  add_ranking(rank_cmd);
  rank_cmd->add_option("--model", opts.model_path,
                       "priority model file (omit for the all-ones model)");
  rank_cmd->add_option("--out", opts.out, "output directory for ranked lists")->required();

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "take-one-out evaluation with AWE reporting");
  add_corpus(eval_cmd);
  add_min_defects(eval_cmd);
  add_learner(eval_cmd);
  add_ranking(eval_cmd);
  eval_cmd->add_option("--baseline", opts.baseline,
                       "summary.json of a baseline run to compare against");
  eval_cmd->add_option("--out", opts.out, "output directory for report files");

  CLI::App* report_cmd =
      app.add_subcommand("report-types", "per-type error-proneness summary");
  add_corpus(report_cmd);
  add_min_defects(report_cmd);
  report_cmd->add_option("--min-share", opts.min_share,
                         "minimum share of suspicious statements (default 0.01)");
  report_cmd->add_option("--out", opts.out, "also write the table to this file");

  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  synth_cmd->add_option("--seed", synth_opts.cfg.seed, "64-bit generator seed (default 1)");
  synth_cmd->add_option("--projects", synth_opts.cfg.n_projects, "projects (default 4)");
  synth_cmd->add_option("--versions", synth_opts.cfg.versions_per_project,
                        "versions per project (default 30)");
  synth_cmd->add_option("--statements", synth_opts.cfg.statements_per_version,
                        "statements per version (default 60)");
  synth_cmd->add_option("--tests", synth_opts.cfg.tests_per_version,
                        "tests per version (default 12)");
  synth_cmd->add_option("--density", synth_opts.cfg.coverage_density,
                        "coverage density in (0,1] (default 0.5)");
  synth_cmd->add_option("--fail-fraction", synth_opts.cfg.fail_fraction,
                        "failing test fraction in (0,1) (default 0.25)");
  synth_cmd->add_option("--fault-rate", synth_opts.cfg.fault_rate,
                        "target faulty share per version (default 0.08)");
  synth_cmd->add_option("--fault-cover-prob", synth_opts.cfg.failed_cover_fault_prob,
                        "failed-test coverage bias for faults (default 1.0)");
  synth_cmd->add_option("--type-mix", synth_opts.type_mix,
                        "label:share list, e.g. If:0.25,Expression:0.75");
  synth_cmd->add_option("--planted-rp", synth_opts.planted_rp,
                        "label:rp list of planted error-proneness");
  synth_cmd->add_option("--out", synth_opts.out, "corpus output directory")->required();

  CLI::App* validate_cmd = app.add_subcommand("validate", "load a corpus and report problems");
  add_corpus(validate_cmd);
  add_min_defects(validate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (learn_cmd->parsed()) return run_learn(opts);
    if (rank_cmd->parsed()) return run_rank(opts);
    if (eval_cmd->parsed()) return run_eval(opts);
    if (report_cmd->parsed()) return run_report_types(opts);
    if (synth_cmd->parsed()) return run_synth(synth_opts);
    if (validate_cmd->parsed()) return run_validate(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
