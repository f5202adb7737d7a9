#pragma once

// Ranking-quality evaluation: Absolute Wasted Effort (AWE) per version and
// the take-one-out protocol, where each project in turn is ranked with a
// priority model trained on all the other projects. AWE is the rank number
// of the best-ranked faulty statement; versions whose faults are never
// covered by a failed test are unlocatable and reported, not penalized.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridfl/core.hpp"
#include "hybridfl/parallel.hpp"
#include "hybridfl/priority.hpp"
#include "hybridfl/ranking.hpp"
#include "hybridfl/sbfl.hpp"

namespace hybridfl {

struct AweResult {
  std::string project_id;
  std::string version_id;
  double awe = 0.0;             // >= 1; fractional under MidRank
  std::string fault_statement;  // the best-ranked faulty statement
  std::string fault_type;       // its type label
  std::string fold_id;
};

struct LocatedFault {
  double awe = 0.0;
  std::string statement_id;
  std::string type_label;
};

/// Position of the best-ranked faulty statement, or nullopt when no fault
/// appears in the list (unlocatable). Throws if faults is empty.
inline std::optional<LocatedFault> locate_fault(const std::vector<RankedEntry>& ranked,
                                                const std::set<std::string>& faults) {
  if (faults.empty()) throw std::invalid_argument("locate_fault: empty fault set");
  for (const RankedEntry& e : ranked)
    if (faults.count(e.statement_id))
      return LocatedFault{e.rank, e.statement_id, e.type_label};
  return std::nullopt;
}

inline std::optional<double> awe(const std::vector<RankedEntry>& ranked,
                                 const std::set<std::string>& faults) {
  auto located = locate_fault(ranked, faults);
  if (!located) return std::nullopt;
  return located->awe;
}

struct EvalReport {
  std::vector<AweResult> results;  // ordered by (project, version) as in the repo
  std::map<std::string, double> per_project_awe;
  double overall_awe = 0.0;
  std::vector<std::string> unlocatable;  // "project/version"
  std::vector<std::string> skipped_folds;
  std::string formula;
  SortingMode mode = SortingMode::Hybrid;
  TiePolicy ties = TiePolicy::MidRank;
  LearnerConfig learner_config;
};

/// Take-one-out evaluation: each project is ranked with a model learned
/// from the remaining projects. Folds run in parallel (jobs = 0 uses all
/// cores); the report is deterministic regardless of scheduling. Folds
/// whose training data yields no usable RP statistics are skipped with a
/// warning.
inline EvalReport take_one_out(const FaultRepository& repo, const FormulaId& formula,
                               SortingMode mode, const LearnerConfig& cfg = {},
                               TiePolicy ties = TiePolicy::MidRank, unsigned jobs = 0,
                               int quantize_digits = -1) {
  if (repo.projects.size() < 2)
    throw std::invalid_argument("take_one_out needs a repository with >= 2 projects");
  detail::validate_learner_config(cfg);

  struct FoldOutput {
    std::vector<AweResult> results;
    std::vector<std::string> unlocatable;
    bool skipped = false;
  };
  std::vector<FoldOutput> folds(repo.projects.size());

  parallel_for_index(repo.projects.size(), jobs, [&](std::size_t fold) {
    const ProjectVersions& held_out = repo.projects[fold];
    FaultRepository training;
    for (std::size_t p = 0; p < repo.projects.size(); ++p)
      if (p != fold) training.projects.push_back(repo.projects[p]);

    const TypeStatsResult stats = collect_type_stats(training);
    if (stats.stats.empty()) {
      folds[fold].skipped = true;
      return;
    }
    const PriorityModel model = detail::learn_from_stats(stats, cfg);

    for (const FaultyVersion& version : held_out.versions) {
      const auto ranked = rank(version, formula, model, mode, ties, quantize_digits);
      const auto located = locate_fault(ranked, version.fault_labels);
      if (!located) {
        folds[fold].unlocatable.push_back(held_out.project_id + "/" + version.version_id);
        continue;
      }
      AweResult r;
      r.project_id = held_out.project_id;
      r.version_id = version.version_id;
      r.awe = located->awe;
      r.fault_statement = located->statement_id;
      r.fault_type = located->type_label;
      r.fold_id = held_out.project_id;
      folds[fold].results.push_back(std::move(r));
    }
  });

  EvalReport report;
  report.formula = formula.to_string();
  report.mode = mode;
  report.ties = ties;
  report.learner_config = cfg;
  for (std::size_t fold = 0; fold < folds.size(); ++fold) {
    if (folds[fold].skipped) {
      report.skipped_folds.push_back(repo.projects[fold].project_id);
      continue;
    }
    for (AweResult& r : folds[fold].results) {
      report.per_project_awe[r.project_id] += r.awe;
      report.overall_awe += r.awe;
      report.results.push_back(std::move(r));
    }
    for (std::string& u : folds[fold].unlocatable)
      report.unlocatable.push_back(std::move(u));
  }
  return report;
}

struct TypeBreakdownRow {
  std::string type_label;
  std::size_t improved = 0;   // treatment AWE strictly below baseline
  std::size_t decreased = 0;  // strictly above
  std::size_t draws = 0;

  std::size_t total() const { return improved + decreased + draws; }
  double chance_improvement() const {
    return total() == 0 ? 0.0 : static_cast<double>(improved) / static_cast<double>(total());
  }
  double chance_reduction() const {
    return total() == 0 ? 0.0 : static_cast<double>(decreased) / static_cast<double>(total());
  }
};

struct Comparison {
  double baseline_overall = 0.0;
  double treatment_overall = 0.0;
  double relative_reduction = 0.0;  // 1 - treatment/baseline
  std::map<std::string, double> per_project_reduction;
  std::vector<TypeBreakdownRow> per_type;
  std::size_t paired_versions = 0;
};

// Pairs two runs version by version. Each version is classified by the
// type of the faulty statement that determines its baseline AWE.
inline std::vector<TypeBreakdownRow> per_type_breakdown(const EvalReport& baseline,
                                                        const EvalReport& treatment) {
  std::map<std::pair<std::string, std::string>, const AweResult*> treat_by_version;
  for (const AweResult& r : treatment.results)
    treat_by_version[{r.project_id, r.version_id}] = &r;

  std::map<std::string, TypeBreakdownRow> rows;
  for (const AweResult& base : baseline.results) {
    auto it = treat_by_version.find({base.project_id, base.version_id});
    if (it == treat_by_version.end()) continue;
    TypeBreakdownRow& row = rows[base.fault_type];
    row.type_label = base.fault_type;
    if (it->second->awe < base.awe)
      ++row.improved;
    else if (it->second->awe > base.awe)
      ++row.decreased;
    else
      ++row.draws;
  }

  std::vector<TypeBreakdownRow> out;
  for (auto& [label, row] : rows) out.push_back(std::move(row));
  std::sort(out.begin(), out.end(), [](const TypeBreakdownRow& a, const TypeBreakdownRow& b) {
    if (a.total() != b.total()) return a.total() > b.total();
    return a.type_label < b.type_label;
  });
  return out;
}

/// Relative reduction 1 - y/x of a treatment run against a baseline run.
/// Both runs must cover the identical (project, version) set.
inline Comparison compare_reports(const EvalReport& baseline, const EvalReport& treatment) {
  std::set<std::pair<std::string, std::string>> base_keys;
  std::set<std::pair<std::string, std::string>> treat_keys;
  for (const AweResult& r : baseline.results) base_keys.insert({r.project_id, r.version_id});
  for (const AweResult& r : treatment.results) treat_keys.insert({r.project_id, r.version_id});
  if (base_keys != treat_keys)
    throw std::invalid_argument(
        "compare_reports: runs cover different (project, version) sets");
  if (base_keys.empty())
    throw std::invalid_argument("compare_reports: no paired versions");

  Comparison cmp;
  cmp.paired_versions = base_keys.size();
  cmp.baseline_overall = baseline.overall_awe;
  cmp.treatment_overall = treatment.overall_awe;
  cmp.relative_reduction = 1.0 - treatment.overall_awe / baseline.overall_awe;
  for (const auto& [project, x] : baseline.per_project_awe) {
    const double y = treatment.per_project_awe.at(project);
    cmp.per_project_reduction[project] = 1.0 - y / x;
  }
  cmp.per_type = per_type_breakdown(baseline, treatment);
  return cmp;
}

}  // namespace hybridfl
