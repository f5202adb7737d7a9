#pragma once

// Offline analysis over a fault repository: per-project, per-type
// error-proneness statistics and the statement-type priority model derived
// from them.
//
// For each project the fraction of suspicious statement occurrences that
// are faulty gives the project-wide error-proneness AP; the same fraction
// restricted to one statement type gives AP(type). Their ratio RP =
// AP(type)/AP measures how much more or less error-prone a type is than
// the project average. A type whose log10(RP) values sit on one side of
// zero in enough training projects gets a priority weight
// W = 10^(mean of log10 RP), the geometric mean of its RP values; all
// other types keep the default weight 1.
//
// Statement identity across versions is per (version, statement): the
// project-level suspicious/faulty sets are disjoint unions over versions,
// so a statement suspicious in two versions contributes two occurrences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hybridfl/core.hpp"

namespace hybridfl {

enum class Aggregation { Average, Median };

struct LearnerConfig {
  // Fraction of contributing projects whose log-RP must fall strictly on
  // one side of zero for a type to receive a special priority.
  double same_side_fraction = 0.95;
  Aggregation aggregation = Aggregation::Average;
  bool selection_enabled = true;
  // Types whose share of suspicious occurrences falls below this are left
  // out of the model entirely (lookup falls back to weight 1).
  double min_type_share = 0.0;
};

struct ProjectTypeStats {
  std::string project_id;
  std::string type_label;
  std::size_t tss_count = 0;  // suspicious occurrences of this type
  std::size_t tfs_count = 0;  // of those, faulty occurrences
  double ap_type = 0.0;       // tfs_count / tss_count
  double ap_project = 0.0;    // project-wide faulty share among suspicious
  double rp = 0.0;            // ap_type / ap_project
};

struct TypeStatsResult {
  std::vector<ProjectTypeStats> stats;
  // Projects excluded from RP computation (no faulty suspicious statements,
  // or no suspicious statements at all).
  std::vector<std::string> warnings;
};

// Per-project, per-type counts and relative error-proneness. Projects with
// AP = 0 contribute no rows and produce a warning instead.
inline TypeStatsResult collect_type_stats(const FaultRepository& repo) {
  TypeStatsResult out;
  for (const ProjectVersions& project : repo.projects) {
    std::size_t tss_total = 0;
    std::size_t tfs_total = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_type;

    for (const FaultyVersion& version : project.versions) {
      for (std::size_t idx : version.spectrum.suspicious_indices()) {
        const StatementInfo& s = version.spectrum.statements()[idx];
        auto& [tss, tfs] = per_type[s.type_label];
        ++tss;
        ++tss_total;
        if (version.fault_labels.count(s.id)) {
          ++tfs;
          ++tfs_total;
        }
      }
    }

    if (tss_total == 0 || tfs_total == 0) {
      out.warnings.push_back(project.project_id +
                             ": no faulty suspicious statements, excluded from RP");
      continue;
    }

    const double ap_project =
        static_cast<double>(tfs_total) / static_cast<double>(tss_total);
    for (const auto& [label, counts] : per_type) {
      ProjectTypeStats row;
      row.project_id = project.project_id;
      row.type_label = label;
      row.tss_count = counts.first;
      row.tfs_count = counts.second;
      row.ap_type = static_cast<double>(counts.second) / static_cast<double>(counts.first);
      row.ap_project = ap_project;
      row.rp = row.ap_type / ap_project;
      out.stats.push_back(std::move(row));
    }
  }
  return out;
}

class PriorityModel {
 public:
  PriorityModel() = default;

  PriorityModel(std::map<std::string, double> weights,
                std::map<std::string, bool> selected,
                std::map<std::string, std::vector<std::pair<std::string, double>>> per_type_rp,
                LearnerConfig config)
      : weights_(std::move(weights)),
        selected_(std::move(selected)),
        per_type_rp_(std::move(per_type_rp)),
        config_(config) {}

  /// Priority weight for a type; types absent from the model get 1.
  double weight(const std::string& type_label) const {
    auto it = weights_.find(type_label);
    return it == weights_.end() ? 1.0 : it->second;
  }

  bool selected(const std::string& type_label) const {
    auto it = selected_.find(type_label);
    return it != selected_.end() && it->second;
  }

  const std::map<std::string, double>& weights() const { return weights_; }
  const std::map<std::string, bool>& selection() const { return selected_; }
  const std::map<std::string, std::vector<std::pair<std::string, double>>>& per_type_rp() const {
    return per_type_rp_;
  }
  const LearnerConfig& config() const { return config_; }

  // Model that leaves every SBFL score untouched.
  static PriorityModel all_ones() { return PriorityModel(); }

 private:
  std::map<std::string, double> weights_;
  std::map<std::string, bool> selected_;
  std::map<std::string, std::vector<std::pair<std::string, double>>> per_type_rp_;
  LearnerConfig config_;
};

namespace detail {

// Smallest count k with k >= fraction * n, robust to the fraction not being
// exactly representable (0.85 * 20 must come out as 17, not 18).
inline std::size_t min_same_side_count(double fraction, std::size_t n) {
  const double raw = fraction * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return k == 0 ? 1 : k;
}

// W per the priority formula. Average aggregation is 10^(mean of log10 RP),
// i.e. the geometric mean; a single RP of 0 forces W = 0, which stands in
// for the log of zero without producing infinities. Median aggregation is
// 10^(median of log10 RP): the middle RP for odd n, the geometric mean of
// the two middle values for even n.
inline double aggregate_priority(std::vector<double> rp_values, Aggregation aggregation) {
  if (rp_values.empty()) return 1.0;
  if (aggregation == Aggregation::Average) {
    double log_sum = 0.0;
    for (double rp : rp_values) {
      if (rp == 0.0) return 0.0;
      log_sum += std::log10(rp);
    }
    return std::pow(10.0, log_sum / static_cast<double>(rp_values.size()));
  }
  // log10 is monotone, so sorting RP values sorts their logs.
  std::sort(rp_values.begin(), rp_values.end());
  const std::size_t n = rp_values.size();
  if (n % 2 == 1) return rp_values[n / 2];
  return std::sqrt(rp_values[n / 2 - 1] * rp_values[n / 2]);
}

inline void validate_learner_config(const LearnerConfig& cfg) {
  if (!(cfg.same_side_fraction > 0.5) || !(cfg.same_side_fraction <= 1.0))
    throw std::invalid_argument("same_side_fraction must be in (0.5, 1]");
  if (cfg.min_type_share < 0.0)
    throw std::invalid_argument("min_type_share must be >= 0");
}

// Core of learn(), shared with the take-one-out harness whose training
// folds may hold a single project.
inline PriorityModel learn_from_stats(const TypeStatsResult& collected,
                                      const LearnerConfig& cfg) {
  validate_learner_config(cfg);

  std::map<std::string, std::vector<std::pair<std::string, double>>> rp_by_type;
  std::map<std::string, std::size_t> tss_by_type;
  std::size_t tss_total = 0;
  for (const ProjectTypeStats& row : collected.stats) {
    rp_by_type[row.type_label].emplace_back(row.project_id, row.rp);
    tss_by_type[row.type_label] += row.tss_count;
    tss_total += row.tss_count;
  }

  std::map<std::string, double> weights;
  std::map<std::string, bool> selected;
  std::map<std::string, std::vector<std::pair<std::string, double>>> per_type_rp;

  for (auto& [label, entries] : rp_by_type) {
    if (cfg.min_type_share > 0.0 && tss_total > 0) {
      const double share = static_cast<double>(tss_by_type[label]) /
                           static_cast<double>(tss_total);
      if (share < cfg.min_type_share) continue;
    }

    // Aggregation must not depend on the repository's project order.
    std::sort(entries.begin(), entries.end());

    std::size_t above = 0;
    std::size_t below = 0;
    for (const auto& [pid, rp] : entries) {
      if (rp > 1.0)
        ++above;
      else if (rp < 1.0)
        ++below;  // RP = 0 sits on the "less error-prone" side
    }
    const std::size_t need = min_same_side_count(cfg.same_side_fraction, entries.size());
    const bool is_selected = above >= need || below >= need;

    double w = 1.0;
    if (is_selected || !cfg.selection_enabled) {
      std::vector<double> rp_values;
      rp_values.reserve(entries.size());
      for (const auto& [pid, rp] : entries) rp_values.push_back(rp);
      w = aggregate_priority(std::move(rp_values), cfg.aggregation);
    }

    weights[label] = w;
    selected[label] = is_selected;
    per_type_rp[label] = entries;
  }

  return PriorityModel(std::move(weights), std::move(selected),
                       std::move(per_type_rp), cfg);
}

inline PriorityModel learn_unchecked(const FaultRepository& repo, const LearnerConfig& cfg) {
  return learn_from_stats(collect_type_stats(repo), cfg);
}

}  // namespace detail

/// Learns the statement-type priority model from a fault repository.
/// Requires at least two projects: steadiness of a type's error-proneness
/// is a cross-project property.
inline PriorityModel learn(const FaultRepository& repo, const LearnerConfig& cfg = {}) {
  if (repo.projects.size() < 2)
    throw std::invalid_argument("learn() needs a repository with >= 2 projects");
  return detail::learn_unchecked(repo, cfg);
}

struct TypeReportRow {
  std::string type_label;
  std::size_t total_suspicious = 0;
  std::size_t project_count = 0;
  double rp_min = 0.0;
  double rp_max = 0.0;
  double rp_avg = 0.0;
  double rp_median = 0.0;
};

// Error-proneness summary per statement type, restricted to types holding
// at least min_share of all suspicious occurrences. Rows are ordered by
// total_suspicious, largest first.
inline std::vector<TypeReportRow> report_error_proneness(const FaultRepository& repo,
                                                         double min_share = 0.01) {
  const TypeStatsResult collected = collect_type_stats(repo);

  std::map<std::string, std::vector<double>> rp_by_type;
  std::map<std::string, std::size_t> tss_by_type;
  std::size_t tss_total = 0;
  for (const ProjectTypeStats& row : collected.stats) {
    rp_by_type[row.type_label].push_back(row.rp);
    tss_by_type[row.type_label] += row.tss_count;
    tss_total += row.tss_count;
  }

  std::vector<TypeReportRow> rows;
  for (auto& [label, rps] : rp_by_type) {
    if (tss_total > 0) {
      const double share =
          static_cast<double>(tss_by_type[label]) / static_cast<double>(tss_total);
      if (share < min_share) continue;
    }
    std::sort(rps.begin(), rps.end());
    TypeReportRow row;
    row.type_label = label;
    row.total_suspicious = tss_by_type[label];
    row.project_count = rps.size();
    row.rp_min = rps.front();
    row.rp_max = rps.back();
    double sum = 0.0;
    for (double rp : rps) sum += rp;
    row.rp_avg = sum / static_cast<double>(rps.size());
    const std::size_t n = rps.size();
    row.rp_median = (n % 2 == 1) ? rps[n / 2] : (rps[n / 2 - 1] + rps[n / 2]) / 2.0;
    rows.push_back(std::move(row));
  }

  std::sort(rows.begin(), rows.end(), [](const TypeReportRow& a, const TypeReportRow& b) {
    if (a.total_suspicious != b.total_suspicious)
      return a.total_suspicious > b.total_suspicious;
    return a.type_label < b.type_label;
  });
  return rows;
}

}  // namespace hybridfl
