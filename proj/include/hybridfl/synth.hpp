#pragma once

// Synthetic fault repositories with planted per-type error-proneness.
// These corpora exist as math oracles for the learner, ranker, and
// evaluation harness: the planted parameters are the ground truth the
// pipeline must recover. They make no claim of resembling real defect
// distributions.
//
// Per version, a statement of type t is faulty with probability
//   p_t = fault_rate * planted_rp[t] / sum_s(type_mix[s] * planted_rp[s]),
// so the version-level fault share among statements matches fault_rate.
// The relative error-proneness the learner measures is therefore
// planted_rp[t] normalized by that mix-weighted mean; pick mixes and RP
// values whose weighted mean is 1 when the planted numbers should come
// back unchanged. Fault counts per type are drawn stratified (floor of
// the expectation plus a Bernoulli remainder) to keep recovery tight on
// small corpora.
//
// Failed tests cover faulty statements with probability
// failed_cover_fault_prob (default 1, and a failed covering test is forced
// if the draws miss) and everything else with coverage_density, so every
// fault is suspicious and SBFL has signal.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridfl/core.hpp"
#include "hybridfl/prng.hpp"

namespace hybridfl {

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_projects = 4;
  int versions_per_project = 30;
  int statements_per_version = 60;
  int tests_per_version = 12;
  double coverage_density = 0.5;   // in (0, 1]
  double fail_fraction = 0.25;     // in (0, 1)
  double fault_rate = 0.08;        // target faulty share per version
  double failed_cover_fault_prob = 1.0;
  std::map<std::string, double> type_mix = {
      {"Expression", 0.45}, {"If", 0.25}, {"Return", 0.20}, {"For", 0.10}};
  // Types absent from planted_rp default to 1.0.
  std::map<std::string, double> planted_rp;
};

namespace detail {

inline std::string padded_id(const char* prefix, int index, int total) {
  const std::string digits = std::to_string(index);
  const std::size_t width = std::to_string(total).size();
  std::string out(prefix);
  if (digits.size() < width) out.append(width - digits.size(), '0');
  out += digits;
  return out;
}

}  // namespace detail

inline FaultRepository generate(const SynthConfig& cfg) {
  if (cfg.n_projects < 1 || cfg.versions_per_project < 1 ||
      cfg.statements_per_version < 1 || cfg.tests_per_version < 1)
    throw std::invalid_argument("synth: counts must be >= 1");
  if (!(cfg.coverage_density > 0.0) || cfg.coverage_density > 1.0)
    throw std::invalid_argument("synth: coverage_density must be in (0, 1]");
  if (!(cfg.fail_fraction > 0.0) || !(cfg.fail_fraction < 1.0))
    throw std::invalid_argument("synth: fail_fraction must be in (0, 1)");
  if (!(cfg.fault_rate > 0.0) || cfg.fault_rate > 1.0)
    throw std::invalid_argument("synth: fault_rate must be in (0, 1]");
  if (cfg.failed_cover_fault_prob < 0.0 || cfg.failed_cover_fault_prob > 1.0)
    throw std::invalid_argument("synth: failed_cover_fault_prob must be in [0, 1]");
  if (cfg.type_mix.empty()) throw std::invalid_argument("synth: empty type_mix");

  double mix_sum = 0.0;
  for (const auto& [label, share] : cfg.type_mix) {
    if (label.empty() || share < 0.0)
      throw std::invalid_argument("synth: bad type_mix entry");
    mix_sum += share;
  }
  if (std::fabs(mix_sum - 1.0) > 1e-9)
    throw std::invalid_argument("synth: type_mix proportions must sum to 1");
  for (const auto& [label, rp] : cfg.planted_rp) {
    if (rp < 0.0) throw std::invalid_argument("synth: planted_rp must be >= 0");
    if (!cfg.type_mix.count(label))
      throw std::invalid_argument("synth: planted_rp type '" + label +
                                  "' missing from type_mix");
  }

  auto rp_of = [&](const std::string& label) {
    auto it = cfg.planted_rp.find(label);
    return it == cfg.planted_rp.end() ? 1.0 : it->second;
  };

  double mix_mean = 0.0;
  for (const auto& [label, share] : cfg.type_mix) mix_mean += share * rp_of(label);
  if (!(mix_mean > 0.0))
    throw std::invalid_argument("synth: planted_rp is zero everywhere");

  std::map<std::string, double> fault_prob;
  for (const auto& [label, share] : cfg.type_mix) {
    const double p = cfg.fault_rate * rp_of(label) / mix_mean;
    if (p > 1.0)
      throw std::invalid_argument("synth: fault probability for type '" + label +
                                  "' exceeds 1; lower fault_rate or planted_rp");
    fault_prob[label] = p;
  }

  SplitMix64 rng(cfg.seed);
  FaultRepository repo;

  for (int p = 1; p <= cfg.n_projects; ++p) {
    ProjectVersions project;
    project.project_id = detail::padded_id("proj", p, cfg.n_projects);

    for (int v = 1; v <= cfg.versions_per_project; ++v) {
      const int n_stmts = cfg.statements_per_version;

      std::vector<StatementInfo> statements;
      statements.reserve(n_stmts);
      std::map<std::string, std::vector<std::size_t>> by_type;
      for (int i = 0; i < n_stmts; ++i) {
        const double u = rng.next_double();
        double cum = 0.0;
        std::string label = cfg.type_mix.rbegin()->first;
        for (const auto& [name, share] : cfg.type_mix) {
          cum += share;
          if (u < cum) {
            label = name;
            break;
          }
        }
        StatementInfo s;
        s.id = detail::padded_id("s", i + 1, n_stmts);
        s.file = "src/Main.java";
        s.line_start = i + 1;
        s.line_end = i + 1;
        s.type_label = label;
        by_type[label].push_back(statements.size());
        statements.push_back(std::move(s));
      }

      // Stratified fault draw per type: floor(n_t * p_t) faults plus a
      // Bernoulli remainder, chosen uniformly among that type's statements.
      std::set<std::string> faults;
      for (auto& [label, idxs] : by_type) {
        const double target = fault_prob[label] * static_cast<double>(idxs.size());
        std::size_t k = static_cast<std::size_t>(target);
        if (rng.next_double() < target - static_cast<double>(k)) ++k;
        if (k > idxs.size()) k = idxs.size();
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t pick = j + rng.next_below(idxs.size() - j);
          std::swap(idxs[j], idxs[pick]);
          faults.insert(statements[idxs[j]].id);
        }
      }
      if (faults.empty()) {
        // Force one fault, type-weighted like the per-statement draw.
        double total = 0.0;
        for (const auto& [label, idxs] : by_type)
          total += fault_prob[label] * static_cast<double>(idxs.size());
        double u = rng.next_double() * total;
        for (const auto& [label, idxs] : by_type) {
          u -= fault_prob[label] * static_cast<double>(idxs.size());
          if (u < 0.0 || label == by_type.rbegin()->first) {
            faults.insert(statements[idxs[rng.next_below(idxs.size())]].id);
            break;
          }
        }
      }

      const int n_tests = cfg.tests_per_version;
      int n_failed = static_cast<int>(
          std::lround(cfg.fail_fraction * static_cast<double>(n_tests)));
      if (n_failed < 1) n_failed = 1;
      if (n_failed > n_tests) n_failed = n_tests;

      std::vector<TestRecord> tests;
      tests.reserve(n_tests);
      for (int t = 0; t < n_tests; ++t)
        tests.push_back({detail::padded_id("t", t + 1, n_tests),
                         t < n_failed ? Outcome::Failed : Outcome::Passed});

      std::vector<CoverageSpectrum::CoveredPair> covered;
      std::set<std::string> failed_covered;
      for (int t = 0; t < n_tests; ++t) {
        const bool failed = t < n_failed;
        for (int i = 0; i < n_stmts; ++i) {
          const bool faulty = faults.count(statements[i].id) != 0;
          const double prob = (failed && faulty) ? cfg.failed_cover_fault_prob
                                                 : cfg.coverage_density;
          if (rng.chance(prob)) {
            covered.emplace_back(tests[t].test_id, statements[i].id);
            if (failed && faulty) failed_covered.insert(statements[i].id);
          }
        }
      }
      // Every fault must be suspicious: force a failed covering test where
      // the draws missed.
      for (const std::string& fault : faults)
        if (!failed_covered.count(fault))
          covered.emplace_back(tests[0].test_id, fault);

      FaultyVersion version{
          project.project_id,
          detail::padded_id("v", v, cfg.versions_per_project),
          CoverageSpectrum(std::move(statements), std::move(tests), covered),
          std::move(faults)};
      project.versions.push_back(std::move(version));
    }
    repo.projects.push_back(std::move(project));
  }
  return repo;
}

}  // namespace hybridfl
