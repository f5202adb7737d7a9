#pragma once

// Online localization: scores the suspicious statements of one faulty
// version and orders them. The hybrid key is the SBFL score multiplied by
// the statement type's priority weight; the other modes exist to compare
// against single-source and multi-level (lexicographic) sorting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hybridfl/core.hpp"
#include "hybridfl/priority.hpp"
#include "hybridfl/sbfl.hpp"

namespace hybridfl {

enum class SortingMode {
  Hybrid,                   // base * priority
  SbflOnly,                 // base
  PriorityOnly,             // priority
  MultiLevelSbflFirst,      // (base, priority) lexicographic
  MultiLevelPriorityFirst,  // (priority, base) lexicographic
};

// How tied keys map to rank numbers. Tied entries stay ordered by
// statement id; their rank is the mean (MidRank), last (WorstRank), or
// first (BestRank) of the positions the tie group spans.
enum class TiePolicy { MidRank, WorstRank, BestRank };

struct RankedEntry {
  std::string statement_id;
  std::string type_label;
  double base_score = 0.0;
  double priority = 1.0;
  double adjusted_score = 0.0;  // base_score * priority
  double rank = 0.0;            // 1-based; fractional under MidRank
};

struct ScoredStatement {
  std::string statement_id;
  std::string type_label;
  double base_score = 0.0;
};

namespace detail {

inline double quantize(double value, int digits) {
  if (digits > 18) return value;  // beyond double precision, a no-op
  const double scale = std::pow(10.0, digits);
  return std::round(value * scale) / scale;
}

}  // namespace detail

// Ranks pre-scored statements. Keys compare exactly (bitwise double
// equality defines a tie); quantize_digits >= 0 rounds the first-level key
// of the two multi-level modes to that many decimal digits so near-ties
// become ties, and is ignored in the other modes.
inline std::vector<RankedEntry> rank_scored(const std::vector<ScoredStatement>& scored,
                                            const PriorityModel& model, SortingMode mode,
                                            TiePolicy ties = TiePolicy::MidRank,
                                            int quantize_digits = -1) {
  struct Keyed {
    double k1 = 0.0;
    double k2 = 0.0;
    RankedEntry entry;
  };

  std::vector<Keyed> items;
  items.reserve(scored.size());
  for (const ScoredStatement& s : scored) {
    Keyed k;
    k.entry.statement_id = s.statement_id;
    k.entry.type_label = s.type_label;
    k.entry.base_score = s.base_score;
    k.entry.priority = model.weight(s.type_label);
    k.entry.adjusted_score = k.entry.base_score * k.entry.priority;
    switch (mode) {
      case SortingMode::Hybrid:
        k.k1 = k.entry.adjusted_score;
        break;
      case SortingMode::SbflOnly:
        k.k1 = k.entry.base_score;
        break;
      case SortingMode::PriorityOnly:
        k.k1 = k.entry.priority;
        break;
      case SortingMode::MultiLevelSbflFirst:
        k.k1 = quantize_digits >= 0 ? detail::quantize(k.entry.base_score, quantize_digits)
                                    : k.entry.base_score;
        k.k2 = k.entry.priority;
        break;
      case SortingMode::MultiLevelPriorityFirst:
        k.k1 = quantize_digits >= 0 ? detail::quantize(k.entry.priority, quantize_digits)
                                    : k.entry.priority;
        k.k2 = k.entry.base_score;
        break;
    }
    items.push_back(std::move(k));
  }

  std::sort(items.begin(), items.end(), [](const Keyed& a, const Keyed& b) {
    if (a.k1 != b.k1) return a.k1 > b.k1;
    if (a.k2 != b.k2) return a.k2 > b.k2;
    return a.entry.statement_id < b.entry.statement_id;
  });

  std::vector<RankedEntry> out;
  out.reserve(items.size());
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j + 1 < items.size() && items[j + 1].k1 == items[i].k1 &&
           items[j + 1].k2 == items[i].k2)
      ++j;
    double rank = 0.0;
    switch (ties) {
      case TiePolicy::MidRank:
        rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        break;
      case TiePolicy::WorstRank:
        rank = static_cast<double>(j + 1);
        break;
      case TiePolicy::BestRank:
        rank = static_cast<double>(i + 1);
        break;
    }
    for (std::size_t k = i; k <= j; ++k) {
      items[k].entry.rank = rank;
      out.push_back(std::move(items[k].entry));
    }
    i = j + 1;
  }
  return out;
}

/// Ranks the suspicious statements of one version. Returns an empty list
/// when no statement is covered by a failed test.
inline std::vector<RankedEntry> rank(const FaultyVersion& version, const FormulaId& formula,
                                     const PriorityModel& model, SortingMode mode,
                                     TiePolicy ties = TiePolicy::MidRank,
                                     int quantize_digits = -1) {
  const CoverageSpectrum& spectrum = version.spectrum;
  std::vector<ScoredStatement> scored;
  for (std::size_t idx : spectrum.suspicious_indices()) {
    const StatementInfo& s = spectrum.statements()[idx];
    scored.push_back({s.id, s.type_label, score(formula, spectrum.tally_at(idx))});
  }
  return rank_scored(scored, model, mode, ties, quantize_digits);
}

inline const char* to_string(SortingMode mode) {
  switch (mode) {
    case SortingMode::Hybrid: return "hybrid";
    case SortingMode::SbflOnly: return "sbfl-only";
    case SortingMode::PriorityOnly: return "priority-only";
    case SortingMode::MultiLevelSbflFirst: return "ml-sbfl-first";
    case SortingMode::MultiLevelPriorityFirst: return "ml-priority-first";
  }
  return "?";
}

inline SortingMode parse_sorting_mode(const std::string& text) {
  if (text == "hybrid") return SortingMode::Hybrid;
  if (text == "sbfl-only") return SortingMode::SbflOnly;
  if (text == "priority-only") return SortingMode::PriorityOnly;
  if (text == "ml-sbfl-first") return SortingMode::MultiLevelSbflFirst;
  if (text == "ml-priority-first") return SortingMode::MultiLevelPriorityFirst;
  throw std::invalid_argument("unknown sorting mode: " + text);
}

inline const char* to_string(TiePolicy ties) {
  switch (ties) {
    case TiePolicy::MidRank: return "mid";
    case TiePolicy::WorstRank: return "worst";
    case TiePolicy::BestRank: return "best";
  }
  return "?";
}

inline TiePolicy parse_tie_policy(const std::string& text) {
  if (text == "mid") return TiePolicy::MidRank;
  if (text == "worst") return TiePolicy::WorstRank;
  if (text == "best") return TiePolicy::BestRank;
  throw std::invalid_argument("unknown tie policy: " + text);
}

}  // namespace hybridfl
