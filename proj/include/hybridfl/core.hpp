#pragma once

// In-memory model of a faulty program version: statements carrying type
// labels, tests with pass/fail outcomes, and the sparse coverage relation
// between them. Everything is immutable after construction and safe to
// share read-only across threads.

#include <algorithm>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hybridfl {

enum class Outcome { Passed, Failed };

struct StatementInfo {
  std::string id;
  std::string file;
  int line_start = 1;
  int line_end = 1;
  std::string type_label;
};

struct TestRecord {
  std::string test_id;
  Outcome outcome = Outcome::Passed;
};

// Coverage counts for one statement: cf/cp are the failed/passed tests
// covering it, uf/up the failed/passed tests not covering it.
struct Tally {
  long cf = 0;
  long cp = 0;
  long uf = 0;
  long up = 0;

  friend bool operator==(const Tally&, const Tally&) = default;
};

// Test-by-statement coverage relation for one faulty version.
//
// Construction validates statement/test id uniqueness, line ranges, and
// referential integrity of the coverage pairs; duplicate pairs collapse to
// one. A spectrum with zero failed tests is representable here (ingestion
// is where such versions get rejected).
class CoverageSpectrum {
 public:
  // (test_id, statement_id)
  using CoveredPair = std::pair<std::string, std::string>;

  CoverageSpectrum(std::vector<StatementInfo> statements,
                   std::vector<TestRecord> tests,
                   const std::vector<CoveredPair>& covered)
      : statements_(std::move(statements)), tests_(std::move(tests)) {
    stmt_index_.reserve(statements_.size());
    for (std::size_t i = 0; i < statements_.size(); ++i) {
      const StatementInfo& s = statements_[i];
      if (s.id.empty()) throw std::invalid_argument("statement with empty id");
      if (s.type_label.empty())
        throw std::invalid_argument("statement " + s.id + " has empty type label");
      if (s.line_start < 1 || s.line_end < s.line_start)
        throw std::invalid_argument("statement " + s.id + " has bad line range");
      if (!stmt_index_.emplace(s.id, i).second)
        throw std::invalid_argument("duplicate statement id " + s.id);
    }
    test_index_.reserve(tests_.size());
    for (std::size_t i = 0; i < tests_.size(); ++i) {
      const TestRecord& t = tests_[i];
      if (t.test_id.empty()) throw std::invalid_argument("test with empty id");
      if (!test_index_.emplace(t.test_id, i).second)
        throw std::invalid_argument("duplicate test id " + t.test_id);
      if (t.outcome == Outcome::Failed)
        ++failed_total_;
      else
        ++passed_total_;
    }

    covered_.reserve(covered.size());
    for (const auto& [test_id, stmt_id] : covered) {
      auto t = test_index_.find(test_id);
      if (t == test_index_.end())
        throw std::invalid_argument("coverage pair references unknown test " + test_id);
      auto s = stmt_index_.find(stmt_id);
      if (s == stmt_index_.end())
        throw std::invalid_argument("coverage pair references unknown statement " + stmt_id);
      covered_.emplace_back(t->second, s->second);
    }
    std::sort(covered_.begin(), covered_.end());
    covered_.erase(std::unique(covered_.begin(), covered_.end()), covered_.end());

    tallies_.resize(statements_.size());
    for (Tally& t : tallies_) {
      t.uf = failed_total_;
      t.up = passed_total_;
    }
    for (const auto& [ti, si] : covered_) {
      if (tests_[ti].outcome == Outcome::Failed) {
        ++tallies_[si].cf;
        --tallies_[si].uf;
      } else {
        ++tallies_[si].cp;
        --tallies_[si].up;
      }
    }
  }

  const std::vector<StatementInfo>& statements() const { return statements_; }
  const std::vector<TestRecord>& tests() const { return tests_; }

  // Deduplicated coverage pairs as (test index, statement index), sorted.
  const std::vector<std::pair<std::size_t, std::size_t>>& covered_index_pairs() const {
    return covered_;
  }

  long failed_test_count() const { return failed_total_; }
  long passed_test_count() const { return passed_total_; }

  bool has_statement(const std::string& id) const { return stmt_index_.count(id) != 0; }

  std::size_t index_of(const std::string& stmt_id) const {
    auto it = stmt_index_.find(stmt_id);
    if (it == stmt_index_.end())
      throw std::out_of_range("unknown statement id " + stmt_id);
    return it->second;
  }

  const StatementInfo& statement(const std::string& stmt_id) const {
    return statements_[index_of(stmt_id)];
  }

  Tally tally_at(std::size_t index) const { return tallies_.at(index); }

  /// CF/CP/UF/UP counts for one statement. Throws std::out_of_range for an
  /// unknown id.
  Tally tally(const std::string& stmt_id) const { return tallies_[index_of(stmt_id)]; }

  // Statements covered by at least one failed test, in statement order.
  // Computed from the raw coverage relation, not from the tallies.
  std::vector<std::size_t> suspicious_indices() const {
    std::vector<char> hit(statements_.size(), 0);
    for (const auto& [ti, si] : covered_)
      if (tests_[ti].outcome == Outcome::Failed) hit[si] = 1;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < hit.size(); ++i)
      if (hit[i]) out.push_back(i);
    return out;
  }

  std::set<std::string> suspicious_set() const {
    std::set<std::string> out;
    for (std::size_t i : suspicious_indices()) out.insert(statements_[i].id);
    return out;
  }

 private:
  std::vector<StatementInfo> statements_;
  std::vector<TestRecord> tests_;
  std::vector<std::pair<std::size_t, std::size_t>> covered_;
  std::vector<Tally> tallies_;
  std::unordered_map<std::string, std::size_t> stmt_index_;
  std::unordered_map<std::string, std::size_t> test_index_;
  long failed_total_ = 0;
  long passed_total_ = 0;
};

// One faulty version: a spectrum plus the statements the fixing patch
// deleted or modified. fault_labels must reference statements present in
// the spectrum; ingestion guarantees they are nonempty.
struct FaultyVersion {
  std::string project_id;
  std::string version_id;
  CoverageSpectrum spectrum;
  std::set<std::string> fault_labels;
};

struct ProjectVersions {
  std::string project_id;
  std::vector<FaultyVersion> versions;
};

struct FaultRepository {
  std::vector<ProjectVersions> projects;

  std::size_t version_count() const {
    std::size_t n = 0;
    for (const ProjectVersions& p : projects) n += p.versions.size();
    return n;
  }
};

}  // namespace hybridfl
