#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "hybridfl/eval.hpp"
#include "hybridfl/prng.hpp"
#include "hybridfl/synth.hpp"
#include "test_helpers.hpp"

using namespace hybridfl;
using namespace testutil;

namespace {

// 4 If + 4 Expression statements, one fault in each type: AP(type) equals
// the project AP exactly, so every RP is exactly 1 and no type can be
// selected. Passed-test coverage varies with the seed so base scores still
// differ across statements.
FaultyVersion uniform_version(const std::string& project, const std::string& version,
                              std::uint64_t seed) {
  std::vector<StatementInfo> statements;
  std::vector<std::pair<std::string, std::string>> covered;
  for (int i = 0; i < 8; ++i) {
    const std::string id = "s" + std::to_string(i + 1);
    statements.push_back(stmt(id, i < 4 ? "If" : "Expression", i + 1));
    covered.emplace_back("f1", id);
    covered.emplace_back("f2", id);
  }
  std::vector<TestRecord> tests = {failed("f1"), failed("f2"), passed("p1"), passed("p2"),
                                   passed("p3")};
  SplitMix64 rng(seed);
  for (int t = 0; t < 3; ++t)
    for (int i = 0; i < 8; ++i)
      if (rng.chance(0.45))
        covered.emplace_back("p" + std::to_string(t + 1), "s" + std::to_string(i + 1));
  return FaultyVersion{project, version,
                       spectrum(std::move(statements), std::move(tests), std::move(covered)),
                       {"s1", "s5"}};
}

FaultRepository uniform_repo(int n_projects, int versions_each) {
  FaultRepository repo;
  std::uint64_t seed = 1;
  for (int p = 1; p <= n_projects; ++p) {
    ProjectVersions project;
    project.project_id = "p" + std::to_string(p);
    for (int v = 1; v <= versions_each; ++v)
      project.versions.push_back(
          uniform_version(project.project_id, "v" + std::to_string(v), seed++));
    repo.projects.push_back(std::move(project));
  }
  return repo;
}

std::vector<RankedEntry> ranked_from_scores(std::vector<std::pair<std::string, double>> scores) {
  std::vector<ScoredStatement> scored;
  for (auto& [id, s] : scores) scored.push_back({id, "If", s});
  return rank_scored(scored, PriorityModel::all_ones(), SortingMode::SbflOnly);
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("awe is the position of the best-ranked faulty statement") {
  const auto ranked = ranked_from_scores({{"s3", 0.9}, {"s1", 0.5}, {"s2", 0.1}});
  CHECK(awe(ranked, {"s1"}) == 2.0);
  CHECK(awe(ranked, {"s3"}) == 1.0);
  CHECK(awe(ranked, {"s1", "s2"}) == 2.0);  // min over faults
}

TEST_CASE("a full tie gives the mid rank (n+1)/2") {
  const auto ranked = ranked_from_scores(
      {{"s1", 0.5}, {"s2", 0.5}, {"s3", 0.5}, {"s4", 0.5}, {"s5", 0.5}});
  CHECK(awe(ranked, {"s2"}) == 3.0);
}

TEST_CASE("faults outside the ranked list are unlocatable") {
  const auto ranked = ranked_from_scores({{"s1", 0.9}});
  CHECK_FALSE(awe(ranked, {"ghost"}).has_value());
  CHECK(awe(ranked, {"ghost", "s1"}) == 1.0);  // one covered fault suffices
  CHECK_THROWS_AS(awe(ranked, {}), std::invalid_argument);
}

TEST_CASE("moving a fault strictly earlier never worsens awe") {
  SplitMix64 rng(55);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::pair<std::string, double>> scores;
    for (int i = 0; i < 12; ++i)
      scores.emplace_back("s" + std::to_string(i + 1), rng.next_double());
    const double before = *awe(ranked_from_scores(scores), {"s1"});
    scores[0].second += rng.next_double();  // bump the fault's score
    const double after = *awe(ranked_from_scores(scores), {"s1"});
    CHECK(after <= before);
  }
}

TEST_CASE("take-one-out on a uniform corpus: hybrid equals sbfl-only exactly") {
  const FaultRepository repo = uniform_repo(2, 6);
  const auto hybrid = take_one_out(repo, FormulaId::ochiai(), SortingMode::Hybrid);
  const auto sbfl = take_one_out(repo, FormulaId::ochiai(), SortingMode::SbflOnly);

  // Every RP is exactly 1, so no type is selected and the model is all ones.
  REQUIRE(hybrid.results.size() == sbfl.results.size());
  CHECK(hybrid.overall_awe == sbfl.overall_awe);
  for (std::size_t i = 0; i < hybrid.results.size(); ++i) {
    CHECK(hybrid.results[i].version_id == sbfl.results[i].version_id);
    CHECK(hybrid.results[i].awe == sbfl.results[i].awe);
  }
}

TEST_CASE("take-one-out matches the composed per-fold pipeline") {
  SynthConfig cfg;
  cfg.seed = 77;
  cfg.n_projects = 3;
  cfg.versions_per_project = 5;
  cfg.statements_per_version = 30;
  cfg.tests_per_version = 8;
  cfg.type_mix = {{"If", 1.0 / 3}, {"Expression", 2.0 / 3}};
  cfg.planted_rp = {{"If", 2.0}, {"Expression", 0.5}};
  const FaultRepository repo = generate(cfg);

  const auto report = take_one_out(repo, FormulaId::ochiai(), SortingMode::Hybrid);

  double overall = 0.0;
  std::size_t n_results = 0;
  for (std::size_t fold = 0; fold < repo.projects.size(); ++fold) {
    FaultRepository training;
    for (std::size_t p = 0; p < repo.projects.size(); ++p)
      if (p != fold) training.projects.push_back(repo.projects[p]);
    const PriorityModel model =
        detail::learn_from_stats(collect_type_stats(training), LearnerConfig{});
    for (const FaultyVersion& version : repo.projects[fold].versions) {
      const auto ranked =
          rank(version, FormulaId::ochiai(), model, SortingMode::Hybrid);
      const auto located = locate_fault(ranked, version.fault_labels);
      REQUIRE(located.has_value());
      overall += located->awe;
      ++n_results;
    }
  }
  CHECK(report.results.size() == n_results);
  CHECK(report.overall_awe == overall);
}

TEST_CASE("fold results are independent of project order and worker count") {
  SynthConfig cfg;
  cfg.seed = 99;
  cfg.n_projects = 4;
  cfg.versions_per_project = 4;
  cfg.statements_per_version = 24;
  cfg.tests_per_version = 6;
  const FaultRepository repo = generate(cfg);

  FaultRepository reversed = repo;
  std::reverse(reversed.projects.begin(), reversed.projects.end());

  const auto a = take_one_out(repo, FormulaId::ochiai(), SortingMode::Hybrid,
                              LearnerConfig{}, TiePolicy::MidRank, 1);
  const auto b = take_one_out(repo, FormulaId::ochiai(), SortingMode::Hybrid,
                              LearnerConfig{}, TiePolicy::MidRank, 4);
  const auto c = take_one_out(reversed, FormulaId::ochiai(), SortingMode::Hybrid,
                              LearnerConfig{}, TiePolicy::MidRank, 2);

  CHECK(a.overall_awe == b.overall_awe);
  CHECK(a.per_project_awe == b.per_project_awe);
  CHECK(a.per_project_awe == c.per_project_awe);
  REQUIRE(a.results.size() == b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    CHECK(a.results[i].awe == b.results[i].awe);
    CHECK(a.results[i].fault_statement == b.results[i].fault_statement);
  }
}

TEST_CASE("take-one-out requires two projects") {
  FaultRepository repo;
  repo.projects.push_back({"only", {uniform_version("only", "v1", 1)}});
  CHECK_THROWS_AS(take_one_out(repo, FormulaId::ochiai(), SortingMode::Hybrid),
                  std::invalid_argument);
}

TEST_CASE("folds with degenerate training data are skipped with a warning") {
  // Project "dead" has faults that no failed test covers: its stats are
  // empty, so the fold holding out "live" cannot train and is skipped.
  auto sp = spectrum({stmt("s1", "If"), stmt("s2", "If", 2)},
                     {failed("t1"), passed("t2")}, {{"t1", "s1"}, {"t2", "s2"}});
  FaultRepository repo;
  repo.projects.push_back({"dead", {FaultyVersion{"dead", "v1", std::move(sp), {"s2"}}}});
  repo.projects.push_back({"live", {uniform_version("live", "v1", 3)}});

  const auto report = take_one_out(repo, FormulaId::ochiai(), SortingMode::Hybrid);
  REQUIRE(report.skipped_folds.size() == 1);
  CHECK(report.skipped_folds[0] == "live");
  // The "dead" fold still evaluates (training on "live" works), but its
  // version is unlocatable.
  REQUIRE(report.unlocatable.size() == 1);
  CHECK(report.unlocatable[0] == "dead/v1");
  CHECK(report.results.empty());
}

TEST_CASE("comparison pairs versions and computes reductions") {
  EvalReport baseline;
  EvalReport treatment;
  auto add = [](EvalReport& r, const std::string& project, const std::string& version,
                double awe_value, const std::string& type) {
    AweResult a;
    a.project_id = project;
    a.version_id = version;
    a.awe = awe_value;
    a.fault_type = type;
    r.results.push_back(a);
    r.per_project_awe[project] += awe_value;
    r.overall_awe += awe_value;
  };
  add(baseline, "p1", "v1", 10.0, "If");
  add(baseline, "p1", "v2", 6.0, "If");
  add(baseline, "p2", "v1", 4.0, "Expression");
  add(treatment, "p1", "v1", 5.0, "If");
  add(treatment, "p1", "v2", 6.0, "If");
  add(treatment, "p2", "v1", 5.0, "Expression");

  const Comparison cmp = compare_reports(baseline, treatment);
  CHECK(cmp.paired_versions == 3);
  CHECK(cmp.baseline_overall == 20.0);
  CHECK(cmp.treatment_overall == 16.0);
  CHECK(cmp.relative_reduction == doctest::Approx(0.2));
  CHECK(cmp.per_project_reduction.at("p1") == doctest::Approx(1.0 - 11.0 / 16.0));
  CHECK(cmp.per_project_reduction.at("p2") == doctest::Approx(1.0 - 5.0 / 4.0));

  REQUIRE(cmp.per_type.size() == 2);
  CHECK(cmp.per_type[0].type_label == "If");
  CHECK(cmp.per_type[0].improved == 1);
  CHECK(cmp.per_type[0].decreased == 0);
  CHECK(cmp.per_type[0].draws == 1);
  CHECK(cmp.per_type[0].chance_improvement() == doctest::Approx(0.5));
  CHECK(cmp.per_type[1].type_label == "Expression");
  CHECK(cmp.per_type[1].decreased == 1);
  CHECK(cmp.per_type[1].chance_reduction() == doctest::Approx(1.0));

  // Mismatched version sets are a pairing error.
  add(treatment, "p3", "v1", 2.0, "If");
  CHECK_THROWS_AS(compare_reports(baseline, treatment), std::invalid_argument);
}

TEST_CASE("tie policies bracket the mid-rank AWE") {
  SynthConfig cfg;
  cfg.seed = 1234;
  cfg.n_projects = 2;
  cfg.versions_per_project = 8;
  cfg.statements_per_version = 30;
  cfg.tests_per_version = 6;
  cfg.coverage_density = 0.9;  // dense coverage, plenty of ties
  const FaultRepository repo = generate(cfg);

  const auto mid = take_one_out(repo, FormulaId::ochiai(), SortingMode::SbflOnly,
                                LearnerConfig{}, TiePolicy::MidRank);
  const auto worst = take_one_out(repo, FormulaId::ochiai(), SortingMode::SbflOnly,
                                  LearnerConfig{}, TiePolicy::WorstRank);
  const auto best = take_one_out(repo, FormulaId::ochiai(), SortingMode::SbflOnly,
                                 LearnerConfig{}, TiePolicy::BestRank);
  REQUIRE(mid.results.size() == worst.results.size());
  REQUIRE(mid.results.size() == best.results.size());
  for (std::size_t i = 0; i < mid.results.size(); ++i) {
    CHECK(best.results[i].awe <= mid.results[i].awe);
    CHECK(mid.results[i].awe <= worst.results[i].awe);
  }
}

TEST_CASE("planted skew: hybrid beats sbfl-only on a synthetic corpus") {
  SynthConfig cfg;
  cfg.seed = 2025;
  cfg.n_projects = 3;
  cfg.versions_per_project = 12;
  cfg.statements_per_version = 60;
  cfg.tests_per_version = 12;
  cfg.fail_fraction = 0.4;
  cfg.coverage_density = 0.85;
  cfg.fault_rate = 0.08;
  cfg.type_mix = {{"If", 1.0 / 3}, {"Expression", 2.0 / 3}};
  cfg.planted_rp = {{"If", 2.0}, {"Expression", 0.5}};
  const FaultRepository repo = generate(cfg);

  const auto hybrid = take_one_out(repo, FormulaId::ochiai(), SortingMode::Hybrid);
  const auto sbfl = take_one_out(repo, FormulaId::ochiai(), SortingMode::SbflOnly);
  CHECK(hybrid.overall_awe < sbfl.overall_awe);
}

TEST_SUITE_END();
