#pragma once

// On-disk corpus handling: loading and validating the fault-repository
// layout, the dataset filters (minimum defects per project, insert-only
// patch exclusion), fault-label extraction from unified diffs via a
// line-to-statement map, and the priority-model / ranked-list file formats.
//
// Corpus layout (all files UTF-8, LF):
//   root/manifest.json
//   root/<project>/<version>/statements.csv   statement_id,file,line_start,line_end,type_label
//                            tests.csv        test_id,outcome      (pass|fail)
//                            coverage.csv     test_id,statement_id
//                            faults.csv       statement_id
//                         or patch.diff + linemap.csv  file,line_start,line_end,statement_id
//
// When both faults.csv and patch.diff exist, faults.csv wins; a warning is
// recorded if the diff disagrees.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hybridfl/core.hpp"
#include "hybridfl/parallel.hpp"
#include "hybridfl/priority.hpp"
#include "hybridfl/ranking.hpp"

namespace hybridfl {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DiffParseError : public std::runtime_error {
 public:
  DiffParseError(const std::string& message, int line)
      : std::runtime_error(message + " (diff line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class DiagCode {
  MissingFile,
  BadFormat,
  DuplicateId,
  ReferentialIntegrity,
  NoFailedTest,
  EmptyFaultLabels,
  InsertOnlyPatch,
  BelowMinDefects,
  FaultsDiffMismatch,
  UnmappedDeletedLine,
  DegenerateProject,
};

inline const char* diag_code_name(DiagCode code) {
  switch (code) {
    case DiagCode::MissingFile: return "missing-file";
    case DiagCode::BadFormat: return "bad-format";
    case DiagCode::DuplicateId: return "duplicate-id";
    case DiagCode::ReferentialIntegrity: return "referential-integrity";
    case DiagCode::NoFailedTest: return "no-failed-test";
    case DiagCode::EmptyFaultLabels: return "empty-fault-labels";
    case DiagCode::InsertOnlyPatch: return "insert-only-patch";
    case DiagCode::BelowMinDefects: return "below-min-defects";
    case DiagCode::FaultsDiffMismatch: return "faults-diff-mismatch";
    case DiagCode::UnmappedDeletedLine: return "unmapped-deleted-line";
    case DiagCode::DegenerateProject: return "degenerate-project";
  }
  return "?";
}

struct Diagnostic {
  DiagCode code;
  std::string project_id;
  std::string version_id;  // empty for project-level diagnostics
  std::string detail;
  bool rejected = false;  // true: the version/project was dropped

  std::string to_string() const {
    std::string where = project_id;
    if (!version_id.empty()) where += "/" + version_id;
    return std::string(rejected ? "rejected" : "warning") + " [" +
           diag_code_name(code) + "] " + where + ": " + detail;
  }
};

// Filter policy carried by the manifest; unset fields fall back to the
// defaults (min 30 defects per project, insert-only patches excluded).
struct CorpusFilterPolicy {
  std::optional<int> min_defects_per_project;
  std::optional<bool> exclude_insert_only;
};

// Caller-side overrides; these win over the manifest values.
struct LoadOptions {
  std::optional<int> min_defects;
  std::optional<bool> exclude_insert_only;
  unsigned jobs = 0;  // version-loading workers, 0 = all cores
};

struct LoadReport {
  std::vector<Diagnostic> diagnostics;
  std::size_t loaded_projects = 0;
  std::size_t loaded_versions = 0;
  std::size_t rejected_versions = 0;
  std::size_t excluded_projects = 0;

  bool has_rejections() const { return rejected_versions > 0 || excluded_projects > 0; }
};

struct LoadResult {
  FaultRepository repo;
  CorpusFilterPolicy manifest_policy;
  LoadReport report;
};

// Maps source lines to statement ids, per file. Lookup returns every
// statement whose range contains the line; overlapping ranges are allowed
// (nested statements are a fact of real line maps) and all matches count.
class LineMap {
 public:
  struct Span {
    int line_start = 1;
    int line_end = 1;
    std::string statement_id;
  };

  void add(const std::string& file, Span span) { files_[file].push_back(std::move(span)); }

  std::vector<std::string> statements_at(const std::string& file, int line) const {
    std::vector<std::string> out;
    auto it = files_.find(file);
    if (it == files_.end()) return out;
    for (const Span& span : it->second)
      if (line >= span.line_start && line <= span.line_end)
        out.push_back(span.statement_id);
    return out;
  }

  bool empty() const { return files_.empty(); }
  const std::map<std::string, std::vector<Span>>& files() const { return files_; }

 private:
  std::map<std::string, std::vector<Span>> files_;
};

struct DiffFaults {
  std::set<std::string> statements;
  std::vector<std::string> warnings;  // deleted lines outside every mapped range
  int deleted_lines = 0;              // 0 means the patch only inserts
};

namespace detail {

inline bool starts_with(std::string_view text, std::string_view prefix) {
  return text.substr(0, prefix.size()) == prefix;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

// "a/src/Foo.java\t2020-01-01 ..." -> "src/Foo.java"
inline std::string diff_path(std::string_view raw) {
  const std::size_t tab = raw.find('\t');
  if (tab != std::string_view::npos) raw = raw.substr(0, tab);
  if (starts_with(raw, "a/") || starts_with(raw, "b/")) raw = raw.substr(2);
  return std::string(raw);
}

inline bool parse_long(std::string_view text, long& out) {
  if (text.empty()) return false;
  long value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

// "@@ -12,3 +12,4 @@ context" -> old start/count, new count. Omitted counts
// default to 1.
inline bool parse_hunk_header(std::string_view line, long& old_start, long& old_count,
                              long& new_count) {
  if (!starts_with(line, "@@ -")) return false;
  std::string_view rest = line.substr(4);
  const std::size_t space = rest.find(' ');
  if (space == std::string_view::npos) return false;
  std::string_view old_part = rest.substr(0, space);
  rest = rest.substr(space + 1);
  if (rest.empty() || rest[0] != '+') return false;
  rest = rest.substr(1);
  const std::size_t end = rest.find(" @@");
  if (end == std::string_view::npos) return false;
  std::string_view new_part = rest.substr(0, end);

  auto parse_range = [](std::string_view part, long& start, long& count) {
    const std::size_t comma = part.find(',');
    if (comma == std::string_view::npos) {
      count = 1;
      return parse_long(part, start);
    }
    return parse_long(part.substr(0, comma), start) &&
           parse_long(part.substr(comma + 1), count);
  };

  long new_start = 0;
  return parse_range(old_part, old_start, old_count) &&
         parse_range(new_part, new_start, new_count);
}

}  // namespace detail

/// Extracts fault labels from a unified diff: every statement whose line
/// range intersects a deleted line ('-' line) of the old file. A paired
/// delete+add shows up as a '-' line, so modifications are covered; pure
/// insertions contribute nothing. Deleted lines outside every mapped range
/// are skipped with a warning. Throws DiffParseError on malformed hunks.
inline DiffFaults faults_from_diff(std::string_view diff_text, const LineMap& map) {
  DiffFaults out;
  std::string current_file;
  bool have_file = false;
  long old_line = 0;
  long old_left = 0;
  long new_left = 0;
  int lineno = 0;

  for (std::string_view line : detail::split_lines(diff_text)) {
    ++lineno;

    if (old_left > 0 || new_left > 0) {
      const char c = line.empty() ? ' ' : line[0];
      switch (c) {
        case ' ':
          if (old_left <= 0 || new_left <= 0)
            throw DiffParseError("context line past hunk length", lineno);
          --old_left;
          --new_left;
          ++old_line;
          break;
        case '-':
          if (old_left <= 0)
            throw DiffParseError("deleted line past hunk length", lineno);
          {
            ++out.deleted_lines;
            const auto ids = map.statements_at(current_file, static_cast<int>(old_line));
            if (ids.empty())
              out.warnings.push_back(current_file + ":" + std::to_string(old_line) +
                                     ": deleted line maps to no statement, skipped");
            for (const std::string& id : ids) out.statements.insert(id);
          }
          ++old_line;
          --old_left;
          break;
        case '+':
          if (new_left <= 0)
            throw DiffParseError("added line past hunk length", lineno);
          --new_left;
          break;
        case '\\':  // "\ No newline at end of file"
          break;
        default:
          throw DiffParseError("unexpected line in hunk body", lineno);
      }
      continue;
    }

    if (detail::starts_with(line, "--- ")) {
      current_file = detail::diff_path(line.substr(4));
      have_file = true;
    } else if (detail::starts_with(line, "+++ ")) {
      // Labels come from the old side only.
    } else if (detail::starts_with(line, "@@")) {
      long old_start = 0;
      if (!detail::parse_hunk_header(line, old_start, old_left, new_left))
        throw DiffParseError("malformed hunk header", lineno);
      if (!have_file)
        throw DiffParseError("hunk before any file header", lineno);
      old_line = old_start;
    }
    // Anything else between hunks (diff --git, index, mode lines) is noise.
  }

  if (old_left > 0 || new_left > 0)
    throw DiffParseError("diff ends inside a hunk", lineno);
  return out;
}

namespace detail {

// Versions are rejected one at a time; this carries the reason up to the
// loader without aborting the whole corpus.
struct VersionReject {
  DiagCode code;
  std::string detail;
};

inline std::string read_file_or_reject(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VersionReject{DiagCode::MissingFile, path.filename().string() + " missing"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

inline std::vector<std::string> split_csv_row(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  for (;;) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(pos));
      return fields;
    }
    fields.emplace_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

// Header-checked CSV with a fixed column count. Values must not contain
// commas; a row with the wrong field count is a format error.
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                                      std::string_view expected_header,
                                                      std::size_t columns) {
  const std::string text = read_file_or_reject(path);
  const auto lines = split_lines(text);
  const std::string name = path.filename().string();
  if (lines.empty() || lines[0] != expected_header)
    throw VersionReject{DiagCode::BadFormat,
                        name + ": expected header '" + std::string(expected_header) + "'"};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;  // tolerate a trailing blank line
    auto fields = split_csv_row(lines[i]);
    if (fields.size() != columns)
      throw VersionReject{DiagCode::BadFormat, name + " line " + std::to_string(i + 1) +
                                                   ": expected " + std::to_string(columns) +
                                                   " fields"};
    for (const std::string& f : fields)
      if (f.empty())
        throw VersionReject{DiagCode::BadFormat,
                            name + " line " + std::to_string(i + 1) + ": empty field"};
    rows.push_back(std::move(fields));
  }
  return rows;
}

inline int parse_line_number(const std::string& text, const std::string& context) {
  long v = 0;
  if (!parse_long(text, v) || v < 1 || v > 1'000'000'000)
    throw VersionReject{DiagCode::BadFormat, context + ": bad line number '" + text + "'"};
  return static_cast<int>(v);
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) return buf;
  }
  return buf;
}

struct VersionOutcome {
  std::optional<FaultyVersion> version;  // empty when the version was rejected
  std::vector<Diagnostic> diagnostics;
};

// Loads and validates one version directory. Rejections become diagnostics
// on the outcome, never exceptions.
inline VersionOutcome load_version_dir(const std::filesystem::path& dir,
                                       const std::string& project_id,
                                       const std::string& version_id,
                                       bool exclude_insert_only) {
  namespace fs = std::filesystem;
  VersionOutcome out;
  try {
    std::vector<StatementInfo> statements;
    std::set<std::string> stmt_ids;
    for (auto& row : read_csv(dir / "statements.csv",
                              "statement_id,file,line_start,line_end,type_label", 5)) {
      StatementInfo s;
      s.id = std::move(row[0]);
      s.file = std::move(row[1]);
      s.line_start = parse_line_number(row[2], "statements.csv");
      s.line_end = parse_line_number(row[3], "statements.csv");
      s.type_label = std::move(row[4]);
      if (s.line_end < s.line_start)
        throw VersionReject{DiagCode::BadFormat,
                            "statements.csv: line_end before line_start for " + s.id};
      if (!stmt_ids.insert(s.id).second)
        throw VersionReject{DiagCode::DuplicateId, "duplicate statement id " + s.id};
      statements.push_back(std::move(s));
    }

    std::vector<TestRecord> tests;
    std::set<std::string> test_ids;
    bool any_failed = false;
    for (auto& row : read_csv(dir / "tests.csv", "test_id,outcome", 2)) {
      TestRecord t;
      t.test_id = std::move(row[0]);
      if (row[1] == "pass")
        t.outcome = Outcome::Passed;
      else if (row[1] == "fail")
        t.outcome = Outcome::Failed;
      else
        throw VersionReject{DiagCode::BadFormat,
                            "tests.csv: outcome must be pass or fail, got '" + row[1] + "'"};
      any_failed = any_failed || t.outcome == Outcome::Failed;
      if (!test_ids.insert(t.test_id).second)
        throw VersionReject{DiagCode::DuplicateId, "duplicate test id " + t.test_id};
      tests.push_back(std::move(t));
    }
    if (!any_failed)
      throw VersionReject{DiagCode::NoFailedTest, "version has no failed test"};

    std::vector<CoverageSpectrum::CoveredPair> covered;
    for (auto& row : read_csv(dir / "coverage.csv", "test_id,statement_id", 2)) {
      if (!test_ids.count(row[0]))
        throw VersionReject{DiagCode::ReferentialIntegrity,
                            "coverage.csv references unknown test " + row[0]};
      if (!stmt_ids.count(row[1]))
        throw VersionReject{DiagCode::ReferentialIntegrity,
                            "coverage.csv references unknown statement " + row[1]};
      covered.emplace_back(std::move(row[0]), std::move(row[1]));
    }

    // Fault labels: faults.csv wins; otherwise patch.diff + linemap.csv.
    const bool have_faults_csv = fs::exists(dir / "faults.csv");
    const bool have_patch = fs::exists(dir / "patch.diff");
    if (!have_faults_csv && !have_patch)
      throw VersionReject{DiagCode::MissingFile, "neither faults.csv nor patch.diff present"};

    auto load_linemap = [&]() {
      LineMap map;
      for (auto& row :
           read_csv(dir / "linemap.csv", "file,line_start,line_end,statement_id", 4)) {
        if (!stmt_ids.count(row[3]))
          throw VersionReject{DiagCode::ReferentialIntegrity,
                              "linemap.csv references unknown statement " + row[3]};
        LineMap::Span span;
        span.line_start = parse_line_number(row[1], "linemap.csv");
        span.line_end = parse_line_number(row[2], "linemap.csv");
        if (span.line_end < span.line_start)
          throw VersionReject{DiagCode::BadFormat, "linemap.csv: line_end before line_start"};
        span.statement_id = std::move(row[3]);
        map.add(row[0], std::move(span));
      }
      return map;
    };

    std::set<std::string> faults;
    if (have_faults_csv) {
      for (auto& row : read_csv(dir / "faults.csv", "statement_id", 1)) {
        if (!stmt_ids.count(row[0]))
          throw VersionReject{DiagCode::ReferentialIntegrity,
                              "faults.csv references unknown statement " + row[0]};
        faults.insert(std::move(row[0]));
      }
      if (have_patch && fs::exists(dir / "linemap.csv")) {
        try {
          const DiffFaults from_diff =
              faults_from_diff(read_file_or_reject(dir / "patch.diff"), load_linemap());
          if (from_diff.statements != faults)
            out.diagnostics.push_back({DiagCode::FaultsDiffMismatch, project_id, version_id,
                                       "faults.csv and patch.diff disagree; faults.csv wins",
                                       false});
        } catch (...) {
          // The explicit labels stand on their own.
        }
      }
    } else {
      const std::string diff_text = read_file_or_reject(dir / "patch.diff");
      const LineMap map = load_linemap();
      DiffFaults extracted;
      try {
        extracted = faults_from_diff(diff_text, map);
      } catch (const DiffParseError& e) {
        throw VersionReject{DiagCode::BadFormat, std::string("patch.diff: ") + e.what()};
      }
      for (const std::string& w : extracted.warnings)
        out.diagnostics.push_back(
            {DiagCode::UnmappedDeletedLine, project_id, version_id, w, false});
      if (extracted.deleted_lines == 0 && exclude_insert_only)
        throw VersionReject{DiagCode::InsertOnlyPatch, "patch only inserts statements"};
      faults = std::move(extracted.statements);
    }
    if (faults.empty())
      throw VersionReject{DiagCode::EmptyFaultLabels, "no fault labels after extraction"};

    CoverageSpectrum spectrum(std::move(statements), std::move(tests), covered);
    out.version.emplace(
        FaultyVersion{project_id, version_id, std::move(spectrum), std::move(faults)});
  } catch (const VersionReject& reject) {
    out.diagnostics.push_back({reject.code, project_id, version_id, reject.detail, true});
    out.version.reset();
  } catch (const std::invalid_argument& e) {
    out.diagnostics.push_back({DiagCode::BadFormat, project_id, version_id, e.what(), true});
    out.version.reset();
  }
  return out;
}

}  // namespace detail

/// Writes content to path via a temp file in the same directory plus an
/// atomic rename, creating parent directories as needed.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw CorpusError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline LoadResult load_repository(const std::filesystem::path& root,
                                  const LoadOptions& opts = {}) {
  namespace fs = std::filesystem;
  using nlohmann::ordered_json;

  const fs::path manifest_path = root / "manifest.json";
  std::ifstream manifest_in(manifest_path, std::ios::binary);
  if (!manifest_in) throw CorpusError("manifest.json missing under " + root.string());

  LoadResult result;
  std::vector<std::pair<std::string, std::vector<std::string>>> listed;
  try {
    ordered_json manifest;
    manifest_in >> manifest;
    if (!manifest.is_object() || !manifest.contains("schema_version") ||
        !manifest["schema_version"].is_number_integer())
      throw CorpusError("manifest.json: schema_version missing");
    if (manifest["schema_version"].get<int>() != 1)
      throw CorpusError("manifest.json: unsupported schema_version");
    if (!manifest.contains("projects") || !manifest["projects"].is_array())
      throw CorpusError("manifest.json: projects missing");

    if (manifest.contains("min_defects_per_project"))
      result.manifest_policy.min_defects_per_project =
          manifest["min_defects_per_project"].get<int>();
    if (manifest.contains("exclude_insert_only"))
      result.manifest_policy.exclude_insert_only =
          manifest["exclude_insert_only"].get<bool>();

    std::set<std::string> seen_projects;
    for (const auto& project_json : manifest["projects"]) {
      if (!project_json.contains("project_id") || !project_json.contains("versions"))
        throw CorpusError("manifest.json: project entry missing project_id or versions");
      const auto project_id = project_json["project_id"].get<std::string>();
      if (!seen_projects.insert(project_id).second)
        throw CorpusError("manifest.json: duplicate project id " + project_id);
      std::vector<std::string> versions;
      std::set<std::string> seen_versions;
      for (const auto& version_json : project_json["versions"]) {
        const auto version_id = version_json.get<std::string>();
        if (!seen_versions.insert(version_id).second)
          throw CorpusError("manifest.json: duplicate version " + project_id + "/" +
                            version_id);
        versions.push_back(version_id);
      }
      listed.emplace_back(project_id, std::move(versions));
    }
  } catch (const CorpusError&) {
    throw;
  } catch (const std::exception& e) {
    throw CorpusError("manifest.json: " + std::string(e.what()));
  }

  const int min_defects =
      opts.min_defects.value_or(result.manifest_policy.min_defects_per_project.value_or(30));
  const bool exclude_insert_only = opts.exclude_insert_only.value_or(
      result.manifest_policy.exclude_insert_only.value_or(true));

  // Versions load in parallel; diagnostics and repository content merge in
  // manifest order afterwards, so the result is scheduling-independent.
  std::vector<std::pair<std::string, std::string>> slots;
  for (const auto& [project_id, version_ids] : listed)
    for (const std::string& version_id : version_ids)
      slots.emplace_back(project_id, version_id);
  std::vector<detail::VersionOutcome> outcomes(slots.size());
  parallel_for_index(slots.size(), opts.jobs, [&](std::size_t i) {
    const auto& [project_id, version_id] = slots[i];
    outcomes[i] = detail::load_version_dir(root / project_id / version_id, project_id,
                                           version_id, exclude_insert_only);
  });

  std::size_t slot = 0;
  for (const auto& [project_id, version_ids] : listed) {
    ProjectVersions project;
    project.project_id = project_id;

    for (const std::string& version_id : version_ids) {
      (void)version_id;
      detail::VersionOutcome& outcome = outcomes[slot++];
      for (Diagnostic& d : outcome.diagnostics)
        result.report.diagnostics.push_back(std::move(d));
      if (outcome.version)
        project.versions.push_back(std::move(*outcome.version));
      else
        ++result.report.rejected_versions;
    }

    if (project.versions.size() < static_cast<std::size_t>(std::max(min_defects, 0))) {
      result.report.diagnostics.push_back(
          {DiagCode::BelowMinDefects, project_id, "",
           "project has " + std::to_string(project.versions.size()) +
               " usable defects, below minimum " + std::to_string(min_defects),
           true});
      ++result.report.excluded_projects;
      continue;
    }
    if (project.versions.empty()) {
      result.report.diagnostics.push_back(
          {DiagCode::DegenerateProject, project_id, "", "project has no usable versions", true});
      ++result.report.excluded_projects;
      continue;
    }
    result.report.loaded_versions += project.versions.size();
    ++result.report.loaded_projects;
    result.repo.projects.push_back(std::move(project));
  }

  return result;
}

/// Writes the canonical corpus form: manifest plus per-version CSV files,
/// rows sorted by id, LF endings, faults always as faults.csv. Feeding the
/// output back through load_repository reproduces identical bytes.
inline void save_repository(const FaultRepository& repo, const std::filesystem::path& root,
                            const CorpusFilterPolicy& policy = {}) {
  namespace fs = std::filesystem;
  using nlohmann::ordered_json;

  auto check_field = [](const std::string& value, const char* what) {
    if (value.find(',') != std::string::npos || value.find('\n') != std::string::npos)
      throw CorpusError(std::string(what) + " contains a comma or newline: " + value);
  };

  ordered_json manifest;
  manifest["schema_version"] = 1;
  if (policy.min_defects_per_project)
    manifest["min_defects_per_project"] = *policy.min_defects_per_project;
  if (policy.exclude_insert_only)
    manifest["exclude_insert_only"] = *policy.exclude_insert_only;
  manifest["projects"] = ordered_json::array();
  for (const ProjectVersions& project : repo.projects) {
    ordered_json entry;
    entry["project_id"] = project.project_id;
    ordered_json versions = ordered_json::array();
    for (const FaultyVersion& v : project.versions) versions.push_back(v.version_id);
    entry["versions"] = std::move(versions);
    manifest["projects"].push_back(std::move(entry));
  }
  fs::create_directories(root);
  write_file_atomic(root / "manifest.json", manifest.dump(2) + "\n");

  for (const ProjectVersions& project : repo.projects) {
    for (const FaultyVersion& version : project.versions) {
      const fs::path dir = root / project.project_id / version.version_id;
      const CoverageSpectrum& spectrum = version.spectrum;

      std::vector<const StatementInfo*> stmts;
      for (const StatementInfo& s : spectrum.statements()) stmts.push_back(&s);
      std::sort(stmts.begin(), stmts.end(),
                [](const StatementInfo* a, const StatementInfo* b) { return a->id < b->id; });
      std::string out = "statement_id,file,line_start,line_end,type_label\n";
      for (const StatementInfo* s : stmts) {
        check_field(s->id, "statement id");
        check_field(s->file, "file path");
        check_field(s->type_label, "type label");
        out += s->id + "," + s->file + "," + std::to_string(s->line_start) + "," +
               std::to_string(s->line_end) + "," + s->type_label + "\n";
      }
      write_file_atomic(dir / "statements.csv", out);

      std::vector<const TestRecord*> tests;
      for (const TestRecord& t : spectrum.tests()) tests.push_back(&t);
      std::sort(tests.begin(), tests.end(),
                [](const TestRecord* a, const TestRecord* b) { return a->test_id < b->test_id; });
      out = "test_id,outcome\n";
      for (const TestRecord* t : tests) {
        check_field(t->test_id, "test id");
        out += t->test_id + "," + (t->outcome == Outcome::Failed ? "fail" : "pass") + "\n";
      }
      write_file_atomic(dir / "tests.csv", out);

      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& [ti, si] : spectrum.covered_index_pairs())
        pairs.emplace_back(spectrum.tests()[ti].test_id, spectrum.statements()[si].id);
      std::sort(pairs.begin(), pairs.end());
      out = "test_id,statement_id\n";
      for (const auto& [tid, sid] : pairs) out += tid + "," + sid + "\n";
      write_file_atomic(dir / "coverage.csv", out);

      out = "statement_id\n";
      for (const std::string& fault : version.fault_labels) out += fault + "\n";
      write_file_atomic(dir / "faults.csv", out);
    }
  }
}

// ---------------------------------------------------------------------------
// Priority-model file: "hybridfl-priorities v1" header, then one
// tab-separated line per type: label, weight, selected flag.

inline constexpr std::string_view kPriorityFileHeader = "hybridfl-priorities v1";

inline void save_priority_model(const PriorityModel& model, const std::filesystem::path& path) {
  std::string out(kPriorityFileHeader);
  out += "\n";
  for (const auto& [label, weight] : model.weights()) {
    out += label;
    out += "\t";
    out += detail::format_double(weight);
    out += "\t";
    out += model.selected(label) ? "1" : "0";
    out += "\n";
  }
  write_file_atomic(path, out);
}

inline PriorityModel load_priority_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open priority model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = std::move(buf).str();
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines[0] != kPriorityFileHeader)
    throw CorpusError(path.string() + ": expected header '" +
                      std::string(kPriorityFileHeader) + "'");

  std::map<std::string, double> weights;
  std::map<std::string, bool> selected;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      throw CorpusError(path.string() + " line " + std::to_string(i + 1) +
                        ": expected 3 tab-separated fields");
    const std::string label(line.substr(0, t1));
    const std::string weight_text(line.substr(t1 + 1, t2 - t1 - 1));
    const std::string selected_text(line.substr(t2 + 1));
    char* end = nullptr;
    const double weight = std::strtod(weight_text.c_str(), &end);
    if (end == weight_text.c_str() || *end != '\0' || !std::isfinite(weight) || weight < 0.0)
      throw CorpusError(path.string() + " line " + std::to_string(i + 1) +
                        ": bad weight '" + weight_text + "'");
    if (selected_text != "0" && selected_text != "1")
      throw CorpusError(path.string() + " line " + std::to_string(i + 1) +
                        ": selected flag must be 0 or 1");
    if (weights.count(label))
      throw CorpusError(path.string() + ": duplicate type label " + label);
    weights[label] = weight;
    selected[label] = selected_text == "1";
  }
  return PriorityModel(std::move(weights), std::move(selected), {}, LearnerConfig{});
}

// ---------------------------------------------------------------------------
// Ranked-list file: tab-separated, one line per suspicious statement.

inline std::string ranked_list_to_string(const std::vector<RankedEntry>& entries) {
  std::string out = "rank\tstatement_id\ttype_label\tbase\tpriority\tadjusted\n";
  for (const RankedEntry& e : entries) {
    out += detail::format_double(e.rank);
    out += "\t";
    out += e.statement_id;
    out += "\t";
    out += e.type_label;
    out += "\t";
    out += detail::format_double(e.base_score);
    out += "\t";
    out += detail::format_double(e.priority);
    out += "\t";
    out += detail::format_double(e.adjusted_score);
    out += "\n";
  }
  return out;
}

inline void save_ranked_list(const std::vector<RankedEntry>& entries,
                             const std::filesystem::path& path) {
  write_file_atomic(path, ranked_list_to_string(entries));
}

}  // namespace hybridfl
