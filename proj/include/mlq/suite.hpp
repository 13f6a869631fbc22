#pragma once

// Batch runner over corpus entries: every entry under every applicable
// method, compared against the expected verdicts.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlq/equivalence.hpp"
#include "mlq/generators.hpp"

namespace mlq {

struct ReportRow {
  std::string name;
  std::string method;
  Verdict verdict;
  Expected expected;
  bool match = false;
  double elapsed_ms = 0;
};

struct RunReport {
  Budget budget;
  std::vector<ReportRow> rows;
  /// Entries whose side conditions could not be discharged.
  std::vector<std::string> failed_side_conditions;

  std::size_t matched() const;
  std::size_t mismatched() const { return rows.size() - matched(); }
};

/// Reads a manifest and the .mlq files it names (paths relative to the
/// manifest). Throws Error on malformed input.
std::vector<CorpusEntry> load_manifest(const std::filesystem::path& manifest);

/// Writes corpus() as .mlq files plus manifest.json into dir.
void export_corpus(const std::vector<CorpusEntry>& entries, const std::filesystem::path& dir);

/// True iff every side condition holds; "terminates" is discharged by a
/// terminating run (cycle detection rules out the diverging case).
bool check_side_conditions(const CorpusEntry& e, const Budget& b);

/// Methods applicable to an entry: closed-only methods are skipped for
/// open entries.
std::vector<std::string> applicable_methods(const CorpusEntry& e, const std::vector<std::string>& methods);

RunReport run_suite(const std::vector<CorpusEntry>& entries, const std::vector<std::string>& methods,
                    const Budget& b);

nlohmann::json to_json(const RunReport& r, bool with_timing = true);

}  // namespace mlq
