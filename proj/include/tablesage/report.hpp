#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablesage/run_store.hpp"

namespace tablesage {

// One row of a published results table, kept for side-by-side comparison.
struct ReferenceRow {
  std::string_view table;
  std::string_view setup;
  std::optional<int> shots;
  std::optional<double> step1_f1;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Absent for the row the table's deltas are taken against.
  std::optional<double> delta_f1;
};

// Published scores for the 32-label down-sampled test set: prompt formats,
// in-context learning, the two-step pipeline and the trained baselines.
const std::vector<ReferenceRow>& published_reference_rows();

// Markdown report: experiments sorted by F1 with the delta against
// `baseline_name` (a run name or experiment label), out-of-vocabulary counts
// and per-label F1. With `include_reference` the published rows follow
// under their own heading. Throws ArgumentError on an empty run list or an
// unknown baseline.
std::string render_report(const std::vector<RunSummary>& runs, std::string_view baseline_name,
                          bool include_reference);

// Loads every run directory and renders the report. Throws LoadError naming
// a run without metrics.json.
std::string build_report(const std::vector<std::filesystem::path>& run_dirs,
                         std::string_view baseline_name, bool include_reference);

}  // namespace tablesage
