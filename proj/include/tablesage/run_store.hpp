#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablesage/llm.hpp"
#include "tablesage/metrics.hpp"
#include "tablesage/pipeline.hpp"

namespace tablesage {

inline constexpr std::string_view kResultsHeader =
    "run,table_id,column_index,gold,outcome,predicted,raw";

// Short description such as "table+inst+roles, 1-shot" or "two-step, 4-shot".
std::string experiment_label(const ExperimentConfig& config);

// Every record of every run, in run order, one CSV row each.
std::string results_csv(const std::vector<RunResult>& results);
// Throws LoadError on a wrong header or malformed row.
std::vector<ColumnRecord> parse_results_csv(std::string_view content);

// Aggregate and per-run scores as pretty JSON. Percentages are rounded to two
// decimals. Nothing here depends on the backend, so a replayed run produces
// the same bytes as the run it replays.
std::string metrics_json(std::string_view label, const std::vector<RunResult>& results);

// Writes and reads the experiment knobs. The API key is never written.
std::string config_json(const ExperimentConfig& config);
// Applies the keys present in `content` on top of `base`.
// Throws ArgumentError on an unknown key or a mistyped value.
ExperimentConfig apply_config_json(std::string_view content, ExperimentConfig base);

// Per-label F1 in percent, "label,f1" with a header line.
std::string per_label_csv(const std::map<std::string, double>& f1);

// config.json, results.csv, metrics.json, per_label_f1.csv and, when given a
// non-empty transcript, transcript.jsonl. Overwrites existing files.
void write_run_dir(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const std::vector<RunResult>& results, const Transcript* transcript);

// What the report needs from one run directory.
struct RunSummary {
  std::string name;
  std::string label;
  std::size_t n_runs = 0;
  // Percent.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> step1_f1;
  double oov_raw_mean = 0.0;
  double oov_recovered_mean = 0.0;
  std::map<std::string, double> per_label_f1;
};

// Throws LoadError naming the run when metrics.json is missing or malformed.
RunSummary load_run_summary(const std::filesystem::path& dir);

}  // namespace tablesage
