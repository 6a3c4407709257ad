#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tablesage/dataset.hpp"
#include "tablesage/llm.hpp"
#include "tablesage/metrics.hpp"
#include "tablesage/prompt.hpp"
#include "tablesage/random.hpp"

namespace tablesage {

struct ExperimentConfig {
  // An empty label list means the full vocabulary.
  PromptConfig prompt;
  BackendConfig backend;
  std::string model_name = std::string(kDefaultModel);
  double temperature = 0.0;
  std::size_t n_runs = 3;
  // One per run; empty means 1..n_runs.
  std::vector<std::uint64_t> seeds;
  std::size_t parallelism = 1;
  bool two_step = false;

  // Throws ArgumentError.
  void validate() const;
  // Seeds actually used. Zero-shot has no sampling randomness and runs once.
  std::vector<std::uint64_t> effective_seeds() const;
};

// Outcome of the domain step for one table.
struct DomainRecord {
  std::size_t run = 0;
  std::string table_id;
  // Empty when the table has no known gold domain.
  std::string gold_domain;
  std::optional<std::string> predicted_domain;
  std::string raw;
  // The step-1 answer named no known domain; step 2 used every label.
  bool fallback = false;
  // Labels offered in the step-2 prompt.
  std::vector<std::string> label_list;
  std::string note;
};

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  // Sorted by (table_id, column_index); one per annotated test column.
  std::vector<ColumnRecord> records;
  // Two-step runs only; one per test table.
  std::vector<DomainRecord> domains;
  std::size_t n_requests = 0;
  std::size_t n_failed_units = 0;
  std::size_t n_transport_failures = 0;
  std::size_t n_budget_failures = 0;
  // Table answers whose fragment count differed from the column count.
  std::size_t n_count_mismatches = 0;
};

// k distinct demonstrations drawn uniformly from the training split: every
// annotated column for column/text, every fully annotated table for table.
// Throws SamplingError when k exceeds the candidates, ArgumentError when
// `train` is not the training split.
std::vector<Demonstration> sample_demonstrations(const Dataset& train, std::size_t k,
                                                 InputFormat format, std::uint64_t seed,
                                                 std::size_t n_rows = kDefaultRows,
                                                 const SerializeOptions& options = {});

// Tables a demonstration of `format` may come from, in dataset order.
std::vector<const Table*> demo_tables(const Dataset& train);

// Single-step annotation over the test split; one backend call per column
// (column/text) or per table (table format). Per-unit transport and budget
// failures become kMissing records with a note; configuration, sampling and
// replay errors abort.
std::vector<RunResult> annotate(const Dataset& test, const Dataset& train,
                                const ExperimentConfig& config, ChatBackend& backend);

// Domain classification per table, then table-format annotation restricted
// to the predicted domain's labels, with demos from that domain only.
std::vector<RunResult> two_step_annotate(const Dataset& test, const Dataset& train,
                                         const ExperimentConfig& config, ChatBackend& backend);

// Dispatches to annotate or two_step_annotate.
std::vector<RunResult> run_experiment(const Dataset& test, const Dataset& train,
                                      const ExperimentConfig& config, ChatBackend& backend);

// The first prompt the experiment would send, without calling any backend.
std::vector<Message> first_prompt(const Dataset& test, const Dataset& train,
                                  const ExperimentConfig& config);

struct RunMetrics {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  MicroScores scores;
  std::optional<MicroScores> step1;
  EvalResult eval;
  OovSummary oov;
};

struct AggregateMetrics {
  // Arithmetic means over runs, fractions.
  MicroScores mean;
  std::optional<double> mean_step1_f1;
  std::vector<RunMetrics> runs;
};

MicroScores domain_scores(const std::vector<DomainRecord>& domains);
RunMetrics run_metrics(const RunResult& result);
// Throws ArgumentError on an empty list.
AggregateMetrics aggregate_runs(const std::vector<RunResult>& results);

}  // namespace tablesage
