#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablesage/parse.hpp"

namespace tablesage {

// One scored column: the gold label and what the model's answer became.
struct ColumnRecord {
  std::size_t run = 0;
  std::string table_id;
  std::size_t column_index = 0;
  std::string gold;
  AnnotationOutcome outcome;
  // Why the unit has no usable answer (transport or budget failure), if so.
  std::string note;

  bool correct() const { return outcome.label && *outcome.label == gold; }
  bool operator==(const ColumnRecord&) const = default;
};

struct LabelCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  bool operator==(const LabelCounts&) const = default;
};

struct EvalResult {
  std::size_t n_total = 0;
  // Outcomes that mapped to some label, directly or through a synonym.
  std::size_t n_predicted = 0;
  std::size_t n_correct = 0;
  std::size_t n_synonym = 0;
  std::size_t n_idk = 0;
  std::size_t n_oov = 0;
  std::size_t n_missing = 0;
  std::map<std::string, LabelCounts> per_label;
};

// Fractions in [0, 1], full precision.
struct MicroScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const MicroScores&) const = default;
};

EvalResult evaluate(const std::vector<ColumnRecord>& records);

// P = correct / predicted (0 with no predictions), R = correct / total,
// F1 = 2PR / (P + R) (0 when P + R = 0). Wrong in-vocabulary labels cost
// precision; abstentions, out-of-vocabulary and missing answers cost recall
// only. Throws ArgumentError on an empty record set.
MicroScores compute_micro(const std::vector<ColumnRecord>& records);
MicroScores micro_from_counts(std::size_t n_correct, std::size_t n_predicted, std::size_t n_total);

// Fraction to a percentage rounded half-up to two decimals.
double to_percent(double fraction);
// Two-decimal rounding of a value already in percent.
double round2(double percent);
// "66.67" style, always two decimals.
std::string format_percent(double percent);

// Labels that are neither predicted nor gold are omitted.
std::map<std::string, double> per_label_f1(const std::vector<ColumnRecord>& records);
double label_f1(const LabelCounts& counts);

struct OovSummary {
  // Answers that matched no label verbatim (synonym hits and true OOV).
  std::size_t n_oov_raw = 0;
  // How many of those the synonym dictionary mapped to a label.
  std::size_t n_recovered = 0;

  bool operator==(const OovSummary&) const = default;
};

OovSummary oov_summary(const std::vector<ColumnRecord>& records);

// Reported scores of one experiment, in percent.
struct ExperimentScores {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> step1_f1;
};

struct DeltaRow {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double delta_f1 = 0.0;
  std::optional<double> step1_f1;
};

// One row per experiment in input order, each with F1 minus the baseline's F1.
// Throws ArgumentError when no experiment is called baseline_name.
std::vector<DeltaRow> delta_table(const std::vector<ExperimentScores>& experiments,
                                  std::string_view baseline_name);

}  // namespace tablesage
