#include "tablesage/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "tablesage/errors.hpp"

namespace tablesage {

EvalResult evaluate(const std::vector<ColumnRecord>& records) {
  EvalResult r;
  for (const auto& rec : records) {
    ++r.n_total;
    switch (rec.outcome.kind) {
      case OutcomeKind::kMatched:
      case OutcomeKind::kSynonymMatched: {
        ++r.n_predicted;
        if (rec.outcome.kind == OutcomeKind::kSynonymMatched) {
          ++r.n_synonym;
        }
        const std::string& predicted = *rec.outcome.label;
        if (predicted == rec.gold) {
          ++r.n_correct;
          ++r.per_label[predicted].tp;
        } else {
          ++r.per_label[predicted].fp;
          ++r.per_label[rec.gold].fn;
        }
        break;
      }
      case OutcomeKind::kIDontKnow:
        ++r.n_idk;
        ++r.per_label[rec.gold].fn;
        break;
      case OutcomeKind::kOutOfVocabulary:
        ++r.n_oov;
        ++r.per_label[rec.gold].fn;
        break;
      case OutcomeKind::kMissing:
        ++r.n_missing;
        ++r.per_label[rec.gold].fn;
        break;
    }
  }
  return r;
}

MicroScores micro_from_counts(std::size_t n_correct, std::size_t n_predicted, std::size_t n_total) {
  if (n_total == 0) {
    throw ArgumentError("micro scores need at least one gold column");
  }
  MicroScores s;
  s.precision = n_predicted == 0 ? 0.0
                                 : static_cast<double>(n_correct) / static_cast<double>(n_predicted);
  s.recall = static_cast<double>(n_correct) / static_cast<double>(n_total);
  const double sum = s.precision + s.recall;
  s.f1 = sum == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / sum;
  return s;
}

MicroScores compute_micro(const std::vector<ColumnRecord>& records) {
  if (records.empty()) {
    throw ArgumentError("compute_micro: empty record set");
  }
  EvalResult r = evaluate(records);
  return micro_from_counts(r.n_correct, r.n_predicted, r.n_total);
}

double round2(double percent) {
  // Half-up; the epsilon absorbs representation error such as 66.665 -> 66.66499...
  return std::floor(percent * 100.0 + 0.5 + 1e-7) / 100.0;
}

double to_percent(double fraction) { return round2(fraction * 100.0); }

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", round2(percent));
  return buf;
}

double label_f1(const LabelCounts& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::map<std::string, double> per_label_f1(const std::vector<ColumnRecord>& records) {
  std::map<std::string, double> out;
  for (const auto& [label, counts] : evaluate(records).per_label) {
    out[label] = label_f1(counts);
  }
  return out;
}

OovSummary oov_summary(const std::vector<ColumnRecord>& records) {
  OovSummary s;
  for (const auto& rec : records) {
    if (rec.outcome.kind == OutcomeKind::kSynonymMatched) {
      ++s.n_oov_raw;
      ++s.n_recovered;
    } else if (rec.outcome.kind == OutcomeKind::kOutOfVocabulary) {
      ++s.n_oov_raw;
    }
  }
  return s;
}

std::vector<DeltaRow> delta_table(const std::vector<ExperimentScores>& experiments,
                                  std::string_view baseline_name) {
  const ExperimentScores* baseline = nullptr;
  for (const auto& e : experiments) {
    if (e.name == baseline_name) {
      baseline = &e;
      break;
    }
  }
  if (baseline == nullptr) {
    throw ArgumentError("baseline experiment '" + std::string(baseline_name) + "' not found");
  }
  std::vector<DeltaRow> rows;
  for (const auto& e : experiments) {
    rows.push_back({e.name, e.precision, e.recall, e.f1, round2(e.f1 - baseline->f1), e.step1_f1});
  }
  return rows;
}

}  // namespace tablesage
