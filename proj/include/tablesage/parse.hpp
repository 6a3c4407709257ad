#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablesage/dataset.hpp"

namespace tablesage {

enum class OutcomeKind { kMatched, kSynonymMatched, kIDontKnow, kOutOfVocabulary, kMissing };

std::string_view to_string(OutcomeKind kind);
OutcomeKind parse_outcome_kind(std::string_view name);

struct AnnotationOutcome {
  OutcomeKind kind = OutcomeKind::kMissing;
  // Present iff kind is kMatched or kSynonymMatched.
  std::optional<std::string> label;
  // The answer fragment as the model wrote it.
  std::string raw;

  bool has_label() const { return label.has_value(); }
  bool operator==(const AnnotationOutcome&) const = default;
};

// Trims, strips a leading "Type:"/"Class:" style cue, keeps only the first
// quoted span when there is one, drops trailing periods and collapses
// whitespace. Idempotent.
std::string normalize_answer(std::string_view raw);

// Exact label (case-insensitive) first, then the synonym dictionary, then
// "I don't know"; anything else is out of vocabulary. `raw` is kept verbatim.
AnnotationOutcome map_to_label(std::string_view candidate, const LabelVocabulary& vocabulary,
                               std::string_view raw = {});

// normalize_answer followed by map_to_label.
AnnotationOutcome parse_single_answer(std::string_view raw, const LabelVocabulary& vocabulary);

struct TableAnswer {
  // Exactly n_columns entries; positions the answer did not cover are kMissing.
  std::vector<AnnotationOutcome> outcomes;
  // Set when the answer held more or fewer fragments than columns.
  bool count_mismatch = false;
  std::size_t fragment_count = 0;
};

// Splits on commas outside double quotes.
std::vector<std::string> split_answer_fragments(std::string_view raw);

TableAnswer parse_table_answer(std::string_view raw, std::size_t n_columns,
                               const LabelVocabulary& vocabulary);

}  // namespace tablesage
