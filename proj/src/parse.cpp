#include "tablesage/parse.hpp"

#include <array>

#include "tablesage/errors.hpp"
#include "tablesage/text.hpp"

namespace tablesage {
namespace {

constexpr std::string_view kLeftCurly = "\xE2\x80\x9C";
constexpr std::string_view kRightCurly = "\xE2\x80\x9D";

constexpr std::array<std::string_view, 8> kCues = {"Type:",  "Types:", "Class:",  "Classes:",
                                                  "Label:", "Domain:", "Answer:", "Column type:"};

constexpr std::array<std::string_view, 3> kIDontKnowForms = {"i don't know", "i don\xE2\x80\x99t know",
                                                             "i do not know"};

struct QuoteHit {
  std::size_t pos = std::string_view::npos;
  std::size_t len = 0;
};

QuoteHit find_quote(std::string_view s, std::size_t from) {
  QuoteHit best;
  for (std::string_view q : {std::string_view("\""), kLeftCurly, kRightCurly}) {
    std::size_t p = s.find(q, from);
    if (p != std::string_view::npos && p < best.pos) {
      best = {p, q.size()};
    }
  }
  return best;
}

std::string extract_quoted(std::string_view s) {
  QuoteHit open = find_quote(s, 0);
  if (open.pos == std::string_view::npos) {
    return std::string(s);
  }
  QuoteHit close = find_quote(s, open.pos + open.len);
  if (close.pos == std::string_view::npos) {
    // A lone quote at either end is dropped; one in the middle is kept.
    if (open.pos == 0) {
      return std::string(s.substr(open.len));
    }
    if (open.pos + open.len == s.size()) {
      return std::string(s.substr(0, open.pos));
    }
    return std::string(s);
  }
  return std::string(s.substr(open.pos + open.len, close.pos - open.pos - open.len));
}

std::string strip_cue(std::string s) {
  for (std::string_view cue : kCues) {
    if (text::starts_with_icase(s, cue)) {
      return text::trim(std::string_view(s).substr(cue.size()));
    }
  }
  return s;
}

std::string strip_trailing_periods(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) {
    s.pop_back();
  }
  return s;
}

bool is_i_dont_know(std::string_view candidate) {
  std::string key = text::fold_key(candidate);
  for (std::string_view form : kIDontKnowForms) {
    if (key == form) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kMatched:
      return "matched";
    case OutcomeKind::kSynonymMatched:
      return "synonym";
    case OutcomeKind::kIDontKnow:
      return "idk";
    case OutcomeKind::kOutOfVocabulary:
      return "oov";
    case OutcomeKind::kMissing:
      return "missing";
  }
  return "missing";
}

OutcomeKind parse_outcome_kind(std::string_view name) {
  for (OutcomeKind kind : {OutcomeKind::kMatched, OutcomeKind::kSynonymMatched,
                           OutcomeKind::kIDontKnow, OutcomeKind::kOutOfVocabulary,
                           OutcomeKind::kMissing}) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  throw ArgumentError("unknown outcome kind '" + std::string(name) + "'");
}

std::string normalize_answer(std::string_view raw) {
  std::string current(raw);
  // Each pass can expose another layer (a cue inside quotes, a period before
  // a closing quote), so iterate to a fixed point.
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = text::trim(current);
    next = extract_quoted(next);
    next = text::trim(next);
    next = strip_cue(std::move(next));
    next = strip_trailing_periods(std::move(next));
    next = text::collapse_whitespace(next);
    if (next == current) {
      break;
    }
    current = std::move(next);
  }
  return current;
}

AnnotationOutcome map_to_label(std::string_view candidate, const LabelVocabulary& vocabulary,
                               std::string_view raw) {
  AnnotationOutcome out;
  out.raw = raw.empty() ? std::string(candidate) : std::string(raw);
  if (text::trim(candidate).empty()) {
    out.kind = OutcomeKind::kMissing;
    return out;
  }
  if (auto label = vocabulary.find_label(candidate)) {
    out.kind = OutcomeKind::kMatched;
    out.label = std::move(label);
  } else if (auto mapped = vocabulary.find_synonym(candidate)) {
    out.kind = OutcomeKind::kSynonymMatched;
    out.label = std::move(mapped);
  } else if (is_i_dont_know(candidate)) {
    out.kind = OutcomeKind::kIDontKnow;
  } else {
    out.kind = OutcomeKind::kOutOfVocabulary;
  }
  return out;
}

AnnotationOutcome parse_single_answer(std::string_view raw, const LabelVocabulary& vocabulary) {
  return map_to_label(normalize_answer(raw), vocabulary, raw);
}

std::vector<std::string> split_answer_fragments(std::string_view raw) {
  std::vector<std::string> fragments;
  std::string current;
  bool in_quotes = false;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::string_view rest = raw.substr(i);
    if (rest.front() == '"') {
      in_quotes = !in_quotes;
      current.push_back('"');
      ++i;
      continue;
    }
    if (rest.substr(0, kLeftCurly.size()) == kLeftCurly) {
      in_quotes = true;
      current.append(kLeftCurly);
      i += kLeftCurly.size();
      continue;
    }
    if (rest.substr(0, kRightCurly.size()) == kRightCurly) {
      in_quotes = false;
      current.append(kRightCurly);
      i += kRightCurly.size();
      continue;
    }
    if (rest.front() == ',' && !in_quotes) {
      fragments.push_back(std::move(current));
      current.clear();
      ++i;
      continue;
    }
    current.push_back(rest.front());
    ++i;
  }
  fragments.push_back(std::move(current));
  return fragments;
}

TableAnswer parse_table_answer(std::string_view raw, std::size_t n_columns,
                               const LabelVocabulary& vocabulary) {
  if (n_columns == 0) {
    throw ArgumentError("parse_table_answer: n_columns must be at least 1");
  }
  TableAnswer out;
  std::vector<std::string> fragments = split_answer_fragments(raw);
  // "A, B," leaves one empty tail fragment; it is punctuation, not a column.
  while (fragments.size() > 1 && text::trim(fragments.back()).empty()) {
    fragments.pop_back();
  }
  if (fragments.size() == 1 && text::trim(fragments.front()).empty()) {
    fragments.clear();
  }
  out.fragment_count = fragments.size();
  out.count_mismatch = fragments.size() != n_columns;
  out.outcomes.reserve(n_columns);
  for (std::size_t i = 0; i < n_columns; ++i) {
    if (i < fragments.size()) {
      std::string fragment = text::trim(fragments[i]);
      out.outcomes.push_back(map_to_label(normalize_answer(fragment), vocabulary, fragment));
    } else {
      out.outcomes.push_back(AnnotationOutcome{OutcomeKind::kMissing, std::nullopt, ""});
    }
  }
  return out;
}

}  // namespace tablesage
