#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tablesage {

enum class Split { kTrain, kTest };

std::string_view to_string(Split split);
// Throws ArgumentError for anything other than "train" or "test".
Split parse_split(std::string_view name);

struct Column {
  std::size_t index = 0;
  std::vector<std::string> values;
  std::optional<std::string> gold_label;

  bool operator==(const Column&) const = default;
};

struct Table {
  std::string table_id;
  std::vector<Column> columns;
  std::size_t n_rows = 0;

  std::size_t n_columns() const { return columns.size(); }
  // True when every column carries a gold label.
  bool fully_annotated() const;
  // Gold labels in column order; unannotated columns are empty strings.
  std::vector<std::string> gold_labels() const;

  bool operator==(const Table&) const = default;
};

// Closed label set plus the synonym dictionary. Lookups are case-insensitive
// and whitespace-insensitive; canonical spelling is what the labels file says.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  // Synonyms are (synonym, label) pairs in file order.
  // Throws ValidationError on duplicate labels, dangling synonyms, or a
  // synonym that collides with a label.
  LabelVocabulary(std::vector<std::string> labels,
                  std::vector<std::pair<std::string, std::string>> synonyms);

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::pair<std::string, std::string>>& synonyms() const { return synonyms_; }
  std::size_t size() const { return labels_.size(); }

  std::optional<std::string> find_label(std::string_view name) const;
  std::optional<std::string> find_synonym(std::string_view name) const;
  bool contains(std::string_view name) const { return find_label(name).has_value(); }
  // First configured synonym for a canonical label, in file order.
  std::optional<std::string> first_synonym_of(std::string_view label) const;

  bool operator==(const LabelVocabulary& other) const {
    return labels_ == other.labels_ && synonyms_ == other.synonyms_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::pair<std::string, std::string>> synonyms_;
  std::map<std::string, std::string> label_by_key_;
  std::map<std::string, std::string> synonym_by_key_;
};

struct Domain {
  std::string name;
  // Names the domain may be referred to by in prompts and answers. The first
  // alias is the one shown to the model.
  std::vector<std::string> aliases;
  std::vector<std::string> labels;

  const std::string& prompt_name() const { return aliases.empty() ? name : aliases.front(); }

  bool operator==(const Domain&) const = default;
};

class DomainSchema {
 public:
  DomainSchema() = default;
  // Throws ValidationError when a subset is empty or names an unknown label.
  DomainSchema(std::vector<Domain> domains, const LabelVocabulary& vocabulary);

  const std::vector<Domain>& domains() const { return domains_; }
  bool empty() const { return domains_.empty(); }

  // Exact configured subset in configured order. Throws LookupError.
  const std::vector<std::string>& labels_for_domain(std::string_view domain) const;
  const Domain& domain(std::string_view name) const;
  bool has_domain(std::string_view name) const;
  // Matches a name or alias case-insensitively; returns the canonical name.
  std::optional<std::string> resolve(std::string_view answer) const;
  std::vector<std::string> prompt_names() const;

  bool operator==(const DomainSchema&) const = default;

 private:
  std::vector<Domain> domains_;
};

struct Dataset {
  Split split = Split::kTest;
  std::vector<Table> tables;
  LabelVocabulary vocabulary;
  DomainSchema schema;
  std::map<std::string, std::string> gold_domain;

  const Table& table(std::string_view table_id) const;
  std::size_t annotated_column_count() const;
  // Gold domain from domains_gold.csv, otherwise the first domain whose subset
  // covers every gold label of the table.
  std::optional<std::string> domain_of(const Table& table) const;

  bool operator==(const Dataset&) const = default;
};

// Loads <path>/<split>/ when it holds a manifest, else <path> itself. Schema
// files are taken from <split dir>/schema, falling back to <path>/schema.
Dataset load_dataset(const std::filesystem::path& path, Split split);

struct Schema {
  LabelVocabulary vocabulary;
  DomainSchema domains;
};
Schema load_schema(const std::filesystem::path& schema_dir);

// Writes the layout load_dataset reads, schema included.
void write_dataset(const Dataset& dataset, const std::filesystem::path& split_dir);

// Throws ValidationError listing every offence.
void validate_dataset(const Dataset& dataset);

// First min(n, n_rows) rows. Throws ArgumentError for n == 0.
Table head_rows(const Table& table, std::size_t n);

const std::vector<std::string>& labels_for_domain(const DomainSchema& schema,
                                                  std::string_view domain);

}  // namespace tablesage
