#include "tablesage/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tablesage/csv.hpp"
#include "tablesage/errors.hpp"
#include "tablesage/io.hpp"
#include "tablesage/text.hpp"

namespace tablesage {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

template <typename Json>
Json parse_json_file(const fs::path& path) {
  std::string content = read_file(path);
  try {
    return Json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string join_offences(const std::vector<std::string>& offences) {
  std::string out;
  for (const auto& o : offences) {
    out += "\n  - " + o;
  }
  return out;
}

bool valid_table_id(const std::string& id) {
  return !id.empty() && id.find_first_of("/\\") == std::string::npos && id != "." && id != "..";
}

}  // namespace

std::string_view to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split parse_split(std::string_view name) {
  if (name == "train") {
    return Split::kTrain;
  }
  if (name == "test") {
    return Split::kTest;
  }
  throw ArgumentError("unknown split '" + std::string(name) + "' (expected train or test)");
}

bool Table::fully_annotated() const {
  return std::all_of(columns.begin(), columns.end(),
                     [](const Column& c) { return c.gold_label.has_value(); });
}

std::vector<std::string> Table::gold_labels() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) {
    out.push_back(c.gold_label.value_or(""));
  }
  return out;
}

LabelVocabulary::LabelVocabulary(std::vector<std::string> labels,
                                 std::vector<std::pair<std::string, std::string>> synonyms)
    : labels_(std::move(labels)) {
  std::vector<std::string> offences;
  for (const auto& label : labels_) {
    std::string key = text::fold_key(label);
    if (key.empty()) {
      offences.push_back("empty label");
      continue;
    }
    if (!label_by_key_.emplace(key, label).second) {
      offences.push_back("duplicate label '" + label + "'");
    }
  }
  for (auto& [synonym, label] : synonyms) {
    std::string key = text::fold_key(synonym);
    if (label_by_key_.count(key) != 0) {
      offences.push_back("synonym '" + synonym + "' equals a label");
      continue;
    }
    auto canonical = label_by_key_.find(text::fold_key(label));
    if (canonical == label_by_key_.end()) {
      offences.push_back("synonym '" + synonym + "' maps to unknown label '" + label + "'");
      continue;
    }
    auto [it, inserted] = synonym_by_key_.emplace(key, canonical->second);
    if (!inserted && it->second != canonical->second) {
      offences.push_back("synonym '" + synonym + "' maps to two labels");
      continue;
    }
    if (inserted) {
      synonyms_.emplace_back(synonym, canonical->second);
    }
  }
  if (!offences.empty()) {
    throw ValidationError("invalid label vocabulary:" + join_offences(offences));
  }
}

std::optional<std::string> LabelVocabulary::find_label(std::string_view name) const {
  auto it = label_by_key_.find(text::fold_key(name));
  if (it == label_by_key_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::optional<std::string> LabelVocabulary::find_synonym(std::string_view name) const {
  auto it = synonym_by_key_.find(text::fold_key(name));
  if (it == synonym_by_key_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::optional<std::string> LabelVocabulary::first_synonym_of(std::string_view label) const {
  for (const auto& [synonym, target] : synonyms_) {
    if (target == label) {
      return synonym;
    }
  }
  return std::nullopt;
}

DomainSchema::DomainSchema(std::vector<Domain> domains, const LabelVocabulary& vocabulary)
    : domains_(std::move(domains)) {
  std::vector<std::string> offences;
  std::set<std::string> seen;
  for (auto& d : domains_) {
    if (!seen.insert(text::fold_key(d.name)).second) {
      offences.push_back("duplicate domain '" + d.name + "'");
    }
    if (d.labels.empty()) {
      offences.push_back("domain '" + d.name + "' has no labels");
    }
    for (auto& label : d.labels) {
      auto canonical = vocabulary.find_label(label);
      if (!canonical) {
        offences.push_back("domain '" + d.name + "' names unknown label '" + label + "'");
      } else {
        label = *canonical;
      }
    }
  }
  if (!offences.empty()) {
    throw ValidationError("invalid domain schema:" + join_offences(offences));
  }
}

const Domain& DomainSchema::domain(std::string_view name) const {
  for (const auto& d : domains_) {
    if (text::iequals(d.name, name)) {
      return d;
    }
  }
  throw LookupError("unknown domain '" + std::string(name) + "'");
}

const std::vector<std::string>& DomainSchema::labels_for_domain(std::string_view name) const {
  return domain(name).labels;
}

bool DomainSchema::has_domain(std::string_view name) const {
  return std::any_of(domains_.begin(), domains_.end(),
                     [&](const Domain& d) { return text::iequals(d.name, name); });
}

std::optional<std::string> DomainSchema::resolve(std::string_view answer) const {
  std::string key = text::fold_key(answer);
  for (const auto& d : domains_) {
    if (text::fold_key(d.name) == key) {
      return d.name;
    }
    for (const auto& alias : d.aliases) {
      if (text::fold_key(alias) == key) {
        return d.name;
      }
    }
  }
  return std::nullopt;
}

std::vector<std::string> DomainSchema::prompt_names() const {
  std::vector<std::string> out;
  for (const auto& d : domains_) {
    out.push_back(d.prompt_name());
  }
  return out;
}

const std::vector<std::string>& labels_for_domain(const DomainSchema& schema,
                                                  std::string_view domain) {
  return schema.labels_for_domain(domain);
}

const Table& Dataset::table(std::string_view table_id) const {
  for (const auto& t : tables) {
    if (t.table_id == table_id) {
      return t;
    }
  }
  throw LookupError("unknown table '" + std::string(table_id) + "'");
}

std::size_t Dataset::annotated_column_count() const {
  std::size_t n = 0;
  for (const auto& t : tables) {
    for (const auto& c : t.columns) {
      n += c.gold_label.has_value() ? 1 : 0;
    }
  }
  return n;
}

std::optional<std::string> Dataset::domain_of(const Table& t) const {
  if (auto it = gold_domain.find(t.table_id); it != gold_domain.end()) {
    return it->second;
  }
  std::vector<std::string> gold;
  for (const auto& c : t.columns) {
    if (c.gold_label) {
      gold.push_back(*c.gold_label);
    }
  }
  if (gold.empty()) {
    return std::nullopt;
  }
  for (const auto& d : schema.domains()) {
    bool covers = std::all_of(gold.begin(), gold.end(), [&](const std::string& g) {
      return std::find(d.labels.begin(), d.labels.end(), g) != d.labels.end();
    });
    if (covers) {
      return d.name;
    }
  }
  return std::nullopt;
}

void validate_dataset(const Dataset& dataset) {
  std::vector<std::string> offences;
  if (dataset.tables.empty()) {
    throw ValidationError("no tables");
  }
  std::set<std::string> ids;
  for (const auto& t : dataset.tables) {
    if (!valid_table_id(t.table_id)) {
      offences.push_back("invalid table id '" + t.table_id + "'");
    }
    if (!ids.insert(t.table_id).second) {
      offences.push_back("duplicate table id '" + t.table_id + "'");
    }
    if (t.columns.empty()) {
      offences.push_back("table '" + t.table_id + "' has no columns");
    }
    if (t.n_rows == 0) {
      offences.push_back("table '" + t.table_id + "' has no rows");
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      const auto& c = t.columns[i];
      if (c.index != i) {
        offences.push_back("table '" + t.table_id + "' column " + std::to_string(i) +
                           " carries index " + std::to_string(c.index));
      }
      if (c.values.size() != t.n_rows) {
        offences.push_back("table '" + t.table_id + "' column " + std::to_string(i) + " has " +
                           std::to_string(c.values.size()) + " values, expected " +
                           std::to_string(t.n_rows));
      }
      if (c.gold_label && !dataset.vocabulary.contains(*c.gold_label)) {
        offences.push_back("table '" + t.table_id + "' column " + std::to_string(i) +
                           " has unknown label '" + *c.gold_label + "'");
      }
    }
  }
  for (const auto& [table_id, domain] : dataset.gold_domain) {
    if (ids.count(table_id) == 0) {
      offences.push_back("gold domain for unknown table '" + table_id + "'");
    }
    if (!dataset.schema.has_domain(domain)) {
      offences.push_back("table '" + table_id + "' has unknown gold domain '" + domain + "'");
    }
  }
  if (!offences.empty()) {
    throw ValidationError("dataset validation failed:" + join_offences(offences));
  }
}

Schema load_schema(const fs::path& schema_dir) {
  auto labels_json = parse_json_file<json>(schema_dir / "labels.json");
  auto synonyms_json = parse_json_file<ordered_json>(schema_dir / "synonyms.json");
  auto domains_json = parse_json_file<ordered_json>(schema_dir / "domains.json");

  std::vector<std::string> labels;
  std::vector<std::pair<std::string, std::string>> synonyms;
  std::vector<Domain> domains;
  try {
    labels = labels_json.at("labels").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw LoadError("malformed " + (schema_dir / "labels.json").string() + ": " + e.what());
  }
  try {
    for (const auto& [synonym, label] : synonyms_json.items()) {
      synonyms.emplace_back(synonym, label.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw LoadError("malformed " + (schema_dir / "synonyms.json").string() + ": " + e.what());
  }
  try {
    for (const auto& d : domains_json.at("domains")) {
      Domain domain;
      domain.name = d.at("name").get<std::string>();
      if (d.contains("aliases")) {
        domain.aliases = d.at("aliases").get<std::vector<std::string>>();
      }
      domain.labels = d.at("labels").get<std::vector<std::string>>();
      domains.push_back(std::move(domain));
    }
  } catch (const ordered_json::exception& e) {
    throw LoadError("malformed " + (schema_dir / "domains.json").string() + ": " + e.what());
  }

  Schema schema;
  schema.vocabulary = LabelVocabulary(std::move(labels), std::move(synonyms));
  schema.domains = DomainSchema(std::move(domains), schema.vocabulary);
  return schema;
}

Dataset load_dataset(const fs::path& path, Split split) {
  fs::path split_dir = path;
  if (fs::exists(path / to_string(split) / "manifest.json")) {
    split_dir = path / to_string(split);
  }
  fs::path schema_dir = split_dir / "schema";
  if (!fs::exists(schema_dir / "labels.json")) {
    schema_dir = path / "schema";
  }

  Dataset dataset;
  dataset.split = split;
  Schema schema = load_schema(schema_dir);
  dataset.vocabulary = std::move(schema.vocabulary);
  dataset.schema = std::move(schema.domains);

  const fs::path manifest_path = split_dir / "manifest.json";
  auto manifest = parse_json_file<json>(manifest_path);
  std::vector<std::string> offences;
  try {
    if (manifest.contains("split")) {
      auto declared = manifest.at("split").get<std::string>();
      if (declared != to_string(split)) {
        throw ValidationError(manifest_path.string() + " declares split '" + declared +
                              "', expected '" + std::string(to_string(split)) + "'");
      }
    }
    const auto& entries = manifest.at("tables");
    if (entries.empty()) {
      throw ValidationError("no tables");
    }
    for (const auto& entry : entries) {
      Table table;
      table.table_id = entry.at("table_id").get<std::string>();
      fs::path file = split_dir / entry.at("file").get<std::string>();
      auto rows = csv::parse(read_file(file));
      if (rows.empty()) {
        throw LoadError("table file " + file.string() + " has no rows");
      }
      const std::size_t width = rows.front().size();
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
          throw LoadError("table file " + file.string() + " row " + std::to_string(r + 1) +
                          " has " + std::to_string(rows[r].size()) + " cells, expected " +
                          std::to_string(width));
        }
      }
      table.n_rows = rows.size();
      table.columns.resize(width);
      for (std::size_t c = 0; c < width; ++c) {
        table.columns[c].index = c;
        table.columns[c].values.reserve(rows.size());
        for (const auto& row : rows) {
          table.columns[c].values.push_back(row[c]);
        }
      }
      if (entry.contains("n_rows") && entry.at("n_rows").get<std::size_t>() != table.n_rows) {
        offences.push_back("manifest row count for '" + table.table_id + "' is " +
                           std::to_string(entry.at("n_rows").get<std::size_t>()) + ", file has " +
                           std::to_string(table.n_rows));
      }
      if (entry.contains("n_columns") &&
          entry.at("n_columns").get<std::size_t>() != table.n_columns()) {
        offences.push_back("manifest column count for '" + table.table_id + "' is " +
                           std::to_string(entry.at("n_columns").get<std::size_t>()) +
                           ", file has " + std::to_string(table.n_columns()));
      }
      dataset.tables.push_back(std::move(table));
    }
  } catch (const json::exception& e) {
    throw LoadError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < dataset.tables.size(); ++i) {
    position.emplace(dataset.tables[i].table_id, i);
  }

  const fs::path annotations_path = split_dir / "annotations.csv";
  auto annotation_rows = csv::parse(read_file(annotations_path));
  if (annotation_rows.empty() || annotation_rows.front() != csv::Row{"table_id", "column_index", "label"}) {
    throw LoadError(annotations_path.string() + ": expected header table_id,column_index,label");
  }
  for (std::size_t r = 1; r < annotation_rows.size(); ++r) {
    const auto& row = annotation_rows[r];
    const std::string where = "annotations.csv line " + std::to_string(r + 1);
    if (row.size() != 3) {
      offences.push_back(where + ": expected 3 fields");
      continue;
    }
    auto it = position.find(row[0]);
    if (it == position.end()) {
      offences.push_back(where + ": unknown table '" + row[0] + "'");
      continue;
    }
    std::size_t column_index = 0;
    try {
      std::size_t consumed = 0;
      column_index = std::stoul(row[1], &consumed);
      if (consumed != row[1].size()) {
        throw std::invalid_argument(row[1]);
      }
    } catch (const std::exception&) {
      offences.push_back(where + ": bad column index '" + row[1] + "'");
      continue;
    }
    Table& table = dataset.tables[it->second];
    if (column_index >= table.n_columns()) {
      offences.push_back(where + ": column " + std::to_string(column_index) + " out of range for '" +
                         row[0] + "' with " + std::to_string(table.n_columns()) + " columns");
      continue;
    }
    auto label = dataset.vocabulary.find_label(row[2]);
    if (!label) {
      offences.push_back(where + ": unknown label '" + row[2] + "'");
      continue;
    }
    auto& gold = table.columns[column_index].gold_label;
    if (gold && *gold != *label) {
      offences.push_back(where + ": conflicting labels for '" + row[0] + "' column " + row[1]);
      continue;
    }
    gold = *label;
  }

  const fs::path domains_gold_path = split_dir / "domains_gold.csv";
  if (fs::exists(domains_gold_path)) {
    auto rows = csv::parse(read_file(domains_gold_path));
    if (rows.empty() || rows.front() != csv::Row{"table_id", "domain"}) {
      throw LoadError(domains_gold_path.string() + ": expected header table_id,domain");
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != 2) {
        offences.push_back("domains_gold.csv line " + std::to_string(r + 1) + ": expected 2 fields");
        continue;
      }
      std::string domain = rows[r][1];
      if (dataset.schema.has_domain(domain)) {
        domain = dataset.schema.domain(domain).name;
      }
      dataset.gold_domain[rows[r][0]] = domain;
    }
  }

  if (!offences.empty()) {
    throw ValidationError("dataset validation failed:" + join_offences(offences));
  }
  validate_dataset(dataset);
  return dataset;
}

void write_dataset(const Dataset& dataset, const fs::path& split_dir) {
  validate_dataset(dataset);
  fs::create_directories(split_dir / "tables");
  fs::create_directories(split_dir / "schema");

  ordered_json manifest;
  manifest["split"] = std::string(to_string(dataset.split));
  manifest["tables"] = ordered_json::array();
  std::string annotations = csv::format_row({"table_id", "column_index", "label"});
  for (const auto& t : dataset.tables) {
    std::string file = "tables/" + t.table_id + ".csv";
    manifest["tables"].push_back({{"table_id", t.table_id},
                                  {"file", file},
                                  {"n_rows", t.n_rows},
                                  {"n_columns", t.n_columns()}});
    std::string body;
    for (std::size_t r = 0; r < t.n_rows; ++r) {
      csv::Row row;
      for (const auto& c : t.columns) {
        row.push_back(c.values[r]);
      }
      body += csv::format_row(row);
    }
    write_file(split_dir / file, body);
    for (const auto& c : t.columns) {
      if (c.gold_label) {
        annotations += csv::format_row({t.table_id, std::to_string(c.index), *c.gold_label});
      }
    }
  }
  write_file(split_dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(split_dir / "annotations.csv", annotations);

  if (!dataset.gold_domain.empty()) {
    std::string body = csv::format_row({"table_id", "domain"});
    for (const auto& [table_id, domain] : dataset.gold_domain) {
      body += csv::format_row({table_id, domain});
    }
    write_file(split_dir / "domains_gold.csv", body);
  }

  ordered_json labels;
  labels["labels"] = dataset.vocabulary.labels();
  write_file(split_dir / "schema" / "labels.json", labels.dump(2) + "\n");
  ordered_json synonyms = ordered_json::object();
  for (const auto& [synonym, label] : dataset.vocabulary.synonyms()) {
    synonyms[synonym] = label;
  }
  write_file(split_dir / "schema" / "synonyms.json", synonyms.dump(2) + "\n");
  ordered_json domains;
  domains["domains"] = ordered_json::array();
  for (const auto& d : dataset.schema.domains()) {
    domains["domains"].push_back({{"name", d.name}, {"aliases", d.aliases}, {"labels", d.labels}});
  }
  write_file(split_dir / "schema" / "domains.json", domains.dump(2) + "\n");
}

Table head_rows(const Table& table, std::size_t n) {
  if (n == 0) {
    throw ArgumentError("head_rows: n must be at least 1");
  }
  Table out = table;
  out.n_rows = std::min(n, table.n_rows);
  for (auto& c : out.columns) {
    c.values.resize(std::min(out.n_rows, c.values.size()));
  }
  return out;
}

}  // namespace tablesage
