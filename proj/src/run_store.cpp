#include "tablesage/run_store.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "tablesage/csv.hpp"
#include "tablesage/errors.hpp"
#include "tablesage/io.hpp"

namespace tablesage {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::set<std::string, std::less<>> kConfigKeys = {
    "format",      "inst",         "roles",       "shots",          "n_rows",
    "runs",        "seeds",        "two_step",    "model",          "temperature",
    "parallelism", "backend",      "endpoint",    "corruption_rate", "noise_seed",
    "transcript",  "lenient_replay", "token_limit", "cell_cap",     "timeout_seconds"};

ordered_json scores_json(const MicroScores& s) {
  return {{"precision", to_percent(s.precision)},
          {"recall", to_percent(s.recall)},
          {"f1", to_percent(s.f1)}};
}

template <typename T>
T get_as(const json& doc, std::string_view key) {
  try {
    return doc.at(std::string(key)).get<T>();
  } catch (const json::exception&) {
    throw ArgumentError("config key '" + std::string(key) + "' has the wrong type");
  }
}

double get_number(const json& doc, std::string_view key, const std::string& run) {
  auto it = doc.find(std::string(key));
  if (it == doc.end() || !it->is_number()) {
    throw LoadError("run '" + run + "': metrics.json lacks numeric '" + std::string(key) + "'");
  }
  return it->get<double>();
}

}  // namespace

std::string experiment_label(const ExperimentConfig& config) {
  std::string label;
  if (config.two_step) {
    label = "two-step";
  } else {
    label = std::string(to_string(config.prompt.format));
    if (config.prompt.use_instructions) {
      label += "+inst";
    }
    if (config.prompt.use_roles) {
      label += "+roles";
    }
  }
  return label + ", " + std::to_string(config.prompt.shots) + "-shot";
}

std::string results_csv(const std::vector<RunResult>& results) {
  std::string out(kResultsHeader);
  out += "\n";
  for (const auto& r : results) {
    for (const auto& rec : r.records) {
      out += csv::format_row({std::to_string(rec.run), rec.table_id,
                              std::to_string(rec.column_index), rec.gold,
                              std::string(to_string(rec.outcome.kind)),
                              rec.outcome.label.value_or(""), rec.outcome.raw});
    }
  }
  return out;
}

std::vector<ColumnRecord> parse_results_csv(std::string_view content) {
  auto rows = csv::parse(content);
  if (rows.empty() || csv::format_row(rows.front()) != std::string(kResultsHeader) + "\n") {
    throw LoadError("results.csv: expected header '" + std::string(kResultsHeader) + "'");
  }
  std::vector<ColumnRecord> records;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 7) {
      throw LoadError("results.csv line " + std::to_string(i + 1) + ": expected 7 fields, got " +
                      std::to_string(row.size()));
    }
    ColumnRecord rec;
    try {
      rec.run = std::stoul(row[0]);
      rec.column_index = std::stoul(row[2]);
      rec.outcome.kind = parse_outcome_kind(row[4]);
    } catch (const std::exception& e) {
      throw LoadError("results.csv line " + std::to_string(i + 1) + ": " + e.what());
    }
    rec.table_id = row[1];
    rec.gold = row[3];
    if (!row[5].empty()) {
      rec.outcome.label = row[5];
    }
    rec.outcome.raw = row[6];
    records.push_back(std::move(rec));
  }
  return records;
}

std::string metrics_json(std::string_view label, const std::vector<RunResult>& results) {
  AggregateMetrics agg = aggregate_runs(results);
  ordered_json doc;
  doc["experiment"] = label;
  doc["n_runs"] = results.size();
  doc.update(scores_json(agg.mean));
  if (agg.mean_step1_f1) {
    doc["step1_f1"] = to_percent(*agg.mean_step1_f1);
  }

  std::vector<ColumnRecord> pooled;
  double oov_raw = 0.0;
  double oov_recovered = 0.0;
  ordered_json runs = ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RunResult& r = results[i];
    const RunMetrics& m = agg.runs[i];
    ordered_json run;
    run["run"] = m.run;
    run["seed"] = m.seed;
    run.update(scores_json(m.scores));
    if (m.step1) {
      run["step1_f1"] = to_percent(m.step1->f1);
    }
    run["n_total"] = m.eval.n_total;
    run["n_predicted"] = m.eval.n_predicted;
    run["n_correct"] = m.eval.n_correct;
    run["n_synonym"] = m.eval.n_synonym;
    run["n_idk"] = m.eval.n_idk;
    run["n_oov"] = m.eval.n_oov;
    run["n_missing"] = m.eval.n_missing;
    run["oov_raw"] = m.oov.n_oov_raw;
    run["oov_recovered"] = m.oov.n_recovered;
    run["n_requests"] = r.n_requests;
    run["n_failed_units"] = r.n_failed_units;
    run["n_transport_failures"] = r.n_transport_failures;
    run["n_budget_failures"] = r.n_budget_failures;
    run["n_count_mismatches"] = r.n_count_mismatches;
    if (!r.domains.empty()) {
      std::size_t fallbacks = 0;
      for (const auto& d : r.domains) {
        fallbacks += d.fallback ? 1 : 0;
      }
      run["n_domain_fallbacks"] = fallbacks;
    }
    runs.push_back(std::move(run));
    oov_raw += static_cast<double>(m.oov.n_oov_raw);
    oov_recovered += static_cast<double>(m.oov.n_recovered);
    pooled.insert(pooled.end(), r.records.begin(), r.records.end());
  }
  const double n = static_cast<double>(results.size());
  doc["oov"] = {{"raw_mean", round2(oov_raw / n)}, {"recovered_mean", round2(oov_recovered / n)}};
  ordered_json per_label = ordered_json::object();
  for (const auto& [name, f1] : per_label_f1(pooled)) {
    per_label[name] = to_percent(f1);
  }
  doc["per_label_f1"] = std::move(per_label);
  doc["runs"] = std::move(runs);
  return doc.dump(2) + "\n";
}

std::string config_json(const ExperimentConfig& config) {
  ordered_json doc;
  doc["format"] = to_string(config.prompt.format);
  doc["inst"] = config.prompt.use_instructions;
  doc["roles"] = config.prompt.use_roles;
  doc["shots"] = config.prompt.shots;
  doc["n_rows"] = config.prompt.n_rows;
  doc["runs"] = config.n_runs;
  doc["seeds"] = config.effective_seeds();
  doc["two_step"] = config.two_step;
  doc["model"] = config.model_name;
  doc["temperature"] = config.temperature;
  doc["parallelism"] = config.parallelism;
  doc["backend"] = to_string(config.backend.kind);
  if (config.backend.kind == BackendKind::kHttp) {
    doc["endpoint"] = config.backend.endpoint;
    doc["timeout_seconds"] = config.backend.timeout.count();
  }
  if (config.backend.kind == BackendKind::kNoisyOracle) {
    doc["corruption_rate"] = config.backend.corruption_rate;
    doc["noise_seed"] = config.backend.noise_seed;
  }
  if (config.backend.kind == BackendKind::kScripted) {
    doc["transcript"] = config.backend.transcript_path.generic_string();
    doc["lenient_replay"] = config.backend.lenient_replay;
  }
  doc["token_limit"] = config.backend.token_limit;
  doc["cell_cap"] = config.prompt.serialize.cell_cap;
  return doc.dump(2) + "\n";
}

ExperimentConfig apply_config_json(std::string_view content, ExperimentConfig base) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ArgumentError("config must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (kConfigKeys.count(key) == 0) {
      throw ArgumentError("unknown config key '" + key + "'");
    }
  }
  auto has = [&](const char* key) { return doc.contains(key); };
  if (has("format")) base.prompt.format = parse_format(get_as<std::string>(doc, "format"));
  if (has("inst")) base.prompt.use_instructions = get_as<bool>(doc, "inst");
  if (has("roles")) base.prompt.use_roles = get_as<bool>(doc, "roles");
  if (has("shots")) base.prompt.shots = get_as<std::size_t>(doc, "shots");
  if (has("n_rows")) base.prompt.n_rows = get_as<std::size_t>(doc, "n_rows");
  if (has("runs")) base.n_runs = get_as<std::size_t>(doc, "runs");
  if (has("seeds")) base.seeds = get_as<std::vector<std::uint64_t>>(doc, "seeds");
  if (has("two_step")) base.two_step = get_as<bool>(doc, "two_step");
  if (has("model")) base.model_name = get_as<std::string>(doc, "model");
  if (has("temperature")) base.temperature = get_as<double>(doc, "temperature");
  if (has("parallelism")) base.parallelism = get_as<std::size_t>(doc, "parallelism");
  if (has("backend")) base.backend.kind = parse_backend_kind(get_as<std::string>(doc, "backend"));
  if (has("endpoint")) base.backend.endpoint = get_as<std::string>(doc, "endpoint");
  if (has("timeout_seconds")) {
    base.backend.timeout = std::chrono::seconds(get_as<long>(doc, "timeout_seconds"));
  }
  if (has("corruption_rate")) base.backend.corruption_rate = get_as<double>(doc, "corruption_rate");
  if (has("noise_seed")) base.backend.noise_seed = get_as<std::uint64_t>(doc, "noise_seed");
  if (has("transcript")) base.backend.transcript_path = get_as<std::string>(doc, "transcript");
  if (has("lenient_replay")) base.backend.lenient_replay = get_as<bool>(doc, "lenient_replay");
  if (has("token_limit")) base.backend.token_limit = get_as<std::size_t>(doc, "token_limit");
  if (has("cell_cap")) base.prompt.serialize.cell_cap = get_as<std::size_t>(doc, "cell_cap");
  // A one-shot seed list recorded by config_json for a zero-shot run must not
  // conflict with a larger runs value.
  if (base.prompt.shots == 0 && base.seeds.size() == 1 && base.n_runs != 1) {
    base.seeds.clear();
  }
  return base;
}

std::string per_label_csv(const std::map<std::string, double>& f1) {
  std::string out = "label,f1\n";
  for (const auto& [label, value] : f1) {
    out += csv::format_row({label, format_percent(value)});
  }
  return out;
}

void write_run_dir(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const std::vector<RunResult>& results, const Transcript* transcript) {
  write_file(dir / "config.json", config_json(config));
  write_file(dir / "results.csv", results_csv(results));
  write_file(dir / "metrics.json", metrics_json(experiment_label(config), results));
  std::vector<ColumnRecord> pooled;
  for (const auto& r : results) {
    pooled.insert(pooled.end(), r.records.begin(), r.records.end());
  }
  std::map<std::string, double> f1;
  for (const auto& [label, value] : per_label_f1(pooled)) {
    f1[label] = value * 100.0;
  }
  write_file(dir / "per_label_f1.csv", per_label_csv(f1));
  if (transcript != nullptr && !transcript->empty()) {
    transcript->save(dir / "transcript.jsonl");
  }
}

RunSummary load_run_summary(const std::filesystem::path& dir) {
  RunSummary s;
  s.name = dir.filename().string();
  if (s.name.empty()) {
    s.name = dir.parent_path().filename().string();
  }
  const auto path = dir / "metrics.json";
  if (!std::filesystem::exists(path)) {
    throw LoadError("run '" + s.name + "': missing metrics.json");
  }
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw LoadError("run '" + s.name + "': malformed metrics.json: " + e.what());
  }
  if (!doc.is_object()) {
    throw LoadError("run '" + s.name + "': metrics.json is not an object");
  }
  s.label = doc.value("experiment", s.name);
  s.n_runs = doc.value("n_runs", std::size_t{1});
  s.precision = get_number(doc, "precision", s.name);
  s.recall = get_number(doc, "recall", s.name);
  s.f1 = get_number(doc, "f1", s.name);
  if (doc.contains("step1_f1")) {
    s.step1_f1 = get_number(doc, "step1_f1", s.name);
  }
  if (auto it = doc.find("oov"); it != doc.end() && it->is_object()) {
    s.oov_raw_mean = it->value("raw_mean", 0.0);
    s.oov_recovered_mean = it->value("recovered_mean", 0.0);
  }
  if (auto it = doc.find("per_label_f1"); it != doc.end() && it->is_object()) {
    for (const auto& [label, value] : it->items()) {
      if (value.is_number()) {
        s.per_label_f1[label] = value.get<double>();
      }
    }
  }
  return s;
}

}  // namespace tablesage
