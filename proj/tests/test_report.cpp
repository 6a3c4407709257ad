#include <gtest/gtest.h>

#include "json.hpp"
#include "tablesage/errors.hpp"
#include "tablesage/io.hpp"
#include "tablesage/report.hpp"
#include "tablesage/run_store.hpp"
#include "test_support.hpp"

namespace tablesage {
namespace {

ExperimentConfig table_config(std::size_t shots) {
  ExperimentConfig c;
  c.prompt.format = InputFormat::kTable;
  c.prompt.use_instructions = true;
  c.prompt.use_roles = true;
  c.prompt.shots = shots;
  return c;
}

std::vector<RunResult> noisy_results(const ExperimentConfig& config) {
  Dataset test = testing::load_mini(Split::kTest);
  Dataset train = testing::load_mini(Split::kTrain);
  NoisyOracleBackend backend(test.vocabulary, 0.3, 7);
  return run_experiment(test, train, config, backend);
}

RunSummary summary(const std::string& name, double f1, std::optional<double> step1 = std::nullopt) {
  RunSummary s;
  s.name = name;
  s.label = name + " label";
  s.n_runs = 1;
  s.precision = f1;
  s.recall = f1;
  s.f1 = f1;
  s.step1_f1 = step1;
  s.per_label_f1 = {{"Date", f1}};
  return s;
}

TEST(RunStore, ExperimentLabels) {
  EXPECT_EQ(experiment_label(table_config(0)), "table+inst+roles, 0-shot");
  auto c = table_config(1);
  c.two_step = true;
  EXPECT_EQ(experiment_label(c), "two-step, 1-shot");
  ExperimentConfig plain;
  EXPECT_EQ(experiment_label(plain), "column, 0-shot");
}

TEST(RunStore, ResultsCsvRoundTrips) {
  auto results = noisy_results(table_config(1));
  const std::string csv = results_csv(results);
  EXPECT_TRUE(csv.starts_with(std::string(kResultsHeader) + "\n"));
  auto parsed = parse_results_csv(csv);
  std::vector<ColumnRecord> flat;
  for (const auto& r : results) {
    for (auto rec : r.records) {
      rec.note.clear();
      flat.push_back(rec);
    }
  }
  ASSERT_EQ(parsed.size(), flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    EXPECT_EQ(parsed[i].run, flat[i].run);
    EXPECT_EQ(parsed[i].gold, flat[i].gold);
    EXPECT_EQ(parsed[i].outcome, flat[i].outcome) << i;
  }
  EXPECT_THROW(parse_results_csv("a,b\n"), LoadError);
}

TEST(RunStore, MetricsJsonAgreesWithMetrics) {
  auto results = noisy_results(table_config(1));
  auto doc = nlohmann::json::parse(metrics_json("x", results));
  auto agg = aggregate_runs(results);
  EXPECT_EQ(doc["experiment"], "x");
  EXPECT_EQ(doc["n_runs"], 3);
  EXPECT_EQ(doc["f1"].get<double>(), to_percent(agg.mean.f1));
  EXPECT_EQ(doc["runs"].size(), 3u);
  for (const auto& run : doc["runs"]) {
    EXPECT_EQ(run["n_total"].get<std::size_t>(), 57u);
  }
  EXPECT_EQ(metrics_json("x", results), metrics_json("x", noisy_results(table_config(1))));
}

TEST(RunStore, ConfigJsonRoundTrips) {
  auto config = table_config(1);
  config.backend.kind = BackendKind::kNoisyOracle;
  config.backend.corruption_rate = 0.3;
  config.backend.noise_seed = 7;
  config.seeds = {4, 5, 6};
  config.parallelism = 2;
  auto back = apply_config_json(config_json(config), ExperimentConfig{});
  EXPECT_EQ(config_json(back), config_json(config));
  EXPECT_EQ(back.backend.noise_seed, 7u);
  EXPECT_EQ(back.seeds, config.seeds);
  EXPECT_THROW(apply_config_json(R"({"formatt": "table"})", ExperimentConfig{}), ArgumentError);
  EXPECT_THROW(apply_config_json(R"({"shots": "five"})", ExperimentConfig{}), ArgumentError);
  EXPECT_EQ(config_json(config).find("api_key"), std::string::npos);
}

TEST(RunStore, WriteRunDirAndLoadSummary) {
  testing::TempDir dir;
  auto config = table_config(0);
  auto results = noisy_results(config);
  write_run_dir(dir / "run", config, results, nullptr);
  for (const char* f : {"config.json", "results.csv", "metrics.json", "per_label_f1.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "run" / f)) << f;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "run" / "transcript.jsonl"));
  auto s = load_run_summary(dir / "run");
  EXPECT_EQ(s.name, "run");
  EXPECT_EQ(s.label, "table+inst+roles, 0-shot");
  EXPECT_EQ(s.n_runs, 1u);
  EXPECT_EQ(s.f1, to_percent(aggregate_runs(results).mean.f1));
  EXPECT_TRUE(read_file(dir / "run" / "per_label_f1.csv").starts_with("label,f1\n"));
  try {
    load_run_summary(dir / "nothing");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("nothing"), std::string::npos);
  }
}

TEST(Report, SortsByF1WithDeltas) {
  auto report = render_report({summary("column", 45.85), summary("table", 85.25)}, "column", false);
  EXPECT_NE(report.find("## Experiments"), std::string::npos);
  EXPECT_LT(report.find("| table |"), report.find("| column |"));
  EXPECT_NE(report.find("+39.40"), std::string::npos);
  EXPECT_NE(report.find("## Per-label F1"), std::string::npos);
  EXPECT_NE(report.find("## Out-of-vocabulary answers"), std::string::npos);
  EXPECT_EQ(report.find("S1-F1"), std::string::npos);
  EXPECT_EQ(report.find("Published reference values"), std::string::npos);
}

TEST(Report, BaselineByLabelOrFirst) {
  auto runs = std::vector<RunSummary>{summary("a", 50), summary("b", 60, 70.0)};
  auto by_label = render_report(runs, "b label", false);
  EXPECT_NE(by_label.find("against `b`"), std::string::npos);
  EXPECT_NE(by_label.find("S1-F1"), std::string::npos);
  EXPECT_NE(render_report(runs, "", false).find("against `a`"), std::string::npos);
  EXPECT_THROW(render_report(runs, "zzz", false), ArgumentError);
  EXPECT_THROW(render_report({}, "", false), ArgumentError);
}

TEST(Report, ReferenceRowsAreSeparatedAndConsistent) {
  auto report = render_report({summary("a", 50)}, "", true);
  auto rule = report.find("\n---\n");
  ASSERT_NE(rule, std::string::npos);
  EXPECT_LT(rule, report.find("## Published reference values"));
  const auto& rows = published_reference_rows();
  ASSERT_FALSE(rows.empty());
  bool found = false;
  for (const auto& r : rows) {
    EXPECT_GE(r.f1, 0.0);
    EXPECT_LE(r.f1, 100.0);
    if (r.setup == "table+inst+roles" && r.shots == 0) {
      EXPECT_EQ(r.f1, 85.25);
      EXPECT_EQ(r.delta_f1, 39.40);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Report, BuildReportNamesMissingRun) {
  testing::TempDir dir;
  try {
    build_report({dir / "ghost"}, "", false);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

}  // namespace
}  // namespace tablesage
