#include <gtest/gtest.h>

#include <set>

#include "tablesage/errors.hpp"
#include "tablesage/pipeline.hpp"
#include "test_support.hpp"

namespace tablesage {
namespace {

using testing::LambdaBackend;

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    test_ = new Dataset(testing::load_mini(Split::kTest));
    train_ = new Dataset(testing::load_mini(Split::kTrain));
  }
  static void TearDownTestSuite() {
    delete test_;
    delete train_;
  }

  static ExperimentConfig config(InputFormat format, std::size_t shots, std::size_t runs = 3) {
    ExperimentConfig c;
    c.prompt.format = format;
    c.prompt.use_instructions = true;
    c.prompt.use_roles = true;
    c.prompt.shots = shots;
    c.n_runs = runs;
    return c;
  }

  static Dataset* test_;
  static Dataset* train_;
};

Dataset* PipelineTest::test_ = nullptr;
Dataset* PipelineTest::train_ = nullptr;

TEST_F(PipelineTest, CallCountLaw) {
  const std::size_t columns = test_->annotated_column_count();
  const std::size_t tables = test_->tables.size();
  struct Case {
    InputFormat format;
    std::size_t shots;
    bool two_step;
    std::size_t expected;
  };
  for (const Case& c : {Case{InputFormat::kColumn, 0, false, columns},
                        Case{InputFormat::kText, 1, false, 3 * columns},
                        Case{InputFormat::kTable, 0, false, tables},
                        Case{InputFormat::kTable, 1, false, 3 * tables},
                        Case{InputFormat::kTable, 0, true, 2 * tables},
                        Case{InputFormat::kTable, 1, true, 3 * 2 * tables}}) {
    auto cfg = config(c.format, c.shots);
    cfg.two_step = c.two_step;
    LambdaBackend backend(testing::oracle_answer);
    auto results = run_experiment(*test_, *train_, cfg, backend);
    std::size_t reported = 0;
    for (const auto& r : results) {
      reported += r.n_requests;
    }
    EXPECT_EQ(backend.requests().size(), c.expected) << to_string(c.format) << " " << c.shots;
    EXPECT_EQ(reported, c.expected);
    EXPECT_EQ(results.size(), c.shots == 0 ? 1u : 3u);
  }
}

TEST_F(PipelineTest, OracleScoresPerfectly) {
  for (InputFormat format : {InputFormat::kColumn, InputFormat::kText, InputFormat::kTable}) {
    OracleBackend oracle;
    auto results = annotate(*test_, *train_, config(format, 1), oracle);
    auto agg = aggregate_runs(results);
    EXPECT_EQ(to_percent(agg.mean.f1), 100.0) << to_string(format);
    for (const auto& r : results) {
      EXPECT_EQ(r.records.size(), test_->annotated_column_count());
      EXPECT_TRUE(std::is_sorted(r.records.begin(), r.records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.table_id, a.column_index) < std::tie(b.table_id, b.column_index);
      }));
    }
  }
}

TEST_F(PipelineTest, TwoStepOffersOnlyTheDomainSubset) {
  LambdaBackend backend(testing::oracle_answer);
  auto cfg = config(InputFormat::kTable, 1);
  cfg.two_step = true;
  auto results = two_step_annotate(*test_, *train_, cfg, backend);
  for (const auto& r : results) {
    EXPECT_EQ(to_percent(domain_scores(r.domains).f1), 100.0);
    EXPECT_EQ(to_percent(compute_micro(r.records).f1), 100.0);
  }
  std::size_t step2 = 0;
  for (const auto& request : backend.requests()) {
    if (!request.request_id.ends_with("/columns")) {
      continue;
    }
    ++step2;
    const std::string table_id =
        request.request_id.substr(request.request_id.find('/') + 1,
                                  request.request_id.rfind('/') - request.request_id.find('/') - 1);
    const auto& subset = test_->schema.labels_for_domain(test_->gold_domain.at(table_id));
    EXPECT_EQ(testing::offered_labels(request.messages), subset) << request.request_id;
    std::set<std::string> allowed(subset.begin(), subset.end());
    for (const auto& m : request.messages) {
      if (m.role != Role::kAssistant) {
        continue;
      }
      for (const auto& part : text::split(m.content, ',')) {
        EXPECT_EQ(allowed.count(text::trim(part)), 1u) << m.content;
      }
    }
  }
  EXPECT_EQ(step2, 3 * test_->tables.size());
}

TEST_F(PipelineTest, WrongDomainRestrictsToThatDomain) {
  LambdaBackend backend([](const ChatRequest& r) {
    if (r.request_id.ends_with("test_hotels_01/domain")) {
      return std::string("events");
    }
    return testing::oracle_answer(r);
  });
  auto cfg = config(InputFormat::kTable, 0);
  cfg.two_step = true;
  auto results = two_step_annotate(*test_, *train_, cfg, backend);
  ASSERT_EQ(results.size(), 1u);
  const auto& domains = results[0].domains;
  auto it = std::find_if(domains.begin(), domains.end(),
                         [](const DomainRecord& d) { return d.table_id == "test_hotels_01"; });
  ASSERT_NE(it, domains.end());
  EXPECT_EQ(it->predicted_domain, "Events");
  EXPECT_EQ(it->gold_domain, "Hotels");
  EXPECT_FALSE(it->fallback);
  EXPECT_EQ(it->label_list, test_->schema.labels_for_domain("Events"));
  const std::set<std::string> events(it->label_list.begin(), it->label_list.end());
  for (const auto& rec : results[0].records) {
    if (rec.table_id != "test_hotels_01") {
      continue;
    }
    if (rec.outcome.label) {
      EXPECT_EQ(events.count(*rec.outcome.label), 1u);
    }
    EXPECT_EQ(rec.correct(), events.count(rec.gold) == 1) << rec.gold;
  }
  EXPECT_LT(to_percent(domain_scores(domains).f1), 100.0);
}

TEST_F(PipelineTest, UnknownDomainFallsBackToFullList) {
  LambdaBackend backend([](const ChatRequest& r) {
    if (r.request_id.ends_with("/domain")) {
      return std::string("pizza parlours");
    }
    return testing::oracle_answer(r);
  });
  auto cfg = config(InputFormat::kTable, 1, 1);
  cfg.two_step = true;
  auto results = two_step_annotate(*test_, *train_, cfg, backend);
  ASSERT_EQ(results.size(), 1u);
  for (const auto& d : results[0].domains) {
    EXPECT_TRUE(d.fallback);
    EXPECT_FALSE(d.predicted_domain.has_value());
    EXPECT_EQ(d.label_list, test_->vocabulary.labels());
  }
  for (const auto& rec : results[0].records) {
    EXPECT_EQ(rec.note, "domain fallback: full label list");
    EXPECT_TRUE(rec.correct());
  }
}

TEST_F(PipelineTest, IsolationAndSplitChecks) {
  OracleBackend oracle;
  EXPECT_THROW(annotate(*train_, *train_, config(InputFormat::kColumn, 0), oracle), ArgumentError);
  Dataset leaky = *train_;
  leaky.tables.push_back(test_->tables.front());
  EXPECT_THROW(annotate(*test_, leaky, config(InputFormat::kColumn, 0), oracle), ValidationError);
  EXPECT_THROW(sample_demonstrations(*test_, 1, InputFormat::kColumn, 1), ArgumentError);
}

TEST_F(PipelineTest, DemonstrationsNeverComeFromTest) {
  std::set<std::string> test_payloads;
  for (const auto& t : test_->tables) {
    test_payloads.insert(serialize_table(t, kDefaultRows).payload);
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto demos = sample_demonstrations(*train_, 5, InputFormat::kTable, seed);
    ASSERT_EQ(demos.size(), 5u);
    std::set<std::string> distinct;
    for (const auto& d : demos) {
      EXPECT_EQ(test_payloads.count(d.input.payload), 0u);
      EXPECT_EQ(d.gold.size(), d.input.n_columns);
      distinct.insert(d.input.payload);
    }
    EXPECT_EQ(distinct.size(), 5u);
  }
  EXPECT_EQ(sample_demonstrations(*train_, 3, InputFormat::kColumn, 4),
            sample_demonstrations(*train_, 3, InputFormat::kColumn, 4));
  EXPECT_THROW(sample_demonstrations(*train_, 100, InputFormat::kColumn, 1), SamplingError);
  EXPECT_THROW(sample_demonstrations(*train_, 21, InputFormat::kTable, 1), SamplingError);
}

TEST_F(PipelineTest, ParallelismDoesNotChangeResults) {
  auto cfg = config(InputFormat::kColumn, 1);
  cfg.backend.kind = BackendKind::kNoisyOracle;
  NoisyOracleBackend serial_backend(test_->vocabulary, 0.3, 7);
  NoisyOracleBackend parallel_backend(test_->vocabulary, 0.3, 7);
  auto serial = annotate(*test_, *train_, cfg, serial_backend);
  cfg.parallelism = 4;
  auto parallel = annotate(*test_, *train_, cfg, parallel_backend);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t r = 0; r < serial.size(); ++r) {
    EXPECT_EQ(serial[r].records, parallel[r].records);
  }
  EXPECT_LT(to_percent(aggregate_runs(serial).mean.f1), 100.0);
}

TEST_F(PipelineTest, BudgetFailuresAreNeverSent) {
  auto cfg = config(InputFormat::kTable, 0);
  cfg.backend.token_limit = 50;
  LambdaBackend backend(testing::oracle_answer, 50);
  auto results = annotate(*test_, *train_, cfg, backend);
  EXPECT_TRUE(backend.requests().empty());
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].n_requests, 0u);
  EXPECT_EQ(results[0].n_budget_failures, test_->tables.size());
  EXPECT_EQ(results[0].n_failed_units, test_->tables.size());
  for (const auto& rec : results[0].records) {
    EXPECT_EQ(rec.outcome.kind, OutcomeKind::kMissing);
    EXPECT_NE(rec.note.find("token budget"), std::string::npos);
  }
}

TEST_F(PipelineTest, TransportFailuresBecomeMissing) {
  LambdaBackend backend([](const ChatRequest& r) -> std::string {
    if (r.request_id.ends_with("test_music_01")) {
      throw TransportError("HTTP 503");
    }
    return testing::oracle_answer(r);
  });
  auto results = annotate(*test_, *train_, config(InputFormat::kTable, 0), backend);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].n_transport_failures, 1u);
  EXPECT_EQ(results[0].n_failed_units, 1u);
  std::size_t missing = 0;
  for (const auto& rec : results[0].records) {
    if (rec.table_id == "test_music_01") {
      EXPECT_EQ(rec.outcome.kind, OutcomeKind::kMissing);
      ++missing;
    } else {
      EXPECT_TRUE(rec.correct());
    }
  }
  const auto& columns = test_->table("test_music_01").columns;
  EXPECT_EQ(missing, static_cast<std::size_t>(std::count_if(columns.begin(), columns.end(),
                                                            [](const Column& c) { return c.gold_label.has_value(); })));
}

TEST_F(PipelineTest, ConfigValidation) {
  auto cfg = config(InputFormat::kColumn, 0);
  cfg.two_step = true;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = config(InputFormat::kTable, 1);
  cfg.seeds = {5};
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg.seeds = {5, 6, 7};
  EXPECT_EQ(cfg.effective_seeds(), (std::vector<std::uint64_t>{5, 6, 7}));
  cfg.prompt.shots = 0;
  EXPECT_EQ(cfg.effective_seeds().size(), 1u);
  cfg.seeds.clear();
  cfg.prompt.shots = 2;
  EXPECT_EQ(cfg.effective_seeds(), (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST_F(PipelineTest, FirstPromptMatchesFirstRequest) {
  auto cfg = config(InputFormat::kTable, 1);
  LambdaBackend backend(testing::oracle_answer);
  annotate(*test_, *train_, cfg, backend);
  auto requests = backend.requests();
  auto first = std::min_element(requests.begin(), requests.end(),
                                [](const auto& a, const auto& b) { return a.sequence < b.sequence; });
  EXPECT_EQ(first_prompt(*test_, *train_, cfg), first->messages);
}

}  // namespace
}  // namespace tablesage
