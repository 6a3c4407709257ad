#include "tablesage/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "tablesage/errors.hpp"
#include "tablesage/text.hpp"

namespace tablesage {
namespace {

struct ColumnRef {
  const Table* table = nullptr;
  std::size_t column = 0;
};

bool has_content(const Column& column, std::size_t n_rows, std::size_t cell_cap) {
  const std::size_t used = std::min(n_rows, column.values.size());
  for (std::size_t r = 0; r < used; ++r) {
    if (!clean_cell(column.values[r], cell_cap).empty()) {
      return true;
    }
  }
  return false;
}

std::vector<ColumnRef> demo_columns(const Dataset& train, std::size_t n_rows,
                                    std::size_t cell_cap) {
  std::vector<ColumnRef> out;
  for (const auto& t : train.tables) {
    for (const auto& c : t.columns) {
      if (c.gold_label && has_content(c, n_rows, cell_cap)) {
        out.push_back({&t, c.index});
      }
    }
  }
  return out;
}

void require_train_split(const Dataset& train) {
  if (train.split != Split::kTrain) {
    throw ArgumentError("demonstrations must come from the training split");
  }
}

Demonstration column_demo(const ColumnRef& ref, InputFormat format, std::size_t n_rows,
                          const SerializeOptions& options) {
  const Column& column = ref.table->columns[ref.column];
  return {serialize_column(column, n_rows, format, options), {*column.gold_label}};
}

Demonstration table_demo(const Table& table, std::size_t n_rows, const SerializeOptions& options) {
  return {serialize_table(table, n_rows, options), table.gold_labels()};
}

std::vector<Demonstration> draw_column_demos(const std::vector<ColumnRef>& pool, std::size_t k,
                                             InputFormat format, Rng& rng, std::size_t n_rows,
                                             const SerializeOptions& options) {
  if (k > pool.size()) {
    throw SamplingError("cannot sample " + std::to_string(k) + " demonstrations from " +
                        std::to_string(pool.size()) + " training columns");
  }
  std::vector<Demonstration> out;
  for (std::size_t i : sample_indices(rng, pool.size(), k)) {
    out.push_back(column_demo(pool[i], format, n_rows, options));
  }
  return out;
}

std::vector<Demonstration> draw_table_demos(const std::vector<const Table*>& pool, std::size_t k,
                                            Rng& rng, std::size_t n_rows,
                                            const SerializeOptions& options,
                                            std::string_view what = "training tables") {
  if (k > pool.size()) {
    throw SamplingError("cannot sample " + std::to_string(k) + " demonstrations from " +
                        std::to_string(pool.size()) + " " + std::string(what));
  }
  std::vector<Demonstration> out;
  for (std::size_t i : sample_indices(rng, pool.size(), k)) {
    out.push_back(table_demo(*pool[i], n_rows, options));
  }
  return out;
}

std::vector<std::string> effective_labels(const ExperimentConfig& config, const Dataset& test) {
  return config.prompt.label_list.empty() ? test.vocabulary.labels() : config.prompt.label_list;
}

void check_isolation(const Dataset& test, const Dataset& train) {
  require_train_split(train);
  if (test.split != Split::kTest) {
    throw ArgumentError("annotation runs over the test split");
  }
  std::set<std::string> test_ids;
  for (const auto& t : test.tables) {
    test_ids.insert(t.table_id);
  }
  for (const auto& t : train.tables) {
    if (test_ids.count(t.table_id) != 0) {
      throw ValidationError("table '" + t.table_id + "' appears in both splits");
    }
  }
}

bool has_annotations(const Table& t) {
  return std::any_of(t.columns.begin(), t.columns.end(),
                     [](const Column& c) { return c.gold_label.has_value(); });
}

// Runs fn(i) for i in [0, n) on up to `parallelism` threads. The first
// exception thrown by any task is rethrown once all workers have stopped.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t parallelism, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (!stop.load()) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) {
          return;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          stop.store(true);
        }
      }
    });
  }
  for (auto& t : threads) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

// Result of sending one request: a response, or the reason there is none.
struct Exchange {
  std::optional<std::string> response;
  std::string note;
  bool transport_failure = false;
  bool budget_failure = false;
};

Exchange send_request(ChatBackend& backend, const ChatRequest& request) {
  Exchange ex;
  try {
    ex.response = backend.complete(request);
  } catch (const TokenBudgetError& e) {
    ex.note = e.what();
    ex.budget_failure = true;
  } catch (const TransportError& e) {
    ex.note = e.what();
    ex.transport_failure = true;
  }
  return ex;
}

ChatRequest make_request(const ExperimentConfig& config, std::string id, std::size_t sequence,
                         std::vector<Message> messages, OracleHint hint) {
  ChatRequest request;
  request.model_name = config.model_name;
  request.temperature = config.temperature;
  request.messages = std::move(messages);
  request.request_id = std::move(id);
  request.sequence = sequence;
  request.hint = std::move(hint);
  return request;
}

std::string run_prefix(std::size_t run) { return "run" + std::to_string(run) + "/"; }

void sort_records(std::vector<ColumnRecord>& records) {
  std::sort(records.begin(), records.end(), [](const ColumnRecord& a, const ColumnRecord& b) {
    return std::tie(a.table_id, a.column_index) < std::tie(b.table_id, b.column_index);
  });
}

void tally(RunResult& result, const Exchange& ex) {
  if (ex.transport_failure) {
    ++result.n_transport_failures;
  }
  if (ex.budget_failure) {
    ++result.n_budget_failures;
  }
  if (!ex.response) {
    ++result.n_failed_units;
  }
}

ColumnRecord missing_record(std::size_t run, const Table& table, const Column& column,
                            std::string note) {
  ColumnRecord rec;
  rec.run = run;
  rec.table_id = table.table_id;
  rec.column_index = column.index;
  rec.gold = *column.gold_label;
  rec.outcome = AnnotationOutcome{OutcomeKind::kMissing, std::nullopt, ""};
  rec.note = std::move(note);
  return rec;
}

// One planned single-step request. `plan_error` holds a budget failure found
// while building the prompt; such units are never sent.
struct Unit {
  const Table* table = nullptr;
  std::optional<std::size_t> column;
  ChatRequest request;
  std::string plan_error;
};

std::vector<Unit> plan_single_step(const Dataset& test, const Dataset& train,
                                   const ExperimentConfig& config, std::size_t run,
                                   std::uint64_t seed, std::size_t& sequence) {
  const PromptConfig& pc = config.prompt;
  PromptConfig prompt = pc;
  prompt.label_list = effective_labels(config, test);
  const std::size_t token_limit = config.backend.token_limit;
  Rng rng(seed);
  std::vector<Unit> units;

  if (pc.format == InputFormat::kTable) {
    auto pool = demo_tables(train);
    if (pc.shots > pool.size()) {
      throw SamplingError("cannot sample " + std::to_string(pc.shots) + " demonstrations from " +
                          std::to_string(pool.size()) + " training tables");
    }
    for (const auto& t : test.tables) {
      if (!has_annotations(t)) {
        continue;
      }
      Unit u;
      u.table = &t;
      auto demos = draw_table_demos(pool, pc.shots, rng, pc.n_rows, pc.serialize);
      OracleHint hint{t.gold_labels(), prompt.label_list};
      std::vector<Message> messages;
      try {
        messages = build_messages(prompt, demos, serialize_table(t, pc.n_rows, pc.serialize),
                                  token_limit);
      } catch (const TokenBudgetError& e) {
        u.plan_error = e.what();
      }
      u.request = make_request(config, run_prefix(run) + t.table_id, sequence++,
                               std::move(messages), std::move(hint));
      units.push_back(std::move(u));
    }
    return units;
  }

  auto pool = demo_columns(train, pc.n_rows, pc.serialize.cell_cap);
  if (pc.shots > pool.size()) {
    throw SamplingError("cannot sample " + std::to_string(pc.shots) + " demonstrations from " +
                        std::to_string(pool.size()) + " training columns");
  }
  SerializeOptions lenient = pc.serialize;
  lenient.strict = false;
  for (const auto& t : test.tables) {
    for (const auto& c : t.columns) {
      if (!c.gold_label) {
        continue;
      }
      Unit u;
      u.table = &t;
      u.column = c.index;
      auto demos = draw_column_demos(pool, pc.shots, pc.format, rng, pc.n_rows, pc.serialize);
      OracleHint hint{{*c.gold_label}, prompt.label_list};
      std::vector<Message> messages;
      try {
        messages = build_messages(prompt, demos, serialize_column(c, pc.n_rows, pc.format, lenient),
                                  token_limit);
      } catch (const TokenBudgetError& e) {
        u.plan_error = e.what();
      }
      u.request = make_request(config,
                               run_prefix(run) + t.table_id + "/" + std::to_string(c.index),
                               sequence++, std::move(messages), std::move(hint));
      units.push_back(std::move(u));
    }
  }
  return units;
}

// Demonstrations and prompt settings for the two steps of one table.
struct TwoStepUnit {
  const Table* table = nullptr;
  std::string gold_domain;
  std::vector<Demonstration> step1_demos;
  // Step-2 demos per domain name, plus the fallback set under "".
  std::map<std::string, std::vector<Demonstration>> step2_demos;
  std::size_t sequence = 0;
};

PromptConfig step1_config(const ExperimentConfig& config, const Dataset& test) {
  PromptConfig p = config.prompt;
  p.format = InputFormat::kTable;
  p.task = PromptTask::kTableDomain;
  p.label_list = test.schema.prompt_names();
  return p;
}

std::vector<TwoStepUnit> plan_two_step(const Dataset& test, const Dataset& train,
                                       const ExperimentConfig& config, std::uint64_t seed,
                                       std::size_t& sequence) {
  const PromptConfig& pc = config.prompt;
  Rng rng(seed);

  // Step-1 demos are (table, domain) pairs; any training table with a known
  // domain qualifies.
  std::vector<const Table*> domain_pool;
  std::vector<std::string> domain_pool_names;
  for (const auto& t : train.tables) {
    if (auto d = train.domain_of(t)) {
      domain_pool.push_back(&t);
      domain_pool_names.push_back(*d);
    }
  }
  std::map<std::string, std::vector<const Table*>> by_domain;
  for (const auto& d : test.schema.domains()) {
    by_domain[d.name];
  }
  auto all_tables = demo_tables(train);
  for (const Table* t : all_tables) {
    if (auto d = train.domain_of(*t)) {
      by_domain[*d].push_back(t);
    }
  }
  if (pc.shots > domain_pool.size()) {
    throw SamplingError("cannot sample " + std::to_string(pc.shots) +
                        " domain demonstrations from " + std::to_string(domain_pool.size()) +
                        " training tables with a known domain");
  }
  for (const auto& [domain, pool] : by_domain) {
    if (pc.shots > pool.size()) {
      throw SamplingError("cannot sample " + std::to_string(pc.shots) + " demonstrations from " +
                          std::to_string(pool.size()) + " training tables of domain '" + domain +
                          "'");
    }
  }
  if (pc.shots > all_tables.size()) {
    throw SamplingError("cannot sample " + std::to_string(pc.shots) + " demonstrations from " +
                        std::to_string(all_tables.size()) + " training tables");
  }

  std::vector<TwoStepUnit> units;
  for (const auto& t : test.tables) {
    if (!has_annotations(t)) {
      continue;
    }
    TwoStepUnit u;
    u.table = &t;
    u.gold_domain = test.domain_of(t).value_or("");
    for (std::size_t i : sample_indices(rng, domain_pool.size(), pc.shots)) {
      const std::string& name = domain_pool_names[i];
      u.step1_demos.push_back({serialize_table(*domain_pool[i], pc.n_rows, pc.serialize),
                               {train.schema.domain(name).prompt_name()}});
    }
    for (const auto& d : test.schema.domains()) {
      u.step2_demos[d.name] =
          draw_table_demos(by_domain[d.name], pc.shots, rng, pc.n_rows, pc.serialize);
    }
    u.step2_demos[""] = draw_table_demos(all_tables, pc.shots, rng, pc.n_rows, pc.serialize);
    u.sequence = sequence;
    sequence += 2;
    units.push_back(std::move(u));
  }
  return units;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_runs == 0) {
    throw ArgumentError("at least one run is required");
  }
  if (!seeds.empty() && seeds.size() != n_runs) {
    throw ArgumentError("got " + std::to_string(seeds.size()) + " seeds for " +
                        std::to_string(n_runs) + " runs");
  }
  if (parallelism == 0) {
    throw ArgumentError("parallelism must be at least 1");
  }
  if (prompt.n_rows == 0) {
    throw ArgumentError("n_rows must be at least 1");
  }
  if (temperature < 0.0) {
    throw ArgumentError("temperature must be non-negative");
  }
  if (two_step && prompt.format != InputFormat::kTable) {
    throw ArgumentError("the two-step pipeline uses the table format");
  }
  backend.validate();
}

std::vector<std::uint64_t> ExperimentConfig::effective_seeds() const {
  std::vector<std::uint64_t> out = seeds;
  if (out.empty()) {
    for (std::size_t i = 0; i < n_runs; ++i) {
      out.push_back(i + 1);
    }
  }
  if (prompt.shots == 0) {
    out.resize(1);
  }
  return out;
}

std::vector<const Table*> demo_tables(const Dataset& train) {
  std::vector<const Table*> out;
  for (const auto& t : train.tables) {
    if (t.fully_annotated()) {
      out.push_back(&t);
    }
  }
  return out;
}

std::vector<Demonstration> sample_demonstrations(const Dataset& train, std::size_t k,
                                                 InputFormat format, std::uint64_t seed,
                                                 std::size_t n_rows,
                                                 const SerializeOptions& options) {
  require_train_split(train);
  Rng rng(seed);
  if (format == InputFormat::kTable) {
    return draw_table_demos(demo_tables(train), k, rng, n_rows, options);
  }
  return draw_column_demos(demo_columns(train, n_rows, options.cell_cap), k, format, rng, n_rows,
                           options);
}

std::vector<RunResult> annotate(const Dataset& test, const Dataset& train,
                                const ExperimentConfig& config, ChatBackend& backend) {
  config.validate();
  if (config.two_step) {
    throw ArgumentError("annotate: use two_step_annotate for the two-step pipeline");
  }
  check_isolation(test, train);
  const auto seeds = config.effective_seeds();

  // All sampling happens here, on one thread, before any request goes out.
  std::size_t sequence = 0;
  std::vector<std::vector<Unit>> plans;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    plans.push_back(plan_single_step(test, train, config, r, seeds[r], sequence));
  }

  std::vector<RunResult> results;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    const auto& units = plans[r];
    std::vector<Exchange> exchanges(units.size());
    parallel_for(units.size(), config.parallelism, [&](std::size_t i) {
      if (!units[i].plan_error.empty()) {
        exchanges[i].note = units[i].plan_error;
        exchanges[i].budget_failure = true;
        return;
      }
      exchanges[i] = send_request(backend, units[i].request);
    });

    RunResult result;
    result.run = r;
    result.seed = seeds[r];
    for (std::size_t i = 0; i < units.size(); ++i) {
      const Unit& u = units[i];
      const Exchange& ex = exchanges[i];
      if (u.plan_error.empty()) {
        ++result.n_requests;
      }
      tally(result, ex);
      if (u.column) {
        const Column& c = u.table->columns[*u.column];
        if (!ex.response) {
          result.records.push_back(missing_record(r, *u.table, c, ex.note));
          continue;
        }
        ColumnRecord rec;
        rec.run = r;
        rec.table_id = u.table->table_id;
        rec.column_index = c.index;
        rec.gold = *c.gold_label;
        rec.outcome = parse_single_answer(*ex.response, test.vocabulary);
        result.records.push_back(std::move(rec));
        continue;
      }
      const Table& t = *u.table;
      if (!ex.response) {
        for (const auto& c : t.columns) {
          if (c.gold_label) {
            result.records.push_back(missing_record(r, t, c, ex.note));
          }
        }
        continue;
      }
      TableAnswer answer = parse_table_answer(*ex.response, t.n_columns(), test.vocabulary);
      if (answer.count_mismatch) {
        ++result.n_count_mismatches;
      }
      for (const auto& c : t.columns) {
        if (!c.gold_label) {
          continue;
        }
        ColumnRecord rec;
        rec.run = r;
        rec.table_id = t.table_id;
        rec.column_index = c.index;
        rec.gold = *c.gold_label;
        rec.outcome = answer.outcomes[c.index];
        if (answer.count_mismatch) {
          rec.note = "answer has " + std::to_string(answer.fragment_count) + " fragments for " +
                     std::to_string(t.n_columns()) + " columns";
        }
        result.records.push_back(std::move(rec));
      }
    }
    sort_records(result.records);
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<RunResult> two_step_annotate(const Dataset& test, const Dataset& train,
                                         const ExperimentConfig& config, ChatBackend& backend) {
  config.validate();
  check_isolation(test, train);
  if (test.schema.empty()) {
    throw ArgumentError("two-step annotation needs a domain schema");
  }
  const auto seeds = config.effective_seeds();
  const PromptConfig domain_prompt = step1_config(config, test);
  const std::size_t token_limit = config.backend.token_limit;

  std::size_t sequence = 0;
  std::vector<std::vector<TwoStepUnit>> plans;
  for (std::uint64_t seed : seeds) {
    plans.push_back(plan_two_step(test, train, config, seed, sequence));
  }

  std::vector<RunResult> results;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    const auto& units = plans[r];
    struct Outcome {
      DomainRecord domain;
      std::vector<ColumnRecord> records;
      std::size_t requests = 0;
      Exchange step1;
      Exchange step2;
      bool mismatch = false;
    };
    std::vector<Outcome> outcomes(units.size());

    parallel_for(units.size(), config.parallelism, [&](std::size_t i) {
      const TwoStepUnit& u = units[i];
      const Table& t = *u.table;
      Outcome& out = outcomes[i];
      out.domain.run = r;
      out.domain.table_id = t.table_id;
      out.domain.gold_domain = u.gold_domain;

      // Step 1: topical domain.
      OracleHint domain_hint;
      domain_hint.candidates = domain_prompt.label_list;
      domain_hint.gold = {u.gold_domain.empty() ? std::string()
                                                : test.schema.domain(u.gold_domain).prompt_name()};
      try {
        auto messages = build_messages(domain_prompt, u.step1_demos,
                                       serialize_table(t, domain_prompt.n_rows, domain_prompt.serialize),
                                       token_limit);
        auto request = make_request(config, run_prefix(r) + t.table_id + "/domain", u.sequence,
                                    std::move(messages), std::move(domain_hint));
        ++out.requests;
        out.step1 = send_request(backend, request);
      } catch (const TokenBudgetError& e) {
        out.step1.note = e.what();
        out.step1.budget_failure = true;
      }
      if (out.step1.response) {
        out.domain.raw = *out.step1.response;
        out.domain.predicted_domain = test.schema.resolve(normalize_answer(*out.step1.response));
      } else {
        out.domain.note = out.step1.note;
      }
      out.domain.fallback = !out.domain.predicted_domain.has_value();

      // Step 2: columns, restricted to the predicted domain's labels.
      PromptConfig prompt = config.prompt;
      prompt.task = PromptTask::kColumnType;
      prompt.format = InputFormat::kTable;
      std::string demo_key;
      if (out.domain.predicted_domain) {
        demo_key = *out.domain.predicted_domain;
        prompt.label_list = test.schema.labels_for_domain(demo_key);
      } else {
        prompt.label_list = test.vocabulary.labels();
      }
      out.domain.label_list = prompt.label_list;
      OracleHint hint{t.gold_labels(), prompt.label_list};
      try {
        auto messages = build_messages(prompt, u.step2_demos.at(demo_key),
                                       serialize_table(t, prompt.n_rows, prompt.serialize),
                                       token_limit);
        auto request = make_request(config, run_prefix(r) + t.table_id + "/columns",
                                    u.sequence + 1, std::move(messages), std::move(hint));
        ++out.requests;
        out.step2 = send_request(backend, request);
      } catch (const TokenBudgetError& e) {
        out.step2.note = e.what();
        out.step2.budget_failure = true;
      }

      std::optional<TableAnswer> answer;
      if (out.step2.response) {
        answer = parse_table_answer(*out.step2.response, t.n_columns(), test.vocabulary);
        out.mismatch = answer->count_mismatch;
      }
      for (const auto& c : t.columns) {
        if (!c.gold_label) {
          continue;
        }
        if (!answer) {
          out.records.push_back(missing_record(r, t, c, out.step2.note));
          continue;
        }
        ColumnRecord rec;
        rec.run = r;
        rec.table_id = t.table_id;
        rec.column_index = c.index;
        rec.gold = *c.gold_label;
        rec.outcome = answer->outcomes[c.index];
        if (out.domain.fallback) {
          rec.note = "domain fallback: full label list";
        }
        out.records.push_back(std::move(rec));
      }
    });

    RunResult result;
    result.run = r;
    result.seed = seeds[r];
    for (auto& out : outcomes) {
      result.n_requests += out.requests;
      tally(result, out.step1);
      tally(result, out.step2);
      if (out.mismatch) {
        ++result.n_count_mismatches;
      }
      result.domains.push_back(std::move(out.domain));
      for (auto& rec : out.records) {
        result.records.push_back(std::move(rec));
      }
    }
    sort_records(result.records);
    std::sort(result.domains.begin(), result.domains.end(),
              [](const DomainRecord& a, const DomainRecord& b) { return a.table_id < b.table_id; });
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<RunResult> run_experiment(const Dataset& test, const Dataset& train,
                                      const ExperimentConfig& config, ChatBackend& backend) {
  return config.two_step ? two_step_annotate(test, train, config, backend)
                         : annotate(test, train, config, backend);
}

std::vector<Message> first_prompt(const Dataset& test, const Dataset& train,
                                  const ExperimentConfig& config) {
  config.validate();
  check_isolation(test, train);
  const auto seeds = config.effective_seeds();
  std::size_t sequence = 0;
  if (config.two_step) {
    auto units = plan_two_step(test, train, config, seeds.front(), sequence);
    if (units.empty()) {
      throw ArgumentError("no annotated test tables");
    }
    const PromptConfig prompt = step1_config(config, test);
    return build_messages(prompt, units.front().step1_demos,
                          serialize_table(*units.front().table, prompt.n_rows, prompt.serialize),
                          config.backend.token_limit);
  }
  auto units = plan_single_step(test, train, config, 0, seeds.front(), sequence);
  if (units.empty()) {
    throw ArgumentError("no annotated test columns");
  }
  if (!units.front().plan_error.empty()) {
    throw TokenBudgetError(estimate_message_tokens(units.front().request.messages),
                           config.backend.token_limit);
  }
  return units.front().request.messages;
}

MicroScores domain_scores(const std::vector<DomainRecord>& domains) {
  std::size_t total = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  for (const auto& d : domains) {
    if (d.gold_domain.empty()) {
      continue;
    }
    ++total;
    if (d.predicted_domain) {
      ++predicted;
      correct += *d.predicted_domain == d.gold_domain ? 1 : 0;
    }
  }
  return micro_from_counts(correct, predicted, total);
}

RunMetrics run_metrics(const RunResult& result) {
  RunMetrics m;
  m.run = result.run;
  m.seed = result.seed;
  m.scores = compute_micro(result.records);
  m.eval = evaluate(result.records);
  m.oov = oov_summary(result.records);
  const bool any_gold_domain = std::any_of(result.domains.begin(), result.domains.end(),
                                           [](const DomainRecord& d) { return !d.gold_domain.empty(); });
  if (any_gold_domain) {
    m.step1 = domain_scores(result.domains);
  }
  return m;
}

AggregateMetrics aggregate_runs(const std::vector<RunResult>& results) {
  if (results.empty()) {
    throw ArgumentError("aggregate_runs: no runs");
  }
  AggregateMetrics agg;
  double step1_sum = 0.0;
  std::size_t step1_runs = 0;
  for (const auto& r : results) {
    RunMetrics m = run_metrics(r);
    agg.mean.precision += m.scores.precision;
    agg.mean.recall += m.scores.recall;
    agg.mean.f1 += m.scores.f1;
    if (m.step1) {
      step1_sum += m.step1->f1;
      ++step1_runs;
    }
    agg.runs.push_back(std::move(m));
  }
  const double n = static_cast<double>(results.size());
  agg.mean.precision /= n;
  agg.mean.recall /= n;
  agg.mean.f1 /= n;
  if (step1_runs > 0) {
    agg.mean_step1_f1 = step1_sum / static_cast<double>(step1_runs);
  }
  return agg;
}

}  // namespace tablesage
