#include "tablesage/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <mutex>

#include <CLI11.hpp>

#include "tablesage/baseline.hpp"
#include "tablesage/errors.hpp"
#include "tablesage/io.hpp"
#include "tablesage/llm.hpp"
#include "tablesage/pipeline.hpp"
#include "tablesage/report.hpp"
#include "tablesage/run_store.hpp"

namespace tablesage {
namespace {

constexpr std::string_view kDefaultData = "fixtures/mini";

// Flags shared by annotate, twostep and replay. Only options the user
// actually passed override the config file.
struct ExperimentFlags {
  std::string format;
  bool inst = false;
  bool roles = false;
  std::size_t shots = 0;
  std::size_t runs = 3;
  std::vector<std::uint64_t> seeds;
  std::string backend;
  std::string model;
  double temperature = 0.0;
  std::string data = std::string(kDefaultData);
  std::string out;
  std::size_t parallelism = 1;
  bool dry_run = false;
  std::string config;
  std::string endpoint;
  double corruption_rate = 0.0;
  std::uint64_t noise_seed = 0;
  std::string transcript;
  bool lenient_replay = false;
  std::size_t n_rows = kDefaultRows;
  std::size_t token_limit = kDefaultTokenLimit;

  std::map<std::string, CLI::Option*> options;

  bool given(const std::string& name) const {
    auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

void add_experiment_options(CLI::App* cmd, ExperimentFlags& f, bool replay) {
  auto& o = f.options;
  if (!replay) {
    o["format"] = cmd->add_option("--format", f.format, "column, text or table")
                      ->check(CLI::IsMember({"column", "text", "table"}));
    o["inst"] = cmd->add_flag("--inst", f.inst, "Add step-by-step instructions");
    o["roles"] = cmd->add_flag("--roles", f.roles, "Use system/user/assistant messages");
    o["shots"] = cmd->add_option("--shots", f.shots, "Demonstrations per prompt");
    o["runs"] = cmd->add_option("--runs", f.runs, "Runs with different demonstration seeds");
    o["seeds"] = cmd->add_option("--seeds", f.seeds, "Comma-separated seeds, one per run")
                     ->delimiter(',');
    o["backend"] = cmd->add_option("--backend", f.backend, "http, oracle, synonym, noisy or scripted")
                       ->check(CLI::IsMember({"http", "oracle", "synonym", "synonym_oracle", "noisy",
                                              "noisy_oracle", "scripted"}));
    o["model"] = cmd->add_option("--model", f.model, "Chat model name");
    o["temperature"] = cmd->add_option("--temperature", f.temperature, "Sampling temperature");
    o["config"] = cmd->add_option("--config", f.config, "JSON config file; flags take precedence");
    o["endpoint"] = cmd->add_option("--endpoint", f.endpoint, "Chat-completions URL (http)");
    o["corruption-rate"] =
        cmd->add_option("--corruption-rate", f.corruption_rate, "Answer corruption rate (noisy)");
    o["noise-seed"] = cmd->add_option("--noise-seed", f.noise_seed, "Corruption seed (noisy)");
    o["transcript"] =
        cmd->add_option("--transcript", f.transcript, "Transcript to replay (scripted)");
    o["n-rows"] = cmd->add_option("--n-rows", f.n_rows, "Rows shown per table or column");
    o["token-limit"] = cmd->add_option("--token-limit", f.token_limit, "Prompt token budget");
    o["dry-run"] =
        cmd->add_flag("--dry-run", f.dry_run, "Print the first prompt and call no backend");
  }
  o["lenient-replay"] = cmd->add_flag("--lenient-replay", f.lenient_replay,
                                      "Warn instead of failing on a transcript mismatch");
  o["data"] = cmd->add_option("--data", f.data, "Dataset directory with train/ and test/");
  o["out"] = cmd->add_option("--out", f.out, "Run directory to write");
  o["parallelism"] = cmd->add_option("--parallelism", f.parallelism, "Concurrent requests");
}

std::string run_slug(const ExperimentConfig& config) {
  std::string slug;
  if (config.two_step) {
    slug = "twostep";
  } else {
    slug = std::string(to_string(config.prompt.format));
    if (config.prompt.use_instructions) {
      slug += "-inst";
    }
    if (config.prompt.use_roles) {
      slug += "-roles";
    }
  }
  return slug + "-" + std::to_string(config.prompt.shots) + "shot";
}

ExperimentConfig build_config(const ExperimentFlags& f, bool two_step) {
  ExperimentConfig c;
  if (f.given("config")) {
    c = apply_config_json(read_file(f.config), c);
  }
  if (f.given("format")) c.prompt.format = parse_format(f.format);
  if (f.given("inst")) c.prompt.use_instructions = f.inst;
  if (f.given("roles")) c.prompt.use_roles = f.roles;
  if (f.given("shots")) c.prompt.shots = f.shots;
  if (f.given("runs")) c.n_runs = f.runs;
  if (f.given("seeds")) c.seeds = f.seeds;
  if (f.given("backend")) c.backend.kind = parse_backend_kind(f.backend);
  if (f.given("model")) c.model_name = f.model;
  if (f.given("temperature")) c.temperature = f.temperature;
  if (f.given("parallelism")) c.parallelism = f.parallelism;
  if (f.given("endpoint")) c.backend.endpoint = f.endpoint;
  if (f.given("corruption-rate")) c.backend.corruption_rate = f.corruption_rate;
  if (f.given("noise-seed")) c.backend.noise_seed = f.noise_seed;
  if (f.given("transcript")) c.backend.transcript_path = f.transcript;
  if (f.given("lenient-replay")) c.backend.lenient_replay = f.lenient_replay;
  if (f.given("n-rows")) c.prompt.n_rows = f.n_rows;
  if (f.given("token-limit")) c.backend.token_limit = f.token_limit;
  if (two_step) {
    c.two_step = true;
    if (!f.given("format")) {
      c.prompt.format = InputFormat::kTable;
    }
  }
  // A seed list of the matching length implies the run count.
  if (f.given("seeds") && !f.given("runs")) {
    c.n_runs = c.seeds.size();
  }

  auto require = [&](const char* flag, BackendKind kind) {
    if (f.given(flag) && c.backend.kind != kind) {
      throw ArgumentError(std::string("--") + flag + " only applies to --backend " +
                          std::string(to_string(kind)));
    }
  };
  require("endpoint", BackendKind::kHttp);
  require("corruption-rate", BackendKind::kNoisyOracle);
  require("noise-seed", BackendKind::kNoisyOracle);
  require("transcript", BackendKind::kScripted);
  require("lenient-replay", BackendKind::kScripted);
  if (c.backend.kind == BackendKind::kScripted && c.backend.transcript_path.empty()) {
    throw ArgumentError("--backend scripted needs --transcript");
  }
  c.validate();
  return c;
}

void print_summary(std::ostream& out, const std::string& label,
                   const std::vector<RunResult>& results, const std::string& dir) {
  AggregateMetrics agg = aggregate_runs(results);
  std::string seeds;
  EvalResult total;
  std::size_t requests = 0;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    seeds += (i ? "," : "") + std::to_string(results[i].seed);
    const EvalResult& e = agg.runs[i].eval;
    total.n_correct += e.n_correct;
    total.n_predicted += e.n_predicted;
    total.n_synonym += e.n_synonym;
    total.n_idk += e.n_idk;
    total.n_oov += e.n_oov;
    total.n_missing += e.n_missing;
    total.n_total += e.n_total;
    requests += results[i].n_requests;
    failed += results[i].n_failed_units;
  }
  out << "experiment  " << label << "\n";
  out << "runs        " << results.size() << " (seeds " << seeds << ")\n";
  out << "P / R / F1  " << format_percent(agg.mean.precision * 100.0) << " / "
      << format_percent(agg.mean.recall * 100.0) << " / " << format_percent(agg.mean.f1 * 100.0)
      << "\n";
  if (agg.mean_step1_f1) {
    out << "S1-F1       " << format_percent(*agg.mean_step1_f1 * 100.0) << "\n";
  }
  out << "answers     " << total.n_total << " columns: " << total.n_correct << " correct, "
      << total.n_predicted - total.n_correct << " wrong, " << total.n_synonym << " via synonym, "
      << total.n_idk << " idk, " << total.n_oov << " oov, " << total.n_missing << " missing\n";
  out << "requests    " << requests;
  if (failed > 0) {
    out << " (" << failed << " failed)";
  }
  out << "\n";
  if (!dir.empty()) {
    out << "output      " << dir << "\n";
  }
}

int exit_code_for(const std::vector<RunResult>& results) {
  bool any_failed = false;
  bool any_transport = false;
  bool all_missing = true;
  for (const auto& r : results) {
    any_failed = any_failed || r.n_failed_units > 0;
    any_transport = any_transport || r.n_transport_failures > 0;
    for (const auto& rec : r.records) {
      all_missing = all_missing && rec.outcome.kind == OutcomeKind::kMissing;
    }
  }
  if (any_transport && all_missing) {
    return kExitTransport;
  }
  return any_failed ? kExitPartial : kExitOk;
}

int run_experiment_command(const ExperimentConfig& config, const std::string& data,
                           std::string out_dir, bool dry_run, std::ostream& out,
                           std::ostream& err) {
  Dataset test = load_dataset(data, Split::kTest);
  Dataset train = load_dataset(data, Split::kTrain);
  if (dry_run) {
    out << render_messages(first_prompt(test, train, config));
    return kExitOk;
  }
  std::mutex err_mutex;
  WarningSink warn = [&](const std::string& message) {
    std::lock_guard<std::mutex> lock(err_mutex);
    err << "warning: " << message << "\n";
  };
  std::unique_ptr<ChatBackend> backend = make_backend(config.backend, test.vocabulary, warn);
  RecordingBackend* recorder = nullptr;
  if (config.backend.kind != BackendKind::kScripted) {
    auto wrapped = std::make_unique<RecordingBackend>(std::move(backend));
    recorder = wrapped.get();
    backend = std::move(wrapped);
  }
  std::vector<RunResult> results = run_experiment(test, train, config, *backend);
  if (out_dir.empty()) {
    out_dir = "runs/" + run_slug(config);
  }
  Transcript transcript;
  if (recorder != nullptr) {
    transcript = recorder->transcript();
  }
  write_run_dir(out_dir, config, results, recorder != nullptr ? &transcript : nullptr);
  print_summary(out, experiment_label(config), results, out_dir);
  return exit_code_for(results);
}

std::vector<RunResult> group_by_run(const std::vector<ColumnRecord>& records) {
  std::map<std::size_t, RunResult> runs;
  for (const auto& rec : records) {
    RunResult& r = runs[rec.run];
    r.run = rec.run;
    r.records.push_back(rec);
  }
  std::vector<RunResult> out;
  for (auto& [index, r] : runs) {
    out.push_back(std::move(r));
  }
  return out;
}

std::string baseline_config_json(const BaselineTraining* training, std::size_t folds,
                                  std::uint64_t seed, std::size_t n_rows) {
  std::string out = "{\n  \"model\": \"tfidf+random_forest\",\n";
  out += "  \"n_rows\": " + std::to_string(n_rows) + ",\n";
  out += "  \"folds\": " + std::to_string(folds) + ",\n";
  out += "  \"seed\": " + std::to_string(seed);
  if (training != nullptr) {
    out += ",\n  \"best\": \"" + describe(training->cv.best) + "\",\n  \"grid\": [\n";
    for (std::size_t i = 0; i < training->cv.scores.size(); ++i) {
      const GridScore& g = training->cv.scores[i];
      out += "    {\"params\": \"" + describe(g.params) +
             "\", \"mean_f1\": " + format_percent(g.mean * 100.0) + "}";
      out += i + 1 < training->cv.scores.size() ? ",\n" : "\n";
    }
    out += "  ]";
  }
  return out + "\n}\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Column type annotation with chat models, plus a TF-IDF random forest baseline",
               "tablesage"};
  app.require_subcommand(1);

  ExperimentFlags annotate_flags;
  CLI::App* annotate = app.add_subcommand("annotate", "Annotate test columns in one step");
  add_experiment_options(annotate, annotate_flags, false);

  ExperimentFlags twostep_flags;
  CLI::App* twostep =
      app.add_subcommand("twostep", "Predict each table's domain, then annotate its columns");
  add_experiment_options(twostep, twostep_flags, false);

  ExperimentFlags replay_flags;
  std::string replay_dir;
  CLI::App* replay = app.add_subcommand("replay", "Re-run a recorded run from its transcript");
  replay->add_option("run_dir", replay_dir, "Run directory with config.json and transcript.jsonl")
      ->required();
  add_experiment_options(replay, replay_flags, true);

  std::string eval_input;
  std::string eval_out;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a results.csv");
  evaluate->add_option("results", eval_input, "results.csv or a run directory")->required();
  evaluate->add_option("--out", eval_out, "Directory to write metrics.json to");

  std::string base_data = std::string(kDefaultData);
  std::string base_out = "runs/baseline";
  std::size_t base_folds = 3;
  std::uint64_t base_seed = 1;
  std::size_t base_threads = 1;
  std::size_t base_rows = kDefaultRows;
  std::string base_save;
  std::string base_load;
  CLI::App* baseline =
      app.add_subcommand("baseline", "Train and evaluate the TF-IDF random forest baseline");
  baseline->add_option("--data", base_data, "Dataset directory with train/ and test/");
  baseline->add_option("--out", base_out, "Run directory to write");
  baseline->add_option("--folds", base_folds, "Cross-validation folds");
  baseline->add_option("--seed", base_seed, "Seed for folds, bootstraps and feature draws");
  baseline->add_option("--threads", base_threads, "Trees trained in parallel");
  baseline->add_option("--n-rows", base_rows, "Rows per serialized column");
  auto* save_opt = baseline->add_option("--save-model", base_save, "Write the trained model JSON");
  baseline->add_option("--load-model", base_load, "Skip training and use this model")
      ->excludes(save_opt);

  std::vector<std::string> report_dirs;
  std::string report_baseline;
  std::string report_reference;
  std::string report_out = "report.md";
  CLI::App* report = app.add_subcommand("report", "Compare run directories in report.md");
  report->add_option("run_dirs", report_dirs, "Run directories")->required();
  report->add_option("--baseline", report_baseline,
                     "Run name or experiment label for delta F1 (default: first run)");
  report->add_option("--reference", report_reference, "Append published reference rows")
      ->check(CLI::IsMember({"paper"}));
  report->add_option("--out", report_out, "Report path");

  std::string validate_data = std::string(kDefaultData);
  CLI::App* validate = app.add_subcommand("validate-data", "Load and check both dataset splits");
  validate->add_option("--data", validate_data, "Dataset directory with train/ and test/");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) {
      err << "run with " << app.get_subcommands().front()->get_name() << " --help for usage\n";
    }
    return kExitConfig;
  }

  try {
    if (annotate->parsed()) {
      ExperimentConfig c = build_config(annotate_flags, false);
      return run_experiment_command(c, annotate_flags.data, annotate_flags.out,
                                    annotate_flags.dry_run, out, err);
    }
    if (twostep->parsed()) {
      ExperimentConfig c = build_config(twostep_flags, true);
      return run_experiment_command(c, twostep_flags.data, twostep_flags.out, twostep_flags.dry_run,
                                    out, err);
    }
    if (replay->parsed()) {
      const std::filesystem::path dir(replay_dir);
      ExperimentConfig c = apply_config_json(read_file(dir / "config.json"), ExperimentConfig{});
      const std::size_t token_limit = c.backend.token_limit;
      c.backend = BackendConfig{};
      c.backend.kind = BackendKind::kScripted;
      c.backend.transcript_path = dir / "transcript.jsonl";
      c.backend.lenient_replay = replay_flags.lenient_replay;
      c.backend.token_limit = token_limit;
      if (replay_flags.given("parallelism")) {
        c.parallelism = replay_flags.parallelism;
      }
      c.validate();
      std::string out_dir = replay_flags.out;
      if (out_dir.empty()) {
        out_dir = dir.string() + "-replay";
      }
      return run_experiment_command(c, replay_flags.data, out_dir, false, out, err);
    }
    if (evaluate->parsed()) {
      std::filesystem::path path(eval_input);
      std::string label = path.stem().string();
      if (std::filesystem::is_directory(path)) {
        label = path.filename().string();
        path /= "results.csv";
      }
      std::vector<RunResult> results = group_by_run(parse_results_csv(read_file(path)));
      if (results.empty()) {
        throw ValidationError(path.string() + " has no records");
      }
      if (!eval_out.empty()) {
        write_file(std::filesystem::path(eval_out) / "metrics.json", metrics_json(label, results));
      }
      print_summary(out, label, results, eval_out);
      return kExitOk;
    }
    if (baseline->parsed()) {
      Dataset test = load_dataset(base_data, Split::kTest);
      BaselineModel model;
      std::optional<BaselineTraining> training;
      if (!base_load.empty()) {
        model = load_baseline(base_load);
      } else {
        Dataset train = load_dataset(base_data, Split::kTrain);
        training = train_baseline(make_corpus(train, base_rows), default_grid(), base_folds,
                                  base_seed, base_threads);
        training->model.n_rows = base_rows;
        model = training->model;
        for (const auto& g : training->cv.scores) {
          out << "cv  " << describe(g.params) << "  mean F1 " << format_percent(g.mean * 100.0)
              << "\n";
        }
        out << "best " << describe(training->cv.best) << "\n";
      }
      RunResult result = evaluate_baseline(model, test, base_seed);
      std::vector<RunResult> results{result};
      const std::filesystem::path dir(base_out);
      write_file(dir / "config.json", baseline_config_json(training ? &*training : nullptr,
                                                           base_folds, base_seed, model.n_rows));
      write_file(dir / "results.csv", results_csv(results));
      write_file(dir / "metrics.json", metrics_json("tfidf+forest", results));
      std::map<std::string, double> f1;
      for (const auto& [label, value] : per_label_f1(result.records)) {
        f1[label] = value * 100.0;
      }
      write_file(dir / "per_label_f1.csv", per_label_csv(f1));
      save_baseline(model, dir / "model.json");
      if (!base_save.empty()) {
        save_baseline(model, base_save);
      }
      print_summary(out, "tfidf+forest", results, dir.string());
      return kExitOk;
    }
    if (report->parsed()) {
      std::vector<std::filesystem::path> dirs(report_dirs.begin(), report_dirs.end());
      std::string markdown = build_report(dirs, report_baseline, report_reference == "paper");
      write_file(report_out, markdown);
      out << "wrote " << report_out << " (" << dirs.size() << " runs)\n";
      return kExitOk;
    }
    if (validate->parsed()) {
      for (Split split : {Split::kTrain, Split::kTest}) {
        Dataset d = load_dataset(validate_data, split);
        std::size_t columns = 0;
        for (const auto& t : d.tables) {
          columns += t.n_columns();
        }
        out << to_string(split) << ": " << d.tables.size() << " tables, " << columns
            << " columns, " << d.annotated_column_count() << " annotated, "
            << d.vocabulary.size() << " labels, " << d.schema.domains().size() << " domains\n";
      }
      out << "ok\n";
      return kExitOk;
    }
  } catch (const SamplingError& e) {
    err << "sampling error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace tablesage
