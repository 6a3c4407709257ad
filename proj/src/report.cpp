#include "tablesage/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "tablesage/errors.hpp"

namespace tablesage {
namespace {

std::string signed_percent(double value) {
  const double r = round2(value);
  std::string s = format_percent(r);
  if (r > 0.0) {
    return "+" + s;
  }
  if (r == 0.0) {
    return "0.00";
  }
  return s;
}

std::string cell(const std::optional<double>& value) {
  return value ? format_percent(*value) : "-";
}

std::string row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) {
    out += " " + c + " |";
  }
  return out + "\n";
}

std::string rule(std::size_t n) {
  std::string out = "|";
  for (std::size_t i = 0; i < n; ++i) {
    out += " --- |";
  }
  return out + "\n";
}

std::string escape_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string mean_count(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", round2(value));
  return buf;
}

}  // namespace

const std::vector<ReferenceRow>& published_reference_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"Prompt formats, zero-shot", "column", 0, std::nullopt, 47.70, 31.25, 45.85, std::nullopt},
      {"Prompt formats, zero-shot", "text", 0, std::nullopt, 46.38, 33.97, 47.02, 1.17},
      {"Prompt formats, zero-shot", "table", 0, std::nullopt, 41.08, 32.38, 37.90, -7.95},
      {"Prompt formats, zero-shot", "column+inst", 0, std::nullopt, 72.00, 51.18, 62.27, 16.42},
      {"Prompt formats, zero-shot", "text+inst", 0, std::nullopt, 63.94, 47.20, 57.95, 12.10},
      {"Prompt formats, zero-shot", "table+inst", 0, std::nullopt, 81.88, 76.79, 80.16, 34.31},
      {"Prompt formats, zero-shot", "column+inst+roles", 0, std::nullopt, 86.99, 69.95, 78.61,
       32.76},
      {"Prompt formats, zero-shot", "text+inst+roles", 0, std::nullopt, 83.68, 67.13, 74.15, 28.30},
      {"Prompt formats, zero-shot", "table+inst+roles", 0, std::nullopt, 85.91, 82.01, 85.25,
       39.40},
      {"In-context learning", "column", 0, std::nullopt, 47.70, 31.25, 45.85, std::nullopt},
      {"In-context learning", "column", 1, std::nullopt, 88.70, 82.02, 84.57, 38.72},
      {"In-context learning", "column", 5, std::nullopt, 90.15, 86.03, 88.49, 42.64},
      {"In-context learning", "text", 1, std::nullopt, 81.96, 71.89, 75.16, 29.31},
      {"In-context learning", "text", 5, std::nullopt, 88.32, 81.46, 84.24, 38.29},
      {"In-context learning", "table", 1, std::nullopt, 88.67, 84.81, 88.44, 42.59},
      {"In-context learning", "table", 5, std::nullopt, 87.51, 85.28, 88.83, 42.98},
      {"Two-step pipeline", "column (baseline)", std::nullopt, std::nullopt, 47.70, 31.25, 45.85,
       std::nullopt},
      {"Two-step pipeline", "two-step", 0, 95.56, 90.08, 86.60, 89.47, 43.62},
      {"Two-step pipeline", "two-step", 1, 95.56, 90.08, 83.65, 88.85, 43.00},
      {"Two-step pipeline", "two-step", 4, 95.56, 85.87, 82.68, 86.71, 40.86},
      {"Trained models", "ChatGPT two-step", 0, std::nullopt, 90.08, 86.60, 89.47, std::nullopt},
      {"Trained models", "Random Forest", 159, std::nullopt, 38.36, 43.75, 46.15, -43.32},
      {"Trained models", "Random Forest", 356, std::nullopt, 70.98, 59.49, 59.60, -29.87},
      {"Trained models", "RoBERTa", 32, std::nullopt, 49.13, 52.25, 48.93, -40.54},
      {"Trained models", "RoBERTa", 159, std::nullopt, 82.41, 81.79, 79.20, -10.27},
      {"Trained models", "RoBERTa", 356, std::nullopt, 90.87, 87.70, 89.73, 0.26},
      {"Trained models", "RoBERTa", 1600, std::nullopt, 87.59, 87.60, 86.79, -2.68},
      {"Trained models", "DODUO", 356, std::nullopt, 1.95, 48.92, 6.37, -83.10},
      {"Trained models", "DODUO", 1600, std::nullopt, 63.02, 41.36, 53.60, -35.87},
  };
  return rows;
}

std::string render_report(const std::vector<RunSummary>& runs, std::string_view baseline_name,
                          bool include_reference) {
  if (runs.empty()) {
    throw ArgumentError("report needs at least one run");
  }
  // The baseline may be named by run directory or by experiment label.
  std::string baseline = baseline_name.empty() ? runs.front().name : std::string(baseline_name);
  for (const auto& r : runs) {
    if (r.name != baseline && r.label == baseline) {
      baseline = r.name;
      break;
    }
  }

  std::vector<ExperimentScores> experiments;
  for (const auto& r : runs) {
    experiments.push_back({r.name, r.precision, r.recall, r.f1, r.step1_f1});
  }
  std::vector<DeltaRow> deltas = delta_table(experiments, baseline);
  std::vector<std::size_t> order(runs.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].f1 > runs[b].f1; });

  const bool any_step1 = std::any_of(runs.begin(), runs.end(),
                                     [](const RunSummary& r) { return r.step1_f1.has_value(); });
  std::string out = "# Column type annotation results\n\n";
  out += "Scores are micro-averaged percentages, averaged over runs. Delta F1 is taken against `" +
         escape_cell(baseline) + "`.\n\n";
  out += "## Experiments\n\n";
  std::vector<std::string> header = {"Run", "Setup", "Runs", "P", "R", "F1", "Delta F1"};
  if (any_step1) {
    header.push_back("S1-F1");
  }
  out += row(header) + rule(header.size());
  for (std::size_t i : order) {
    const RunSummary& r = runs[i];
    std::vector<std::string> cells = {escape_cell(r.name),          escape_cell(r.label),
                                      std::to_string(r.n_runs),     format_percent(r.precision),
                                      format_percent(r.recall),     format_percent(r.f1),
                                      signed_percent(deltas[i].delta_f1)};
    if (any_step1) {
      cells.push_back(cell(r.step1_f1));
    }
    out += row(cells);
  }

  out += "\n## Out-of-vocabulary answers\n\n";
  out += "Mean per run of answers that matched no label verbatim, and of those recovered by the "
         "synonym dictionary.\n\n";
  out += row({"Run", "Off-vocabulary", "Recovered"}) + rule(3);
  for (std::size_t i : order) {
    const RunSummary& r = runs[i];
    out += row({escape_cell(r.name), mean_count(r.oov_raw_mean), mean_count(r.oov_recovered_mean)});
  }

  std::set<std::string> labels;
  for (const auto& r : runs) {
    for (const auto& [label, f1] : r.per_label_f1) {
      labels.insert(label);
    }
  }
  out += "\n## Per-label F1\n\n";
  std::vector<std::string> label_header = {"Label"};
  for (std::size_t i : order) {
    label_header.push_back(escape_cell(runs[i].name));
  }
  out += row(label_header) + rule(label_header.size());
  for (const auto& label : labels) {
    std::vector<std::string> cells = {escape_cell(label)};
    for (std::size_t i : order) {
      auto it = runs[i].per_label_f1.find(label);
      cells.push_back(it == runs[i].per_label_f1.end() ? "-" : format_percent(it->second));
    }
    out += row(cells);
  }

  if (include_reference) {
    out += "\n---\n\n## Published reference values\n\n";
    out += "Reported for gpt-3.5-turbo-0301 on the 250-column down-sampled test set. These rows "
           "were not produced by this tool.\n";
    std::string_view current;
    for (const auto& ref : published_reference_rows()) {
      if (ref.table != current) {
        current = ref.table;
        out += "\n### " + std::string(current) + "\n\n";
        out += row({"Setup", "Shots", "S1-F1", "P", "R", "F1", "Delta F1"}) + rule(7);
      }
      out += row({std::string(ref.setup), ref.shots ? std::to_string(*ref.shots) : "-",
                  cell(ref.step1_f1), format_percent(ref.precision), format_percent(ref.recall),
                  format_percent(ref.f1),
                  ref.delta_f1 ? signed_percent(*ref.delta_f1) : "-"});
    }
  }
  return out;
}

std::string build_report(const std::vector<std::filesystem::path>& run_dirs,
                         std::string_view baseline_name, bool include_reference) {
  std::vector<RunSummary> runs;
  for (const auto& dir : run_dirs) {
    runs.push_back(load_run_summary(dir));
  }
  return render_report(runs, baseline_name, include_reference);
}

}  // namespace tablesage
