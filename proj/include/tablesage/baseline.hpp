#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tablesage/dataset.hpp"
#include "tablesage/pipeline.hpp"
#include "tablesage/serialize.hpp"

namespace tablesage {

// Lowercased runs of ASCII letters and digits; bytes >= 0x80 also count as
// token characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

// (feature index, weight) pairs with strictly increasing indices.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

class TfidfModel {
 public:
  // Vocabulary indices follow lexicographic term order. Throws ArgumentError
  // when no document has a token.
  static TfidfModel fit(const std::vector<std::string>& docs);

  // tf = raw count, idf = ln((1 + n_docs) / (1 + df)) + 1, then L2
  // normalization. Unseen terms are ignored.
  SparseVector transform(std::string_view doc) const;

  const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  const std::vector<std::size_t>& df() const { return df_; }
  std::size_t n_docs() const { return n_docs_; }
  std::size_t n_features() const { return idf_.size(); }

  bool operator==(const TfidfModel&) const = default;

 private:
  friend struct BaselineJson;
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<double> idf_;
  std::vector<std::size_t> df_;
  std::size_t n_docs_ = 0;
};

struct ForestParams {
  std::size_t n_trees = 100;
  // Unbounded when empty.
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_leaf = 1;
  // Features tried per split; 0 means floor(sqrt(n_features)), at least 1.
  std::size_t features_per_split = 0;

  bool operator==(const ForestParams&) const = default;
};

std::string describe(const ForestParams& params);

struct TreeNode {
  // -1 for a leaf.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // Per-class sample counts that reached the node.
  std::vector<std::size_t> counts;

  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  // nodes[0] is the root.
  std::vector<TreeNode> nodes;

  std::size_t predict(const std::vector<double>& x) const;
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;
};

class ForestModel {
 public:
  // Each tree sees a bootstrap sample drawn from a seed derived from `seed`
  // and its index, so results do not depend on `n_threads`. Splits minimize
  // Gini impurity and are taken only when they lower it. Throws ArgumentError
  // on mismatched or empty inputs, or fewer than two samples.
  static ForestModel train(const std::vector<SparseVector>& x, const std::vector<std::string>& y,
                           std::size_t n_features, const ForestParams& params, std::uint64_t seed,
                           std::size_t n_threads = 1);

  // Majority vote; ties go to the lowest class id.
  std::string predict(const SparseVector& x) const;
  std::size_t predict_class(const SparseVector& x) const;

  const ForestParams& params() const { return params_; }
  // Class id -> label, sorted.
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t n_features() const { return n_features_; }

  bool operator==(const ForestModel&) const = default;

 private:
  friend struct BaselineJson;
  ForestParams params_;
  std::vector<std::string> classes_;
  std::vector<DecisionTree> trees_;
  std::size_t n_features_ = 0;
};

// n_trees {10, 50, 100} x max_depth {unbounded, 10, 20} x min_samples_leaf {1, 3}.
std::vector<ForestParams> default_grid();

struct GridScore {
  ForestParams params;
  std::vector<double> fold_scores;
  double mean = 0.0;
};

struct CvResult {
  ForestParams best;
  std::size_t best_index = 0;
  std::vector<GridScore> scores;
};

// Fold of every sample under a seeded split that spreads each class evenly
// across folds. Throws ArgumentError when k < 2 or there are fewer samples
// than folds.
std::vector<std::size_t> stratified_folds(const std::vector<std::string>& y, std::size_t k,
                                          std::uint64_t seed);

// Scores every grid point by mean micro-F1 over k folds, fitting TF-IDF on
// each training fold only. Ties go to the earlier grid point.
CvResult cross_validate(const std::vector<std::string>& docs, const std::vector<std::string>& y,
                        const std::vector<ForestParams>& grid, std::size_t k, std::uint64_t seed,
                        std::size_t n_threads = 1);

// Serialized annotated columns of one split, the same text the column
// prompts show.
struct BaselineCorpus {
  Split split = Split::kTrain;
  std::vector<std::string> docs;
  std::vector<std::string> labels;
  // (table_id, column_index) per document.
  std::vector<std::pair<std::string, std::size_t>> sources;
};

BaselineCorpus make_corpus(const Dataset& dataset, std::size_t n_rows = kDefaultRows,
                           const SerializeOptions& options = {});

struct BaselineModel {
  TfidfModel tfidf;
  ForestModel forest;
  std::size_t n_rows = kDefaultRows;

  std::string predict(std::string_view doc) const { return forest.predict(tfidf.transform(doc)); }

  bool operator==(const BaselineModel&) const = default;
};

struct BaselineTraining {
  BaselineModel model;
  CvResult cv;
};

// Cross-validates the grid on the training corpus, then refits TF-IDF and the
// forest on all of it with the best parameters. Throws ArgumentError for a
// corpus that is not from the training split.
BaselineTraining train_baseline(const BaselineCorpus& train, const std::vector<ForestParams>& grid,
                                std::size_t k, std::uint64_t seed, std::size_t n_threads = 1);

// One record per annotated test column; every prediction is a label.
RunResult evaluate_baseline(const BaselineModel& model, const Dataset& test,
                            std::uint64_t seed = 0);

std::string baseline_to_json(const BaselineModel& model);
// Throws LoadError on malformed input.
BaselineModel baseline_from_json(std::string_view content);
void save_baseline(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_baseline(const std::filesystem::path& path);

}  // namespace tablesage
