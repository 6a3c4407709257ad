#include "tablesage/baseline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "tablesage/errors.hpp"
#include "tablesage/io.hpp"
#include "tablesage/random.hpp"

namespace tablesage {

struct BaselineJson {
  static nlohmann::ordered_json tfidf(const TfidfModel& m);
  static TfidfModel tfidf(const nlohmann::json& doc);
  static nlohmann::ordered_json forest(const ForestModel& m);
  static ForestModel forest(const nlohmann::json& doc);
};

namespace {

bool is_token_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

std::vector<double> densify(const SparseVector& x, std::size_t n_features) {
  std::vector<double> out(n_features, 0.0);
  for (const auto& [index, weight] : x) {
    if (index < n_features) {
      out[index] = weight;
    }
  }
  return out;
}

std::size_t argmax_lowest(const std::vector<std::size_t>& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) {
      best = i;
    }
  }
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
              std::size_t n_classes, const ForestParams& params, std::size_t mtry,
              std::uint64_t seed)
      : x_(x), y_(y), n_classes_(n_classes), params_(params), mtry_(mtry), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = x_.size();
    std::vector<std::size_t> samples(n);
    for (auto& s : samples) {
      s = rng_.uniform_index(n);
    }
    features_.resize(x_.empty() ? 0 : x_.front().size());
    grow(samples, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  static double gini(const std::vector<std::size_t>& counts, std::size_t n) {
    if (n == 0) {
      return 0.0;
    }
    double sq = 0.0;
    for (std::size_t c : counts) {
      sq += static_cast<double>(c) * static_cast<double>(c);
    }
    return 1.0 - sq / (static_cast<double>(n) * static_cast<double>(n));
  }

  int grow(std::vector<std::size_t>& samples, std::size_t depth) {
    std::vector<std::size_t> counts(n_classes_, 0);
    for (std::size_t s : samples) {
      ++counts[y_[s]];
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({-1, 0.0, -1, -1, counts});

    const std::size_t n = samples.size();
    const double parent = gini(counts, n);
    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    if (parent == 0.0 || depth_capped || n < 2 * params_.min_samples_leaf) {
      return id;
    }
    Split best = find_split(samples, parent);
    if (best.feature < 0) {
      return id;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t s : samples) {
      (x_[s][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Features are visited in a fresh random order. Constant features do not
  // count towards the mtry budget, so the search keeps drawing until mtry
  // informative features were examined or none are left.
  Split find_split(const std::vector<std::size_t>& samples, double parent) {
    const std::size_t n = samples.size();
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    Split best;
    best.impurity = parent;
    std::vector<std::pair<double, std::size_t>> column(n);
    std::vector<std::size_t> total(n_classes_, 0);
    for (std::size_t s : samples) {
      ++total[y_[s]];
    }
    std::size_t examined = 0;
    for (std::size_t drawn = 0; drawn < features_.size() && examined < mtry_; ++drawn) {
      std::size_t pick = drawn + rng_.uniform_index(features_.size() - drawn);
      std::swap(features_[drawn], features_[pick]);
      const std::size_t f = features_[drawn];
      for (std::size_t i = 0; i < n; ++i) {
        column[i] = {x_[samples[i]][f], y_[samples[i]]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) {
        continue;
      }
      ++examined;

      std::vector<std::size_t> left(n_classes_, 0);
      std::vector<std::size_t> right = total;
      double sq_left = 0.0;
      double sq_right = 0.0;
      for (std::size_t c : right) {
        sq_right += static_cast<double>(c) * static_cast<double>(c);
      }
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t c = column[i].second;
        sq_left += 2.0 * static_cast<double>(left[c]) + 1.0;
        sq_right -= 2.0 * static_cast<double>(right[c]) - 1.0;
        ++left[c];
        --right[c];
        if (column[i].first == column[i + 1].first) {
          continue;
        }
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < params_.min_samples_leaf || nr < params_.min_samples_leaf) {
          continue;
        }
        const double dl = static_cast<double>(nl);
        const double dr = static_cast<double>(nr);
        const double impurity = ((dl - sq_left / dl) + (dr - sq_right / dr)) / static_cast<double>(n);
        if (impurity < best.impurity - 1e-12) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (column[i].first + column[i + 1].first);
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<std::size_t>& y_;
  std::size_t n_classes_;
  const ForestParams& params_;
  std::size_t mtry_;
  Rng rng_;
  std::vector<std::size_t> features_;
  DecisionTree tree_;
};

double fold_score(const ForestModel& forest, const std::vector<SparseVector>& x,
                  const std::vector<std::string>& y) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    correct += forest.predict(x[i]) == y[i] ? 1 : 0;
  }
  // Every sample gets a label, so predicted = total.
  return micro_from_counts(correct, x.size(), x.size()).f1;
}

nlohmann::ordered_json params_json(const ForestParams& p) {
  nlohmann::ordered_json doc;
  doc["n_trees"] = p.n_trees;
  doc["max_depth"] = p.max_depth ? nlohmann::ordered_json(*p.max_depth) : nullptr;
  doc["min_samples_leaf"] = p.min_samples_leaf;
  doc["features_per_split"] = p.features_per_split;
  return doc;
}

ForestParams params_from_json(const nlohmann::json& doc) {
  ForestParams p;
  p.n_trees = doc.at("n_trees").get<std::size_t>();
  if (!doc.at("max_depth").is_null()) {
    p.max_depth = doc.at("max_depth").get<std::size_t>();
  }
  p.min_samples_leaf = doc.at("min_samples_leaf").get<std::size_t>();
  p.features_per_split = doc.at("features_per_split").get<std::size_t>();
  return p;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

TfidfModel TfidfModel::fit(const std::vector<std::string>& docs) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    auto tokens = tokenize(doc);
    std::set<std::string> unique(tokens.begin(), tokens.end());
    for (const auto& t : unique) {
      ++df[t];
    }
  }
  if (df.empty()) {
    throw ArgumentError("tfidf: the corpus has no tokens");
  }
  TfidfModel m;
  m.n_docs_ = docs.size();
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, count] : df) {
    m.vocabulary_[term] = m.idf_.size();
    m.df_.push_back(count);
    m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return m;
}

SparseVector TfidfModel::transform(std::string_view doc) const {
  std::map<std::size_t, double> tf;
  for (const auto& t : tokenize(doc)) {
    auto it = vocabulary_.find(t);
    if (it != vocabulary_.end()) {
      tf[it->second] += 1.0;
    }
  }
  SparseVector out;
  double norm = 0.0;
  for (const auto& [index, count] : tf) {
    const double w = count * idf_[index];
    out.emplace_back(index, w);
    norm += w * w;
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& entry : out) {
      entry.second /= norm;
    }
  }
  return out;
}

std::string describe(const ForestParams& p) {
  return "n_trees=" + std::to_string(p.n_trees) +
         " max_depth=" + (p.max_depth ? std::to_string(*p.max_depth) : std::string("none")) +
         " min_samples_leaf=" + std::to_string(p.min_samples_leaf);
}

std::size_t DecisionTree::predict(const std::vector<double>& x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& node = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return argmax_lowest(nodes[i].counts);
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

ForestModel ForestModel::train(const std::vector<SparseVector>& x,
                               const std::vector<std::string>& y, std::size_t n_features,
                               const ForestParams& params, std::uint64_t seed,
                               std::size_t n_threads) {
  if (x.size() != y.size()) {
    throw ArgumentError("forest: " + std::to_string(x.size()) + " samples but " +
                        std::to_string(y.size()) + " labels");
  }
  if (x.size() < 2) {
    throw ArgumentError("forest: at least two samples are required");
  }
  if (params.n_trees == 0 || params.min_samples_leaf == 0) {
    throw ArgumentError("forest: n_trees and min_samples_leaf must be positive");
  }
  if (n_features == 0) {
    throw ArgumentError("forest: no features");
  }
  ForestModel m;
  m.params_ = params;
  m.n_features_ = n_features;
  std::set<std::string> classes(y.begin(), y.end());
  m.classes_.assign(classes.begin(), classes.end());
  std::vector<std::size_t> ids;
  for (const auto& label : y) {
    ids.push_back(static_cast<std::size_t>(
        std::lower_bound(m.classes_.begin(), m.classes_.end(), label) - m.classes_.begin()));
  }
  std::vector<std::vector<double>> dense;
  dense.reserve(x.size());
  for (const auto& row : x) {
    dense.push_back(densify(row, n_features));
  }
  std::size_t mtry = params.features_per_split;
  if (mtry == 0) {
    mtry = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features)))));
  }
  mtry = std::min(mtry, n_features);

  m.trees_.resize(params.n_trees);
  auto build = [&](std::size_t t) {
    TreeBuilder builder(dense, ids, m.classes_.size(), params, mtry,
                        mix_seed(seed, "tree/" + std::to_string(t)));
    m.trees_[t] = builder.build();
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(n_threads, params.n_trees));
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) {
      build(t);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < params.n_trees; t = next.fetch_add(1)) {
          build(t);
        }
      });
    }
    for (auto& th : threads) {
      th.join();
    }
  }
  return m;
}

std::size_t ForestModel::predict_class(const SparseVector& x) const {
  const std::vector<double> dense = densify(x, n_features_);
  std::vector<std::size_t> votes(classes_.size(), 0);
  for (const auto& tree : trees_) {
    ++votes[tree.predict(dense)];
  }
  return argmax_lowest(votes);
}

std::string ForestModel::predict(const SparseVector& x) const { return classes_[predict_class(x)]; }

std::vector<ForestParams> default_grid() {
  std::vector<ForestParams> grid;
  for (std::size_t trees : {10, 50, 100}) {
    for (std::optional<std::size_t> depth :
         {std::optional<std::size_t>{}, std::optional<std::size_t>{10},
          std::optional<std::size_t>{20}}) {
      for (std::size_t leaf : {1, 3}) {
        ForestParams p;
        p.n_trees = trees;
        p.max_depth = depth;
        p.min_samples_leaf = leaf;
        grid.push_back(p);
      }
    }
  }
  return grid;
}

std::vector<std::size_t> stratified_folds(const std::vector<std::string>& y, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) {
    throw ArgumentError("cross-validation needs at least 2 folds");
  }
  if (y.size() < k) {
    throw ArgumentError("cannot split " + std::to_string(y.size()) + " samples into " +
                        std::to_string(k) + " folds");
  }
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) {
    by_class[y[i]].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> fold(y.size(), 0);
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    for (std::size_t i : sample_indices(rng, members.size(), members.size())) {
      fold[members[i]] = next++ % k;
    }
  }
  return fold;
}

CvResult cross_validate(const std::vector<std::string>& docs, const std::vector<std::string>& y,
                        const std::vector<ForestParams>& grid, std::size_t k, std::uint64_t seed,
                        std::size_t n_threads) {
  if (docs.size() != y.size()) {
    throw ArgumentError("cross_validate: " + std::to_string(docs.size()) + " documents but " +
                        std::to_string(y.size()) + " labels");
  }
  if (grid.empty()) {
    throw ArgumentError("cross_validate: empty grid");
  }
  const std::vector<std::size_t> fold = stratified_folds(y, k, seed);

  struct FoldData {
    std::vector<SparseVector> train_x;
    std::vector<std::string> train_y;
    std::vector<SparseVector> test_x;
    std::vector<std::string> test_y;
    std::size_t n_features = 0;
  };
  std::vector<FoldData> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::string> train_docs;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (fold[i] != f) {
        train_docs.push_back(docs[i]);
        folds[f].train_y.push_back(y[i]);
      }
    }
    if (folds[f].train_y.size() < 2) {
      throw ArgumentError("cross_validate: fold " + std::to_string(f) +
                          " leaves fewer than two training samples");
    }
    TfidfModel tfidf = TfidfModel::fit(train_docs);
    folds[f].n_features = tfidf.n_features();
    for (const auto& d : train_docs) {
      folds[f].train_x.push_back(tfidf.transform(d));
    }
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (fold[i] == f) {
        folds[f].test_x.push_back(tfidf.transform(docs[i]));
        folds[f].test_y.push_back(y[i]);
      }
    }
  }

  CvResult result;
  double best_mean = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    GridScore score;
    score.params = grid[g];
    for (std::size_t f = 0; f < k; ++f) {
      const FoldData& d = folds[f];
      ForestModel forest = ForestModel::train(d.train_x, d.train_y, d.n_features, grid[g],
                                              mix_seed(seed, "fold/" + std::to_string(f)),
                                              n_threads);
      score.fold_scores.push_back(fold_score(forest, d.test_x, d.test_y));
    }
    score.mean = std::accumulate(score.fold_scores.begin(), score.fold_scores.end(), 0.0) /
                 static_cast<double>(k);
    if (score.mean > best_mean) {
      best_mean = score.mean;
      result.best = grid[g];
      result.best_index = g;
    }
    result.scores.push_back(std::move(score));
  }
  return result;
}

BaselineCorpus make_corpus(const Dataset& dataset, std::size_t n_rows,
                           const SerializeOptions& options) {
  SerializeOptions lenient = options;
  lenient.strict = false;
  BaselineCorpus corpus;
  corpus.split = dataset.split;
  for (const auto& t : dataset.tables) {
    for (const auto& c : t.columns) {
      if (!c.gold_label) {
        continue;
      }
      corpus.docs.push_back(serialize_column(c, n_rows, InputFormat::kColumn, lenient).payload);
      corpus.labels.push_back(*c.gold_label);
      corpus.sources.emplace_back(t.table_id, c.index);
    }
  }
  return corpus;
}

BaselineTraining train_baseline(const BaselineCorpus& train, const std::vector<ForestParams>& grid,
                                std::size_t k, std::uint64_t seed, std::size_t n_threads) {
  if (train.split != Split::kTrain) {
    throw ArgumentError("the baseline trains on the training split only");
  }
  BaselineTraining out;
  out.cv = cross_validate(train.docs, train.labels, grid, k, seed, n_threads);
  out.model.tfidf = TfidfModel::fit(train.docs);
  std::vector<SparseVector> x;
  for (const auto& d : train.docs) {
    x.push_back(out.model.tfidf.transform(d));
  }
  out.model.forest = ForestModel::train(x, train.labels, out.model.tfidf.n_features(),
                                        out.cv.best, mix_seed(seed, "final"), n_threads);
  return out;
}

RunResult evaluate_baseline(const BaselineModel& model, const Dataset& test, std::uint64_t seed) {
  if (test.split != Split::kTest) {
    throw ArgumentError("baseline evaluation runs over the test split");
  }
  BaselineCorpus corpus = make_corpus(test, model.n_rows);
  RunResult result;
  result.seed = seed;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    ColumnRecord rec;
    rec.table_id = corpus.sources[i].first;
    rec.column_index = corpus.sources[i].second;
    rec.gold = corpus.labels[i];
    const std::string predicted = model.predict(corpus.docs[i]);
    rec.outcome = map_to_label(predicted, test.vocabulary);
    result.records.push_back(std::move(rec));
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const ColumnRecord& a, const ColumnRecord& b) {
              return std::tie(a.table_id, a.column_index) < std::tie(b.table_id, b.column_index);
            });
  return result;
}

nlohmann::ordered_json BaselineJson::tfidf(const TfidfModel& m) {
  std::vector<std::string> terms(m.vocabulary_.size());
  for (const auto& [term, index] : m.vocabulary_) {
    terms[index] = term;
  }
  nlohmann::ordered_json doc;
  doc["n_docs"] = m.n_docs_;
  doc["terms"] = terms;
  doc["df"] = m.df_;
  doc["idf"] = m.idf_;
  return doc;
}

TfidfModel BaselineJson::tfidf(const nlohmann::json& doc) {
  TfidfModel m;
  m.n_docs_ = doc.at("n_docs").get<std::size_t>();
  auto terms = doc.at("terms").get<std::vector<std::string>>();
  m.df_ = doc.at("df").get<std::vector<std::size_t>>();
  m.idf_ = doc.at("idf").get<std::vector<double>>();
  if (terms.size() != m.df_.size() || terms.size() != m.idf_.size()) {
    throw LoadError("baseline model: terms, df and idf differ in length");
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    m.vocabulary_[terms[i]] = i;
  }
  return m;
}

nlohmann::ordered_json BaselineJson::forest(const ForestModel& m) {
  nlohmann::ordered_json doc;
  doc["params"] = params_json(m.params_);
  doc["n_features"] = m.n_features_;
  doc["classes"] = m.classes_;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& tree : m.trees_) {
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts});
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc;
}

ForestModel BaselineJson::forest(const nlohmann::json& doc) {
  ForestModel m;
  m.params_ = params_from_json(doc.at("params"));
  m.n_features_ = doc.at("n_features").get<std::size_t>();
  m.classes_ = doc.at("classes").get<std::vector<std::string>>();
  for (const auto& nodes : doc.at("trees")) {
    DecisionTree tree;
    for (const auto& n : nodes) {
      TreeNode node;
      node.feature = n.at(0).get<int>();
      node.threshold = n.at(1).get<double>();
      node.left = n.at(2).get<int>();
      node.right = n.at(3).get<int>();
      node.counts = n.at(4).get<std::vector<std::size_t>>();
      const int size = static_cast<int>(nodes.size());
      if (node.feature >= 0 &&
          (node.left <= 0 || node.right <= 0 || node.left >= size || node.right >= size ||
           static_cast<std::size_t>(node.feature) >= m.n_features_)) {
        throw LoadError("baseline model: malformed tree node");
      }
      if (node.counts.size() != m.classes_.size()) {
        throw LoadError("baseline model: leaf counts do not match the class list");
      }
      tree.nodes.push_back(std::move(node));
    }
    if (tree.nodes.empty()) {
      throw LoadError("baseline model: empty tree");
    }
    m.trees_.push_back(std::move(tree));
  }
  return m;
}

std::string baseline_to_json(const BaselineModel& model) {
  nlohmann::ordered_json doc;
  doc["n_rows"] = model.n_rows;
  doc["tfidf"] = BaselineJson::tfidf(model.tfidf);
  doc["forest"] = BaselineJson::forest(model.forest);
  return doc.dump() + "\n";
}

BaselineModel baseline_from_json(std::string_view content) {
  try {
    auto doc = nlohmann::json::parse(content);
    BaselineModel model;
    model.n_rows = doc.at("n_rows").get<std::size_t>();
    model.tfidf = BaselineJson::tfidf(doc.at("tfidf"));
    model.forest = BaselineJson::forest(doc.at("forest"));
    if (model.forest.n_features() != model.tfidf.n_features()) {
      throw LoadError("baseline model: forest and tfidf disagree on the feature count");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("baseline model: ") + e.what());
  }
}

void save_baseline(const BaselineModel& model, const std::filesystem::path& path) {
  write_file(path, baseline_to_json(model));
}

BaselineModel load_baseline(const std::filesystem::path& path) {
  return baseline_from_json(read_file(path));
}

}  // namespace tablesage
