#pragma once

// Bagged CART trees over dense feature matrices. Classification splits
// maximize the Gini decrease, regression splits the RSS decrease. Inputs are
// the encoder's dense vectors, so a one-hot categorical column splits
// one-vs-rest on each of its slots.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/encoding.hpp"
#include "actgen/error.hpp"
#include "actgen/rng.hpp"
#include "actgen/schedule.hpp"

namespace actgen {

enum class ForestTask { Classification, Regression };

template <typename Label>
double gini(std::span<const Label> labels) {
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "random-forest", "gini of an empty node");
  std::vector<Label> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double p = static_cast<double>(j - i) / n;
    sum_sq += p * p;
    i = j;
  }
  return 1.0 - sum_sq;
}

template <typename Label>
double gini(const std::vector<Label>& labels) {
  return gini(std::span<const Label>(labels));
}

inline double gini_from_counts(std::span<const std::size_t> counts) {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "random-forest", "gini of an empty node");
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

inline double rss(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "random-forest", "rss of an empty node");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double s = 0.0;
  for (double v : values) s += (v - mean) * (v - mean);
  return s;
}

inline double rss(const std::vector<double>& values) { return rss(std::span<const double>(values)); }

/// n*gini(parent) - n_l*gini(left) - n_r*gini(right) from class counts,
/// evaluated as one exact integer fraction before the final division.
inline double gini_split_decrease(std::span<const std::size_t> left, std::span<const std::size_t> right) {
  __int128 nl = 0, nr = 0, al = 0, ar = 0, a = 0;
  for (std::size_t k = 0; k < left.size(); ++k) {
    const __int128 l = static_cast<__int128>(left[k]), r = static_cast<__int128>(right[k]);
    nl += l;
    nr += r;
    al += l * l;
    ar += r * r;
    a += (l + r) * (l + r);
  }
  const __int128 n = nl + nr;
  const __int128 num = n * (al * nr + ar * nl) - a * nl * nr;
  const __int128 den = n * nl * nr;
  return static_cast<double>(num) / static_cast<double>(den);
}

struct ForestConfig {
  std::size_t n_estimators = 100;
  std::size_t min_samples_leaf = 5;
  std::size_t max_samples = 10000;
  ForestTask task = ForestTask::Classification;
  std::size_t max_features = 0;  // 0: ceil(sqrt p) for classification, ceil(p/3) for regression
  std::uint64_t seed = 1;

  std::size_t features_per_split(std::size_t p) const {
    if (max_features > 0) return std::min(max_features, p);
    const double pd = static_cast<double>(p);
    const double k = task == ForestTask::Classification ? std::ceil(std::sqrt(pd)) : std::ceil(pd / 3.0);
    return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, std::max<std::size_t>(p, 1));
  }

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

/// Default bootstrap cap per person group.
inline std::size_t default_max_samples(PersonGroup g) { return g == PersonGroup::Worker ? 10000 : 5000; }

inline nlohmann::json forest_config_to_json(const ForestConfig& c) {
  return {{"n_estimators", c.n_estimators}, {"min_samples_leaf", c.min_samples_leaf},
          {"max_samples", c.max_samples},
          {"task", c.task == ForestTask::Classification ? "classification" : "regression"},
          {"max_features", c.max_features}, {"seed", c.seed}};
}

/// Dense row-major design matrix with labels or targets.
struct ForestDataset {
  std::vector<double> x;
  std::size_t n_features = 0;
  std::vector<std::size_t> labels;
  std::vector<double> targets;
  std::size_t n_classes = 0;  // 0 for regression
  // source feature of each dense column (one-hot or embedding spans share
  // one); empty means every column is its own feature
  std::vector<std::size_t> groups;

  std::size_t n_groups() const {
    return groups.empty() ? n_features : *std::max_element(groups.begin(), groups.end()) + 1;
  }

  std::size_t size() const { return n_features ? x.size() / n_features : (labels.size() + targets.size()); }
  bool classification() const { return n_classes > 0; }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * n_features, n_features}; }
  double at(std::size_t i, std::size_t f) const { return x[i * n_features + f]; }

  void push(std::span<const double> features) {
    if (n_features == 0 && x.empty()) n_features = features.size();
    if (features.size() != n_features)
      throw Error(ErrorCode::SchemaMismatch, "random-forest", "row width differs from the dataset");
    x.insert(x.end(), features.begin(), features.end());
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x <= threshold goes left
  int left = -1, right = -1;
  std::vector<double> value;  // class distribution, or {mean}
  std::size_t samples = 0;
  double impurity_decrease = 0.0;  // weighted by sample count

  bool leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;

  std::size_t leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].leaf())
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                        : nodes[i].right);
    return i;
  }
  const std::vector<double>& predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }
  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      best = std::max(best, d[i]);
      if (!nodes[i].leaf()) {
        d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
        d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
      }
    }
    return best;
  }
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

namespace detail {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
  // exact comparison key for classification: proxy_num / proxy_den
  __int128 proxy_num = 0, proxy_den = 1;
  double proxy = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const ForestDataset& data, const ForestConfig& cfg, std::uint64_t seed)
      : data_(data), cfg_(cfg), rng_(seed), classification_(data.classification()) {
    members_.resize(data.n_groups());
    for (std::size_t c = 0; c < data.n_features; ++c) members_[data.groups.empty() ? c : data.groups[c]].push_back(c);
  }

  DecisionTree build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    tree_.n_features = data_.n_features;
    tree_.nodes.clear();
    build_node(0, samples_.size());
    return std::move(tree_);
  }

 private:
  std::vector<double> leaf_value(std::size_t begin, std::size_t end) const {
    const double n = static_cast<double>(end - begin);
    if (classification_) {
      std::vector<double> dist(data_.n_classes, 0.0);
      for (std::size_t k = begin; k < end; ++k) dist[data_.labels[samples_[k]]] += 1.0;
      for (double& v : dist) v /= n;
      return dist;
    }
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += data_.targets[samples_[k]];
    return {s / n};
  }

  bool pure(std::size_t begin, std::size_t end) const {
    for (std::size_t k = begin + 1; k < end; ++k) {
      if (classification_) {
        if (data_.labels[samples_[k]] != data_.labels[samples_[begin]]) return false;
      } else if (data_.targets[samples_[k]] != data_.targets[samples_[begin]]) {
        return false;
      }
    }
    return true;
  }

  static bool better(const SplitChoice& cand, const SplitChoice& best, bool classification) {
    if (!best.found) return true;
    if (classification) {
      const __int128 lhs = cand.proxy_num * best.proxy_den, rhs = best.proxy_num * cand.proxy_den;
      if (lhs != rhs) return lhs > rhs;
    } else if (cand.proxy != best.proxy) {
      return cand.proxy > best.proxy;
    }
    if (cand.feature != best.feature) return cand.feature < best.feature;
    return cand.threshold < best.threshold;
  }

  /// Best split of one feature; returns false when the feature is constant.
  bool scan_feature(std::size_t f, std::size_t begin, std::size_t end, SplitChoice& best) {
    const std::size_t n = end - begin;
    const double first = data_.at(samples_[begin], f);
    bool constant = true;
    for (std::size_t k = begin + 1; k < end && constant; ++k) constant = data_.at(samples_[k], f) == first;
    if (constant) return false;
    order_.resize(n);
    for (std::size_t k = 0; k < n; ++k) order_[k] = {data_.at(samples_[begin + k], f), samples_[begin + k]};
    std::sort(order_.begin(), order_.end());
    if (order_.front().first == order_.back().first) return false;
    const std::size_t min_leaf = std::max<std::size_t>(cfg_.min_samples_leaf, 1);

    if (classification_) {
      const std::size_t K = data_.n_classes;
      left_.assign(K, 0);
      right_.assign(K, 0);
      for (auto& [v, i] : order_) ++right_[data_.labels[i]];
      __int128 al = 0, ar = 0;
      for (auto c : right_) ar += static_cast<__int128>(c) * static_cast<__int128>(c);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t y = data_.labels[order_[k].second];
        // moving one sample of class y: c^2 changes by 2c+1 / -(2c-1)
        al += 2 * static_cast<__int128>(left_[y]) + 1;
        ar -= 2 * static_cast<__int128>(right_[y]) - 1;
        ++left_[y];
        --right_[y];
        const std::size_t nl = k + 1, nr = n - nl;
        if (order_[k].first == order_[k + 1].first || nl < min_leaf || nr < min_leaf) continue;
        SplitChoice cand;
        cand.found = true;
        cand.feature = f;
        cand.threshold = order_[k].first + (order_[k + 1].first - order_[k].first) / 2.0;
        cand.proxy_num = al * static_cast<__int128>(nr) + ar * static_cast<__int128>(nl);
        cand.proxy_den = static_cast<__int128>(nl) * static_cast<__int128>(nr);
        if (better(cand, best, true)) {
          cand.decrease = gini_split_decrease(left_, right_);
          best = cand;
        }
      }
    } else {
      double total = 0.0;
      for (auto& [v, i] : order_) total += data_.targets[i];
      const double parent_term = total * total / static_cast<double>(n);
      double sl = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        sl += data_.targets[order_[k].second];
        const std::size_t nl = k + 1, nr = n - nl;
        if (order_[k].first == order_[k + 1].first || nl < min_leaf || nr < min_leaf) continue;
        const double sr = total - sl;
        SplitChoice cand;
        cand.found = true;
        cand.feature = f;
        cand.threshold = order_[k].first + (order_[k + 1].first - order_[k].first) / 2.0;
        cand.proxy = sl * sl / static_cast<double>(nl) + sr * sr / static_cast<double>(nr);
        if (better(cand, best, false)) {
          cand.decrease = std::max(0.0, cand.proxy - parent_term);
          best = cand;
        }
      }
    }
    return true;
  }

  std::size_t build_node(std::size_t begin, std::size_t end) {
    const std::size_t id = tree_.nodes.size();
    tree_.nodes.push_back({});
    tree_.nodes[id].samples = end - begin;
    tree_.nodes[id].value = leaf_value(begin, end);
    const std::size_t n = end - begin;
    const std::size_t min_leaf = std::max<std::size_t>(cfg_.min_samples_leaf, 1);
    if (n < 2 * min_leaf || pure(begin, end)) return id;

    std::vector<std::size_t> features(members_.size());
    std::iota(features.begin(), features.end(), std::size_t{0});
    rng_.shuffle(features);
    const std::size_t want = cfg_.features_per_split(members_.size());
    SplitChoice best;
    std::size_t visited = 0;
    for (std::size_t f : features) {
      if (visited >= want && best.found) break;
      bool varies = false;
      for (std::size_t column : members_[f]) varies = scan_feature(column, begin, end, best) || varies;
      if (varies) ++visited;
    }
    if (!best.found) return id;

    auto mid = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                              samples_.begin() + static_cast<std::ptrdiff_t>(end),
                              [&](std::size_t i) { return data_.at(i, best.feature) <= best.threshold; });
    const std::size_t split = static_cast<std::size_t>(mid - samples_.begin());
    tree_.nodes[id].feature = static_cast<int>(best.feature);
    tree_.nodes[id].threshold = best.threshold;
    tree_.nodes[id].impurity_decrease = best.decrease;
    const std::size_t l = build_node(begin, split);
    const std::size_t r = build_node(split, end);
    tree_.nodes[id].left = static_cast<int>(l);
    tree_.nodes[id].right = static_cast<int>(r);
    return id;
  }

  const ForestDataset& data_;
  const ForestConfig& cfg_;
  Rng rng_;
  bool classification_;
  DecisionTree tree_;
  std::vector<std::size_t> samples_;
  std::vector<std::pair<double, std::size_t>> order_;
  std::vector<std::size_t> left_, right_;
  std::vector<std::vector<std::size_t>> members_;  // dense columns per source feature
};

}  // namespace detail

/// Greedy tree over the listed samples (duplicates allowed, as in a bootstrap).
inline DecisionTree fit_tree(const ForestDataset& data, std::vector<std::size_t> samples, const ForestConfig& cfg,
                             std::uint64_t seed) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "random-forest", "no samples to fit");
  detail::TreeBuilder builder(data, cfg, seed);
  return builder.build(std::move(samples));
}

inline DecisionTree fit_tree(const ForestDataset& data, const ForestConfig& cfg, std::uint64_t seed) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_tree(data, std::move(all), cfg, seed);
}

struct Forest {
  std::vector<DecisionTree> trees;
  ForestConfig config;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;

  friend bool operator==(const Forest&, const Forest&) = default;
};

inline std::size_t bootstrap_size(const ForestConfig& cfg, std::size_t n) { return std::min(cfg.max_samples, n); }

inline Forest fit_forest(const ForestDataset& data, const ForestConfig& cfg) {
  if (data.size() == 0) throw Error(ErrorCode::InvalidArgument, "random-forest", "empty dataset");
  if (cfg.n_estimators == 0) throw Error(ErrorCode::InvalidArgument, "random-forest", "n_estimators must be positive");
  if ((cfg.task == ForestTask::Classification) != data.classification())
    throw Error(ErrorCode::InvalidArgument, "random-forest", "forest task does not match the dataset");
  Forest forest;
  forest.config = cfg;
  forest.n_features = data.n_features;
  forest.n_classes = data.n_classes;
  const std::size_t n = data.size();
  const std::size_t m = bootstrap_size(cfg, n);
  for (std::size_t t = 0; t < cfg.n_estimators; ++t) {
    const std::uint64_t tree_seed = derive_seed(cfg.seed, t);
    Rng rng(derive_seed(tree_seed, 0x626f6f74ULL));
    std::vector<std::size_t> sample(m);
    for (auto& s : sample) s = rng.index(n);
    forest.trees.push_back(fit_tree(data, std::move(sample), cfg, tree_seed));
  }
  return forest;
}

/// Mean of the per-tree leaf values: a class distribution or {value}.
inline std::vector<double> predict(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.n_features)
    throw Error(ErrorCode::SchemaMismatch, "random-forest",
                "input width " + std::to_string(x.size()) + " != " + std::to_string(forest.n_features));
  std::vector<double> acc;
  for (const auto& tree : forest.trees) {
    const auto& v = tree.predict(x);
    if (acc.empty()) acc.assign(v.size(), 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) acc[k] += v[k];
  }
  for (double& v : acc) v /= static_cast<double>(forest.trees.size());
  return acc;
}

inline double predict_value(const Forest& forest, std::span<const double> x) { return predict(forest, x).front(); }

inline std::size_t predict_class(const Forest& forest, std::span<const double> x) {
  const auto dist = predict(forest, x);
  return static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
}

struct FeatureScore {
  std::string feature;
  double score = 0.0;
};

/// Mean per-tree share of impurity decrease, indexed by dense feature.
inline std::vector<double> feature_importance_dense(const Forest& forest) {
  std::vector<double> total(forest.n_features, 0.0);
  for (const auto& tree : forest.trees) {
    std::vector<double> per(forest.n_features, 0.0);
    double sum = 0.0;
    for (const auto& node : tree.nodes)
      if (!node.leaf()) {
        per[static_cast<std::size_t>(node.feature)] += node.impurity_decrease;
        sum += node.impurity_decrease;
      }
    if (sum <= 0.0) continue;
    for (std::size_t f = 0; f < per.size(); ++f) total[f] += per[f] / sum;
  }
  double sum = 0.0;
  for (double v : total) sum += v;
  if (sum > 0.0)
    for (double& v : total) v /= sum;
  return total;
}

/// Importance per source column (dense spans summed), descending.
inline std::vector<FeatureScore> feature_importance(const Forest& forest, const std::vector<ColumnSpan>& provenance) {
  const auto dense = feature_importance_dense(forest);
  std::vector<FeatureScore> out;
  for (const auto& span : provenance) {
    if (span.offset + span.width > dense.size())
      throw Error(ErrorCode::SchemaMismatch, "random-forest", "provenance does not match the forest width");
    double s = 0.0;
    for (std::size_t k = 0; k < span.width; ++k) s += dense[span.offset + k];
    out.push_back({span.column, s});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;
}

// ---------------------------------------------------------------------------
// Grid search with k-fold cross-validation
// ---------------------------------------------------------------------------

struct RfGrid {
  std::vector<std::size_t> n_estimators{100};
  std::vector<std::size_t> min_samples_leaf{5};
  std::vector<std::size_t> max_samples{10000};

  std::size_t size() const { return n_estimators.size() * min_samples_leaf.size() * max_samples.size(); }

  std::vector<ForestConfig> expand(const ForestConfig& base) const {
    std::vector<ForestConfig> out;
    for (auto ms : max_samples)
      for (auto leaf : min_samples_leaf)
        for (auto n : n_estimators) {
          ForestConfig c = base;
          c.n_estimators = n;
          c.min_samples_leaf = leaf;
          c.max_samples = ms;
          out.push_back(c);
        }
    return out;
  }
};

/// 3 forest sizes x 5 leaf sizes x 2 bootstrap caps: 30 points.
inline RfGrid full_rf_grid() { return RfGrid{{40, 60, 100}, {3, 5, 6, 10, 20}, {5000, 10000}}; }

struct RfGridRow {
  ForestConfig config;
  double train_metric = 0.0;  // mean over folds, on the training part
  double valid_metric = 0.0;  // mean over folds, on the held-out fold
};

struct RfGridResult {
  std::vector<RfGridRow> rows;
  std::size_t best = 0;
};

inline ForestDataset subset(const ForestDataset& data, std::span<const std::size_t> idx) {
  ForestDataset out;
  out.n_features = data.n_features;
  out.n_classes = data.n_classes;
  out.groups = data.groups;
  out.x.reserve(idx.size() * data.n_features);
  for (std::size_t i : idx) {
    auto r = data.row(i);
    out.x.insert(out.x.end(), r.begin(), r.end());
    if (data.classification())
      out.labels.push_back(data.labels[i]);
    else
      out.targets.push_back(data.targets[i]);
  }
  return out;
}

/// Accuracy (classification) or RMSE (regression) of a forest on rows `idx`.
inline double forest_metric(const Forest& forest, const ForestDataset& data, std::span<const std::size_t> idx) {
  if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (std::size_t i : idx) {
    if (data.classification()) {
      acc += predict_class(forest, data.row(i)) == data.labels[i] ? 1.0 : 0.0;
    } else {
      const double e = predict_value(forest, data.row(i)) - data.targets[i];
      acc += e * e;
    }
  }
  acc /= static_cast<double>(idx.size());
  return data.classification() ? acc : std::sqrt(acc);
}

/// Seeded shuffle of [0, n) dealt into k folds of near-equal size.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(idx[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

inline RfGridResult grid_search_rf(const ForestDataset& data, const std::vector<ForestConfig>& grid,
                                   std::size_t k_folds = 5, std::uint64_t fold_seed = 1) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "random-forest", "empty grid");
  if (data.size() < k_folds)
    throw Error(ErrorCode::InvalidArgument, "random-forest", "need at least one sample per fold");
  const auto folds = make_folds(data.size(), k_folds, fold_seed);
  RfGridResult result;
  for (const auto& cfg : grid) {
    RfGridRow row{cfg};
    for (std::size_t f = 0; f < k_folds; ++f) {
      std::vector<std::size_t> train_idx;
      for (std::size_t g = 0; g < k_folds; ++g)
        if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
      std::sort(train_idx.begin(), train_idx.end());
      const ForestDataset train_part = subset(data, train_idx);
      const Forest forest = fit_forest(train_part, cfg);
      std::vector<std::size_t> all(train_part.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      row.train_metric += forest_metric(forest, train_part, all);
      row.valid_metric += forest_metric(forest, data, folds[f]);
    }
    row.train_metric /= static_cast<double>(k_folds);
    row.valid_metric /= static_cast<double>(k_folds);
    result.rows.push_back(row);
  }
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    const double a = result.rows[i].valid_metric, b = result.rows[result.best].valid_metric;
    if (data.classification() ? a > b : a < b) result.best = i;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Persistence: one flat array per node attribute
// ---------------------------------------------------------------------------

inline nlohmann::json forest_to_json(const Forest& forest) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : forest.trees) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, decrease;
    std::vector<std::size_t> samples;
    std::vector<std::vector<double>> value;
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      samples.push_back(n.samples);
      decrease.push_back(n.impurity_decrease);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                     {"samples", samples}, {"impurity_decrease", decrease}, {"value", value}});
  }
  return {{"config", forest_config_to_json(forest.config)},
          {"n_features", forest.n_features},
          {"n_classes", forest.n_classes},
          {"trees", std::move(trees)}};
}

inline Forest forest_from_json(const nlohmann::json& j) {
  Forest forest;
  const auto& c = j.at("config");
  forest.config.n_estimators = c.at("n_estimators");
  forest.config.min_samples_leaf = c.at("min_samples_leaf");
  forest.config.max_samples = c.at("max_samples");
  forest.config.task = c.at("task") == "classification" ? ForestTask::Classification : ForestTask::Regression;
  forest.config.max_features = c.at("max_features");
  forest.config.seed = c.at("seed");
  forest.n_features = j.at("n_features");
  forest.n_classes = j.at("n_classes");
  for (const auto& t : j.at("trees")) {
    DecisionTree tree;
    tree.n_features = forest.n_features;
    const auto feature = t.at("feature").get<std::vector<int>>();
    const auto threshold = t.at("threshold").get<std::vector<double>>();
    const auto left = t.at("left").get<std::vector<int>>();
    const auto right = t.at("right").get<std::vector<int>>();
    const auto samples = t.at("samples").get<std::vector<std::size_t>>();
    const auto decrease = t.at("impurity_decrease").get<std::vector<double>>();
    const auto value = t.at("value").get<std::vector<std::vector<double>>>();
    for (std::size_t i = 0; i < feature.size(); ++i)
      tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i], samples[i], decrease[i]});
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

}  // namespace actgen
