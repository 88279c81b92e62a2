#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>

#include "cdp/error.hpp"
#include "cdp/learn.hpp"
#include "cdp/parallel.hpp"

namespace cdp {

namespace {

double impurity(const std::vector<std::size_t>& counts, std::size_t total, SplitCriterion c) {
  if (total == 0) return 0;
  double out = c == SplitCriterion::gini ? 1.0 : 0.0;
  for (std::size_t k : counts) {
    if (k == 0) continue;
    const double p = static_cast<double>(k) / static_cast<double>(total);
    if (c == SplitCriterion::gini)
      out -= p * p;
    else
      out -= p * std::log2(p);
  }
  return out;
}

int majority(const std::vector<std::size_t>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double midpoint(double a, double b) {
  const double m = a / 2 + b / 2;
  return (m < a || m >= b) ? a : m;
}

struct Split {
  int feature = -1;
  double threshold = 0;
  double impurity = 0;
};

class Grower {
 public:
  Grower(const TrainingSet& data, const TreeParams& params, int classes, std::size_t max_features, Rng* rng)
      : data_(data), params_(params), classes_(classes), max_features_(max_features), rng_(rng) {}

  DecisionTree grow(std::vector<std::size_t> sample) {
    tree_.classes = classes_;
    build(sample, 0);
    return std::move(tree_);
  }

 private:
  int build(std::vector<std::size_t>& sample, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::vector<std::size_t> counts(static_cast<std::size_t>(classes_), 0);
    for (std::size_t i : sample) ++counts[static_cast<std::size_t>(data_.labels[i])];
    tree_.nodes[id].counts = counts;
    tree_.nodes[id].label = majority(counts);

    const double parent = impurity(counts, sample.size(), params_.criterion);
    const bool depth_done = params_.depth_limit && depth >= *params_.depth_limit;
    if (depth_done || sample.size() < params_.min_samples_split || parent <= 0) return id;

    const Split best = find_split(sample, counts, parent);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : sample)
      (data_.rows[i][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(i);
    sample.clear();
    sample.shrink_to_fit();
    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    const int l = build(left, depth + 1);
    tree_.nodes[id].left = l;
    const int r = build(right, depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  Split find_split(const std::vector<std::size_t>& sample, const std::vector<std::size_t>& counts, double parent) {
    const std::size_t dim = data_.dimension();
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), 0);
    if (rng_ && max_features_ < dim) rng_->shuffle(order.begin(), order.end());
    const std::size_t n = sample.size();
    const double tolerance = 1e-12;
    Split best;
    best.impurity = parent - tolerance;
    std::vector<std::pair<double, int>> column(n);
    std::vector<std::size_t> left(counts.size()), right(counts.size());
    std::size_t inspected = 0;
    for (std::size_t f : order) {
      if (inspected >= max_features_ && best.feature >= 0) break;
      ++inspected;
      for (std::size_t k = 0; k < n; ++k) column[k] = {data_.rows[sample[k]][f], data_.labels[sample[k]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      std::fill(left.begin(), left.end(), 0);
      right = counts;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        ++left[static_cast<std::size_t>(column[k].second)];
        --right[static_cast<std::size_t>(column[k].second)];
        if (column[k].first == column[k + 1].first) continue;
        const std::size_t nl = k + 1, nr = n - nl;
        if (nl < params_.min_samples_leaf || nr < params_.min_samples_leaf) continue;
        const double weighted = (static_cast<double>(nl) * impurity(left, nl, params_.criterion) +
                                 static_cast<double>(nr) * impurity(right, nr, params_.criterion)) /
                                static_cast<double>(n);
        if (weighted < best.impurity) {
          best.feature = static_cast<int>(f);
          best.threshold = midpoint(column[k].first, column[k + 1].first);
          best.impurity = weighted;
        }
      }
    }
    return best;
  }

  const TrainingSet& data_;
  const TreeParams& params_;
  int classes_;
  std::size_t max_features_;
  Rng* rng_;
  DecisionTree tree_;
};

void check_training_set(const TrainingSet& data) {
  if (data.rows.empty()) throw Error(ErrorCode::empty_data, "no training samples");
  if (data.labels.size() != data.rows.size())
    throw Error(ErrorCode::invalid_argument, "label count does not match row count");
  for (const auto& r : data.rows)
    if (r.size() != data.dimension()) throw Error(ErrorCode::invalid_argument, "rows differ in dimension");
  for (int l : data.labels)
    if (l < 0) throw Error(ErrorCode::invalid_argument, "labels must be non-negative");
}

}  // namespace

int TrainingSet::classes() const {
  int m = 1;
  for (int l : labels) m = std::max(m, l);
  return m + 1;
}

std::string_view to_string(SplitCriterion c) { return c == SplitCriterion::gini ? "gini" : "entropy"; }

SplitCriterion parse_split_criterion(std::string_view s) {
  if (s == "gini") return SplitCriterion::gini;
  if (s == "entropy") return SplitCriterion::entropy;
  throw Error(ErrorCode::config_error, "unknown split criterion '" + std::string(s) + "'");
}

std::string_view to_string(ForestVote v) { return v == ForestVote::vote ? "vote" : "average"; }

ForestVote parse_forest_vote(std::string_view s) {
  if (s == "vote") return ForestVote::vote;
  if (s == "average") return ForestVote::average;
  throw Error(ErrorCode::config_error, "unknown forest vote '" + std::string(s) + "'");
}

int default_depth_limit(std::size_t samples) {
  if (samples < 2) return 1;
  return std::max(1, static_cast<int>(std::bit_width(samples)) - 2);
}

const TreeNode& DecisionTree::leaf_for(const FeatureVector& x) const {
  const TreeNode* n = &nodes.at(0);
  while (!n->leaf()) n = &nodes[static_cast<std::size_t>(x.at(static_cast<std::size_t>(n->feature)) <= n->threshold ? n->left : n->right)];
  return *n;
}

std::size_t DecisionTree::depth() const {
  std::function<std::size_t(int)> d = [&](int i) -> std::size_t {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    return n.leaf() ? 0 : 1 + std::max(d(n.left), d(n.right));
  };
  return nodes.empty() ? 0 : d(0);
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf(); }));
}

DecisionTree train_tree(const TrainingSet& data, const TreeParams& params) {
  check_training_set(data);
  std::vector<std::size_t> sample(data.size());
  std::iota(sample.begin(), sample.end(), 0);
  return Grower(data, params, data.classes(), data.dimension(), nullptr).grow(std::move(sample));
}

ForestModel train_forest(const TrainingSet& data, const ForestParams& params) {
  check_training_set(data);
  if (params.trees == 0) throw Error(ErrorCode::config_error, "a forest needs at least one tree");
  ForestModel f;
  f.vote = params.vote;
  f.classes = data.classes();
  const std::size_t dim = data.dimension();
  f.max_features = params.max_features
                       ? std::min(params.max_features, dim)
                       : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(dim)))));
  f.trees.resize(params.trees);
  f.tree_seeds.resize(params.trees);
  for (std::size_t t = 0; t < params.trees; ++t) f.tree_seeds[t] = derive_seed(params.seed, "tree", t);
  parallel_for(params.trees, params.workers, [&](std::size_t t) {
    Rng rng(f.tree_seeds[t]);
    std::vector<std::size_t> sample(data.size());
    if (params.bootstrap)
      for (auto& s : sample) s = rng.below(data.size());
    else
      std::iota(sample.begin(), sample.end(), 0);
    f.trees[t] = Grower(data, params.tree, f.classes, f.max_features, &rng).grow(std::move(sample));
  });
  return f;
}

int ForestModel::predict(const FeatureVector& x) const {
  std::vector<double> tally(static_cast<std::size_t>(classes), 0.0);
  for (const auto& t : trees) {
    const TreeNode& leaf = t.leaf_for(x);
    if (vote == ForestVote::vote) {
      tally[static_cast<std::size_t>(leaf.label)] += 1;
    } else {
      const double total = static_cast<double>(std::accumulate(leaf.counts.begin(), leaf.counts.end(), std::size_t{0}));
      for (std::size_t c = 0; c < leaf.counts.size(); ++c) tally[c] += static_cast<double>(leaf.counts[c]) / total;
    }
  }
  return static_cast<int>(std::max_element(tally.begin(), tally.end()) - tally.begin());
}

}  // namespace cdp
