#include "lulc/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lulc/error.hpp"
#include "lulc/rng.hpp"

namespace lulc::cart {

namespace {

double entropy_of_counts(const std::vector<std::int64_t>& counts, std::int64_t total) {
  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = double(c) / double(total);
    h -= p * std::log(p);
  }
  return h;
}

double gini_of_counts(const std::vector<std::int64_t>& counts, std::int64_t total) {
  double sum_sq = 0.0;
  for (std::int64_t c : counts) {
    const double p = double(c) / double(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

int majority_class(const std::vector<std::int64_t>& counts) {
  int best = 0;
  for (int c = 1; c < int(counts.size()); ++c)
    if (counts[c] > counts[best]) best = c;  // ties keep the lower index
  return best;
}

}  // namespace

double gini(const Eigen::Ref<const Eigen::VectorXd>& proportions) {
  require(proportions.size() > 0, "empty_input", "gini needs at least one proportion");
  double sum = 0.0, sum_sq = 0.0;
  for (Eigen::Index i = 0; i < proportions.size(); ++i) {
    const double p = proportions(i);
    require(p >= 0.0, "bad_proportions", "proportions must be non-negative");
    sum += p;
    sum_sq += p * p;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "bad_proportions",
          "proportions must sum to 1 (got " + std::to_string(sum) + ")");
  return 1.0 - sum_sq;
}

double info_gain(const std::vector<std::int64_t>& parent,
                 const std::vector<std::vector<std::int64_t>>& children) {
  require(!parent.empty(), "empty_input", "info_gain needs a parent count vector");
  require(!children.empty(), "empty_input", "info_gain needs at least one child");
  const std::int64_t total = std::accumulate(parent.begin(), parent.end(), std::int64_t(0));
  require(total > 0, "empty_input", "parent node has no samples");

  std::vector<std::int64_t> recombined(parent.size(), 0);
  double weighted = 0.0;
  for (const auto& child : children) {
    require(child.size() == parent.size(), "length_mismatch",
            "child count vectors must match the parent's class count");
    const std::int64_t child_total =
        std::accumulate(child.begin(), child.end(), std::int64_t(0));
    for (std::size_t c = 0; c < child.size(); ++c) {
      require(child[c] >= 0, "bad_counts", "counts must be non-negative");
      recombined[c] += child[c];
    }
    if (child_total > 0)
      weighted += (double(child_total) / double(total)) * entropy_of_counts(child, child_total);
  }
  require(recombined == parent, "count_mismatch", "children must partition the parent counts");
  return entropy_of_counts(parent, total) - weighted;
}

std::optional<Split> best_split(const Eigen::MatrixXf& features, const std::vector<int>& labels,
                                const std::vector<int>& node_samples,
                                const std::vector<int>& candidate_features, Criterion criterion,
                                int k, int min_leaf) {
  require(k >= 1, "bad_classes", "best_split needs k >= 1");
  require(node_samples.size() >= 2, "bad_node", "best_split needs at least 2 samples");
  require(!candidate_features.empty(), "bad_node", "best_split needs candidate features");
  if (min_leaf < 1) min_leaf = 1;

  const std::int64_t n = std::int64_t(node_samples.size());
  std::vector<std::int64_t> parent(k, 0);
  for (int idx : node_samples) ++parent[labels[idx]];

  const double parent_impurity = criterion == Criterion::gini ? gini_of_counts(parent, n) : 0.0;
  const double parent_entropy =
      criterion == Criterion::info_gain ? entropy_of_counts(parent, n) : 0.0;

  // Candidates are scanned in ascending feature order and thresholds in
  // ascending value order, so keeping only strict improvements lands on the
  // (lowest feature, lowest threshold) winner among ties.
  std::vector<int> order(candidate_features);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  std::optional<Split> best;
  std::vector<std::pair<float, int>> column(node_samples.size());
  std::vector<std::int64_t> left(k);
  for (int f : order) {
    require(f >= 0 && f < int(features.cols()), "bad_feature",
            "candidate feature index out of range");
    for (std::size_t i = 0; i < node_samples.size(); ++i) {
      const int idx = node_samples[i];
      column[i] = {features(idx, f), labels[idx]};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::fill(left.begin(), left.end(), 0);
    std::int64_t n_left = 0;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      ++left[column[i].second];
      ++n_left;
      if (column[i].first == column[i + 1].first) continue;  // not a value boundary
      const std::int64_t n_right = n - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;

      double score;
      if (criterion == Criterion::gini) {
        double right_gini;
        {
          double sum_sq = 0.0;
          for (int c = 0; c < k; ++c) {
            const double p = double(parent[c] - left[c]) / double(n_right);
            sum_sq += p * p;
          }
          right_gini = 1.0 - sum_sq;
        }
        score = parent_impurity - (double(n_left) / double(n)) * gini_of_counts(left, n_left) -
                (double(n_right) / double(n)) * right_gini;
      } else {
        double right_entropy = 0.0;
        for (int c = 0; c < k; ++c) {
          const std::int64_t rc = parent[c] - left[c];
          if (rc == 0) continue;
          const double p = double(rc) / double(n_right);
          right_entropy -= p * std::log(p);
        }
        score = parent_entropy -
                (double(n_left) / double(n)) * entropy_of_counts(left, n_left) -
                (double(n_right) / double(n)) * right_entropy;
      }

      if (score <= 0.0) continue;
      if (!best || score > best->score) {
        const double threshold = (double(column[i].first) + double(column[i + 1].first)) / 2.0;
        best = Split{f, threshold, score};
      }
    }
  }
  return best;
}

namespace {

struct Grower {
  const SampleSet& train;
  const TreeConfig& cfg;
  Tree& tree;
  Rng rng;
  int mtry;
  std::vector<int> feature_pool;

  int build(std::vector<int>& samples, int depth) {
    const int k = train.k();
    std::vector<std::int64_t> counts(k, 0);
    for (int idx : samples) ++counts[train.labels[idx]];

    const auto node_id = int(tree.nodes.size());
    tree.nodes.emplace_back();

    const std::int64_t dominant = *std::max_element(counts.begin(), counts.end());
    const bool pure = dominant == std::int64_t(samples.size());
    const bool depth_capped = cfg.max_depth > 0 && depth >= cfg.max_depth;
    const bool too_small = std::int64_t(samples.size()) < 2 * std::int64_t(cfg.min_leaf) ||
                           samples.size() < 2;

    std::optional<Split> split;
    if (!pure && !depth_capped && !too_small) {
      // Fresh feature subset for every node.
      std::iota(feature_pool.begin(), feature_pool.end(), 0);
      partial_shuffle(feature_pool, std::size_t(mtry), rng);
      std::vector<int> candidates(feature_pool.begin(), feature_pool.begin() + mtry);
      split = best_split(train.features, train.labels, samples, candidates, cfg.criterion, k,
                         cfg.min_leaf);
    }

    if (!split) {
      tree.nodes[node_id].counts = std::move(counts);
      return node_id;
    }

    std::vector<int> left_samples, right_samples;
    for (int idx : samples) {
      if (train.features(idx, split->feature) <= split->threshold)
        left_samples.push_back(idx);
      else
        right_samples.push_back(idx);
    }
    samples.clear();
    samples.shrink_to_fit();

    const int left_id = build(left_samples, depth + 1);
    const int right_id = build(right_samples, depth + 1);
    tree.nodes[node_id].feature = split->feature;
    tree.nodes[node_id].threshold = split->threshold;
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }
};

}  // namespace

Tree grow_tree(const SampleSet& train, const TreeConfig& cfg) {
  require(train.n() >= 1, "empty_samples", "cannot grow a tree from zero samples");
  require(cfg.min_leaf >= 1, "bad_config", "min_leaf must be at least 1");
  require(cfg.max_depth >= 0, "bad_config", "max_depth must be non-negative");
  const int m = train.m();
  int mtry = cfg.mtry;
  if (mtry == 0) mtry = std::max(1, int(std::floor(std::sqrt(double(m)))));
  require(mtry >= 1 && mtry <= m, "bad_config",
          "mtry must lie in [1, m]; got " + std::to_string(mtry));

  Tree tree;
  tree.m = m;
  tree.k = train.k();
  Grower grower{train, cfg, tree, Rng(cfg.seed), mtry, std::vector<int>(std::size_t(m))};
  std::vector<int> all(std::size_t(train.n()));
  std::iota(all.begin(), all.end(), 0);
  grower.build(all, 0);
  return tree;
}

std::pair<int, Eigen::VectorXd> predict_tree(const Tree& tree,
                                             const Eigen::Ref<const Eigen::VectorXf>& x) {
  require(!tree.nodes.empty(), "empty_model", "tree has no nodes");
  require(int(x.size()) == tree.m, "length_mismatch",
          "feature vector has " + std::to_string(x.size()) + " entries, tree expects " +
              std::to_string(tree.m));
  require(x.allFinite(), "nonfinite_feature", "feature vector contains NaN/inf");

  int node = 0;
  while (tree.nodes[node].feature >= 0) {
    const TreeNode& nd = tree.nodes[node];
    node = double(x(nd.feature)) <= nd.threshold ? nd.left : nd.right;
  }
  const auto& counts = tree.nodes[node].counts;
  const std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t(0));
  Eigen::VectorXd dist(tree.k);
  for (int c = 0; c < tree.k; ++c) dist(c) = double(counts[c]) / double(total);
  return {majority_class(counts), std::move(dist)};
}

}  // namespace lulc::cart
