#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lulc/raster.hpp"

namespace lulc::cart {

enum class Criterion { gini, info_gain };

struct TreeConfig {
  Criterion criterion = Criterion::gini;
  int mtry = 0;      // features tried per node; 0 means floor(sqrt(m)), minimum 1
  int min_leaf = 1;  // minimum samples on each side of a split
  int max_depth = 0; // 0 = unlimited
  std::uint64_t seed = 0;
};

// Flat-arena binary tree. Internal nodes route x[feature] <= threshold to
// `left`; leaves carry raw class counts (never all zero).
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::int64_t> counts;  // k entries on leaves, empty otherwise
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int m = 0;                    // expected feature count
  int k = 0;                    // class count
};

// Gini impurity 1 - sum p_c^2 of a proportion vector (non-negative, sums to
// 1 within 1e-9).
double gini(const Eigen::Ref<const Eigen::VectorXd>& proportions);

// Shannon information gain (natural log) of splitting a parent count vector
// into child count vectors; children must sum to the parent exactly.
double info_gain(const std::vector<std::int64_t>& parent,
                 const std::vector<std::vector<std::int64_t>>& children);

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // impurity decrease (gini) or information gain
};

// Exhaustive threshold search over the candidate features: thresholds sit at
// midpoints between consecutive distinct values, children need min_leaf
// samples each, and the best positive score wins with ties broken toward the
// lower feature index, then the lower threshold. Empty when nothing
// separates the node.
std::optional<Split> best_split(const Eigen::MatrixXf& features, const std::vector<int>& labels,
                                const std::vector<int>& node_samples,
                                const std::vector<int>& candidate_features, Criterion criterion,
                                int k, int min_leaf = 1);

// Recursive CART. Each node draws a fresh mtry-subset of features without
// replacement from the tree's seeded stream, so a fixed seed fixes the tree.
Tree grow_tree(const SampleSet& train, const TreeConfig& cfg);

// Routes x to a leaf; returns the majority class (ties to the lowest class
// index) and the leaf's count distribution normalized to sum 1. Rejects
// non-finite features and width mismatches.
std::pair<int, Eigen::VectorXd> predict_tree(const Tree& tree,
                                             const Eigen::Ref<const Eigen::VectorXf>& x);

}  // namespace lulc::cart
