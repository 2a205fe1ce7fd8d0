#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "lulc/accuracy.hpp"
#include "lulc/cart.hpp"
#include "lulc/raster.hpp"
#include "lulc/rng.hpp"

namespace lulc::forest {

struct ForestConfig {
  int n_trees = 30;
  cart::TreeConfig tree;   // per-tree seeds are derived, tree.seed is ignored
  std::uint64_t seed = 0;
  bool bootstrap = true;   // full-size draw with replacement; off is a test hook
  int threads = 1;         // runtime knob; never serialized, never changes results
};

struct ForestModel {
  ForestConfig config;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::vector<cart::Tree> trees;

  int m() const { return trees.empty() ? 0 : trees.front().m; }
  int k() const { return int(class_names.size()); }
};

// Seed stream for tree `index` of a forest: role 0 draws the bootstrap, role
// 1 drives the node-level feature sampling. Public so matched-seed
// equivalence checks can reproduce a single member.
inline std::uint64_t tree_stream_seed(std::uint64_t forest_seed, int index, int role) {
  return derive_seed(forest_seed, std::uint64_t(index), std::uint64_t(role));
}

// Bagged CART trees. Every tree owns derived seed streams, so results are
// identical for any thread count and any training order.
ForestModel train_forest(const SampleSet& train, const ForestConfig& cfg);

// Hard-vote aggregation: each tree votes its majority class, ties on the
// final tally go to the lowest class index. Returns (class, vote counts).
std::pair<int, Eigen::VectorXd> predict_forest(const ForestModel& model,
                                               const Eigen::Ref<const Eigen::VectorXf>& x);

// Convenience: hard predictions for every row of a sample set.
std::vector<int> predict_forest_all(const ForestModel& model, const SampleSet& samples,
                                    int threads = 1);

// Sweeps tree counts, training `repetitions` seeded forests per count on
// `train` and scoring kappa on `test`; rows carry mean kappa and mean kappa
// SE, and the winner comes from accuracy::select_optimum (Z against the
// first count, ties to the smaller count).
accuracy::TuneResult tune_trees(const SampleSet& train, const SampleSet& test,
                                const ForestConfig& base, const std::vector<int>& counts,
                                int repetitions);

}  // namespace lulc::forest
