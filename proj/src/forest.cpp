#include "lulc/forest.hpp"

#include <algorithm>

#include "lulc/error.hpp"
#include "lulc/parallel.hpp"

namespace lulc::forest {

namespace {

SampleSet bootstrap_draw(const SampleSet& train, Rng& rng) {
  const int n = train.n();
  Eigen::MatrixXf features(n, train.m());
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int pick = int(bounded(rng, std::uint64_t(n)));
    features.row(i) = train.features.row(pick);
    labels[std::size_t(i)] = train.labels[pick];
  }
  // A draw can miss classes entirely; the class list still spans all of them.
  return SampleSet::make(std::move(features), std::move(labels), train.feature_names,
                         train.class_names, /*allow_empty_classes=*/true);
}

}  // namespace

ForestModel train_forest(const SampleSet& train, const ForestConfig& cfg) {
  require(cfg.n_trees >= 1, "bad_config", "a forest needs at least one tree");
  require(train.n() >= 1, "empty_samples", "cannot train a forest on zero samples");

  ForestModel model;
  model.config = cfg;
  model.feature_names = train.feature_names;
  model.class_names = train.class_names;
  model.trees.resize(std::size_t(cfg.n_trees));

  parallel_for(std::size_t(cfg.n_trees), cfg.threads, [&](std::size_t t) {
    cart::TreeConfig tree_cfg = cfg.tree;
    tree_cfg.seed = tree_stream_seed(cfg.seed, int(t), 1);
    if (cfg.bootstrap) {
      Rng rng(tree_stream_seed(cfg.seed, int(t), 0));
      model.trees[t] = cart::grow_tree(bootstrap_draw(train, rng), tree_cfg);
    } else {
      model.trees[t] = cart::grow_tree(train, tree_cfg);
    }
  });
  return model;
}

std::pair<int, Eigen::VectorXd> predict_forest(const ForestModel& model,
                                               const Eigen::Ref<const Eigen::VectorXf>& x) {
  require(!model.trees.empty(), "empty_model", "forest has no trees");
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(model.k());
  for (const auto& tree : model.trees) votes(cart::predict_tree(tree, x).first) += 1.0;
  int best = 0;
  for (int c = 1; c < model.k(); ++c)
    if (votes(c) > votes(best)) best = c;  // ties keep the lower index
  return {best, std::move(votes)};
}

std::vector<int> predict_forest_all(const ForestModel& model, const SampleSet& samples,
                                    int threads) {
  require(samples.m() == model.m(), "length_mismatch",
          "sample feature count does not match the forest");
  std::vector<int> out(std::size_t(samples.n()));
  parallel_for(std::size_t(samples.n()), threads, [&](std::size_t i) {
    out[i] = predict_forest(model, samples.features.row(Eigen::Index(i)).transpose()).first;
  });
  return out;
}

accuracy::TuneResult tune_trees(const SampleSet& train, const SampleSet& test,
                                const ForestConfig& base, const std::vector<int>& counts,
                                int repetitions) {
  require(!counts.empty(), "empty_input", "tune_trees needs at least one tree count");
  require(repetitions >= 1, "bad_config", "tune_trees needs at least one repetition");
  for (int c : counts) require(c >= 1, "bad_config", "tree counts must be positive");
  require(train.k() == test.k(), "bad_classes", "train and test class lists differ");

  accuracy::TuneResult result;
  for (std::size_t ci = 0; ci < counts.size(); ++ci) {
    double kappa_sum = 0.0, se_sum = 0.0;
    for (int rep = 0; rep < repetitions; ++rep) {
      ForestConfig cfg = base;
      cfg.n_trees = counts[ci];
      cfg.seed = derive_seed(base.seed, ci, std::uint64_t(rep));
      const ForestModel model = train_forest(train, cfg);
      const std::vector<int> pred = predict_forest_all(model, test, base.threads);
      const auto stats =
          accuracy::kappa_stats(accuracy::confusion(pred, test.labels, test.k(), test.class_names));
      require(stats.kappa.has_value(), "degenerate_kappa",
              "kappa is undefined on this test split; tune needs class diversity");
      kappa_sum += *stats.kappa;
      se_sum += *stats.kappa_se;
    }
    result.rows.push_back({counts[ci], kappa_sum / repetitions, se_sum / repetitions});
  }
  result.selected = accuracy::select_optimum(result.rows);
  return result;
}

}  // namespace lulc::forest
