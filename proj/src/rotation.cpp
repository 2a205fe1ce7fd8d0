#include "lulc/rotation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "lulc/error.hpp"
#include "lulc/parallel.hpp"

namespace lulc::rotation {

namespace {

std::vector<std::string> rotated_names(int m) {
  std::vector<std::string> names;
  for (int j = 0; j < m; ++j) names.push_back("r_" + std::to_string(j));
  return names;
}

// Shared permutation/partition layout of the block kinds.
void block_layout(int m, int subset_size, Rng& rng, std::vector<int>& permutation,
                  std::vector<int>& boundaries) {
  require(m >= 2, "bad_shape", "block rotations need at least two features");
  require(subset_size >= 1, "bad_config", "subset size must be positive");
  const int q = std::min(subset_size, m - 1);  // guarantees >= 2 subsets

  permutation.resize(std::size_t(m));
  std::iota(permutation.begin(), permutation.end(), 0);
  partial_shuffle(permutation, std::size_t(m), rng);

  boundaries.clear();
  for (int start = 0; start < m; start += q) boundaries.push_back(start);
}

int subset_width(const std::vector<int>& boundaries, std::size_t s, int m) {
  const int start = boundaries[s];
  const int end = s + 1 < boundaries.size() ? boundaries[s + 1] : m;
  return end - start;
}

}  // namespace

RotationMatrix make_identity_rotation(int m) {
  require(m >= 1, "bad_shape", "rotation needs at least one feature");
  RotationMatrix rot;
  rot.kind = Kind::identity;
  rot.r = Eigen::MatrixXd::Identity(m, m);
  return rot;
}

RotationMatrix make_pca_rotation(const SampleSet& train, const RotationConfig& cfg, Rng& rng) {
  const int m = train.m();
  const int n = train.n();
  require(n >= 2, "empty_samples", "PCA rotation needs at least two samples");

  RotationMatrix rot;
  rot.kind = Kind::pca;
  block_layout(m, cfg.subset_size, rng, rot.permutation, rot.boundaries);
  rot.r = Eigen::MatrixXd::Zero(m, m);

  for (std::size_t s = 0; s < rot.boundaries.size(); ++s) {
    const int start = rot.boundaries[s];
    const int width = subset_width(rot.boundaries, s, m);

    // Bootstrap 50-75% of the rows, with replacement.
    const double fraction = uniform_range(rng, 0.50, 0.75);
    const int draws = std::max(2, int(std::llround(fraction * double(n))));
    Eigen::MatrixXd block(draws, width);
    for (int i = 0; i < draws; ++i) {
      const int row = int(bounded(rng, std::uint64_t(n)));
      for (int j = 0; j < width; ++j)
        block(i, j) = double(train.features(row, rot.permutation[std::size_t(start + j)]));
    }

    // z-normalize over the bootstrap; constant columns pass through.
    const Eigen::RowVectorXd mean = block.colwise().mean();
    block.rowwise() -= mean;
    for (int j = 0; j < width; ++j) {
      const double var = block.col(j).squaredNorm() / double(draws - 1);
      const double sigma = var > 0.0 ? std::sqrt(var) : 1.0;
      block.col(j) /= sigma;
    }

    const Eigen::MatrixXd cov = (block.transpose() * block) / double(draws - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    require(eig.info() == Eigen::Success, "numerical_instability",
            "PCA eigendecomposition failed");

    // All components kept, eigenvalues descending; the solver returns them
    // ascending, and a stable sort keeps the solver's order on ties.
    std::vector<int> order(static_cast<std::size_t>(width));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return eig.eigenvalues()(a) > eig.eigenvalues()(b);
    });

    double eigen_sum = 0.0;
    for (int j = 0; j < width; ++j) {
      Eigen::VectorXd v = eig.eigenvectors().col(order[std::size_t(j)]);
      int peak = 0;
      for (int i = 1; i < width; ++i)
        if (std::abs(v(i)) > std::abs(v(peak))) peak = i;
      if (v(peak) < 0.0) v = -v;
      for (int i = 0; i < width; ++i)
        rot.r(rot.permutation[std::size_t(start + i)], rot.permutation[std::size_t(start + j)]) =
            v(i);
      eigen_sum += eig.eigenvalues()(order[std::size_t(j)]);
    }
    rot.block_eigenvalue_sums.push_back(eigen_sum);
    rot.block_traces.push_back(cov.trace());
  }
  return rot;
}

RotationMatrix make_srp_rotation(int m, const RotationConfig& cfg, Rng& rng) {
  RotationMatrix rot;
  rot.kind = Kind::srp;
  block_layout(m, cfg.subset_size, rng, rot.permutation, rot.boundaries);
  rot.r = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t s = 0; s < rot.boundaries.size(); ++s) {
    const int start = rot.boundaries[s];
    const int width = subset_width(rot.boundaries, s, m);
    for (int i = 0; i < width; ++i)
      for (int j = 0; j < width; ++j)
        rot.r(rot.permutation[std::size_t(start + i)], rot.permutation[std::size_t(start + j)]) =
            normal(rng);
  }
  return rot;
}

RotationMatrix make_crp_rotation(int m, Rng& rng) {
  require(m >= 1, "bad_shape", "rotation needs at least one feature");
  RotationMatrix rot;
  rot.kind = Kind::crp;
  rot.r.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) rot.r(i, j) = normal(rng);
  return rot;
}

SampleSet rotate_samples(const SampleSet& s, const RotationMatrix& rot) {
  require(rot.r.rows() == s.m(), "shape_mismatch",
          "rotation size does not match the feature count");
  // Row convention: each sample row x^T maps to (R^T x)^T = x^T R.
  Eigen::MatrixXf rotated = (s.features.cast<double>() * rot.r).cast<float>();
  return SampleSet::make(std::move(rotated), s.labels, rotated_names(s.m()), s.class_names,
                         /*allow_empty_classes=*/true);
}

Eigen::VectorXf rotate_features(const Eigen::Ref<const Eigen::VectorXf>& x,
                                const RotationMatrix& rot) {
  require(rot.r.rows() == x.size(), "shape_mismatch",
          "rotation size does not match the feature count");
  return (rot.r.transpose() * x.cast<double>()).cast<float>();
}

namespace {

RotationMatrix make_rotation(const SampleSet& train, const RotationConfig& cfg, Rng& rng) {
  switch (cfg.kind) {
    case Kind::identity: return make_identity_rotation(train.m());
    case Kind::pca: return make_pca_rotation(train, cfg, rng);
    case Kind::srp: return make_srp_rotation(train.m(), cfg, rng);
    case Kind::crp: return make_crp_rotation(train.m(), rng);
  }
  fail("bad_config", "unknown rotation kind");
}

SampleSet apply_normalization(const SampleSet& s, const Eigen::VectorXd& mean,
                              const Eigen::VectorXd& sigma) {
  Eigen::MatrixXd f = s.features.cast<double>();
  f.rowwise() -= mean.transpose();
  f.array().rowwise() /= sigma.transpose().array();
  return SampleSet::make(f.cast<float>(), s.labels, s.feature_names, s.class_names,
                         /*allow_empty_classes=*/true);
}

}  // namespace

EnsembleModel train_ensemble(const SampleSet& train, const SampleSet& validation,
                             const EnsembleConfig& cfg) {
  require(cfg.members >= 1, "bad_config", "an ensemble needs at least one member");
  require(train.class_names == validation.class_names, "bad_classes",
          "train and validation class lists differ");
  require(train.m() == validation.m(), "length_mismatch",
          "train and validation feature counts differ");

  EnsembleModel model;
  model.config = cfg;
  model.feature_names = train.feature_names;
  model.class_names = train.class_names;

  // PCA components are fitted on z-normalized features, so the model carries
  // the normalization and applies it to every incoming sample.
  const SampleSet* fit_train = &train;
  const SampleSet* fit_val = &validation;
  SampleSet normalized_train, normalized_val;
  if (cfg.rotation.kind == Kind::pca) {
    const Eigen::MatrixXd f = train.features.cast<double>();
    Eigen::VectorXd mean = f.colwise().mean();
    Eigen::VectorXd sigma(train.m());
    for (int j = 0; j < train.m(); ++j) {
      const double var =
          (f.col(j).array() - mean(j)).square().sum() / double(std::max(train.n() - 1, 1));
      sigma(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    model.normalization = {mean, sigma};
    normalized_train = apply_normalization(train, mean, sigma);
    normalized_val = apply_normalization(validation, mean, sigma);
    fit_train = &normalized_train;
    fit_val = &normalized_val;
  }

  model.members.resize(std::size_t(cfg.members));
  bool any_weight = false;
  for (int i = 0; i < cfg.members; ++i) {
    EnsembleMember& member = model.members[std::size_t(i)];
    Rng rng(member_stream_seed(cfg.seed, i, 0));
    member.rotation = make_rotation(*fit_train, cfg.rotation, rng);

    forest::ForestConfig fc = cfg.forest;
    fc.seed = member_stream_seed(cfg.seed, i, 1);
    fc.threads = cfg.threads;
    member.forest = forest::train_forest(rotate_samples(*fit_train, member.rotation), fc);

    const std::vector<int> pred = forest::predict_forest_all(
        member.forest, rotate_samples(*fit_val, member.rotation), cfg.threads);
    const auto stats = accuracy::kappa_stats(
        accuracy::confusion(pred, fit_val->labels, fit_val->k(), fit_val->class_names));
    // Negative agreement contributes nothing; undefined kappa likewise.
    member.weight = stats.kappa ? std::max(*stats.kappa, 0.0) : 0.0;
    if (member.weight > 0.0) any_weight = true;
  }
  if (!any_weight)
    for (auto& member : model.members) member.weight = 1.0;
  return model;
}

std::pair<int, Eigen::VectorXd> predict_ensemble(const EnsembleModel& model,
                                                 const Eigen::Ref<const Eigen::VectorXf>& x) {
  require(!model.members.empty(), "empty_model", "ensemble has no members");
  require(int(x.size()) == model.m(), "length_mismatch",
          "feature vector does not match the ensemble");
  require(x.allFinite(), "nonfinite_feature", "feature vector contains NaN/inf");

  Eigen::VectorXf z = x;
  if (model.normalization) {
    const auto& [mean, sigma] = *model.normalization;
    z = ((x.cast<double>() - mean).array() / sigma.array()).cast<float>();
  }

  Eigen::VectorXd tally = Eigen::VectorXd::Zero(model.k());
  for (const auto& member : model.members) {
    const int vote =
        forest::predict_forest(member.forest, rotate_features(z, member.rotation)).first;
    tally(vote) += member.weight;
  }
  int best = 0;
  for (int c = 1; c < model.k(); ++c)
    if (tally(c) > tally(best)) best = c;  // ties keep the lower index
  return {best, std::move(tally)};
}

std::vector<int> predict_ensemble_all(const EnsembleModel& model, const SampleSet& samples,
                                      int threads) {
  require(samples.m() == model.m(), "length_mismatch",
          "sample feature count does not match the ensemble");
  std::vector<int> out(std::size_t(samples.n()));
  parallel_for(std::size_t(samples.n()), threads, [&](std::size_t i) {
    out[i] = predict_ensemble(model, samples.features.row(Eigen::Index(i)).transpose()).first;
  });
  return out;
}

EnsembleModel train_ensemble_holdout(const SampleSet& train, const SampleSet& evaluation,
                                     const EnsembleConfig& cfg, std::uint64_t holdout_seed) {
  if (cfg.evaluate_weights_on_test) return train_ensemble(train, evaluation, cfg);
  const auto [fit, holdout] = stratified_split(train, 0.75, holdout_seed);
  return train_ensemble(fit, holdout, cfg);
}

accuracy::TuneResult tune_forests(const SampleSet& train, const SampleSet& test,
                                  const EnsembleConfig& base, const std::vector<int>& counts,
                                  int repetitions) {
  require(!counts.empty(), "empty_input", "tune_forests needs at least one ensemble size");
  require(repetitions >= 1, "bad_config", "tune_forests needs at least one repetition");
  for (int c : counts) require(c >= 1, "bad_config", "ensemble sizes must be positive");
  require(train.class_names == test.class_names, "bad_classes",
          "train and test class lists differ");

  accuracy::TuneResult result;
  for (std::size_t ci = 0; ci < counts.size(); ++ci) {
    double kappa_sum = 0.0, se_sum = 0.0;
    for (int rep = 0; rep < repetitions; ++rep) {
      EnsembleConfig cfg = base;
      cfg.members = counts[ci];
      cfg.seed = derive_seed(base.seed, 0xE0 + ci, std::uint64_t(rep));
      const EnsembleModel model =
          train_ensemble_holdout(train, test, cfg, derive_seed(cfg.seed, 0x75u));
      const std::vector<int> pred = predict_ensemble_all(model, test, base.threads);
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

}  // namespace lulc::rotation
