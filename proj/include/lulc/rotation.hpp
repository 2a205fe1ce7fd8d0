#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lulc/accuracy.hpp"
#include "lulc/forest.hpp"
#include "lulc/raster.hpp"
#include "lulc/rng.hpp"

namespace lulc::rotation {

enum class Kind { identity, pca, srp, crp };

struct RotationConfig {
  Kind kind = Kind::pca;
  // Feature-subset width q for the block-structured kinds (pca, srp). The
  // effective width is min(q, m-1) so there are always at least two subsets;
  // the last subset takes the remainder.
  int subset_size = 3;
};

// Square feature-space map applied as x -> R^T x. pca yields orthonormal
// block-diagonal rotations (up to the feature permutation), srp the same
// block layout with N(0,1) entries, crp a dense N(0,1) matrix.
struct RotationMatrix {
  Kind kind = Kind::identity;
  Eigen::MatrixXd r;
  std::vector<int> permutation;  // position -> original feature (pca/srp)
  std::vector<int> boundaries;   // subset start offsets into `permutation`
  // Per-subset diagnostics of the PCA blocks: eigenvalue sums must equal the
  // covariance traces (the invariant tests pin this).
  std::vector<double> block_eigenvalue_sums;
  std::vector<double> block_traces;
};

RotationMatrix make_identity_rotation(int m);

// Per subset: bootstrap 50-75% of the training rows (with replacement),
// z-normalize the subset columns over that draw (zero-sigma columns get
// sigma = 1), eigendecompose the sample covariance, and keep every
// component, eigenvalues sorted descending (ties by original order), each
// eigenvector's largest-magnitude entry made positive.
RotationMatrix make_pca_rotation(const SampleSet& train, const RotationConfig& cfg, Rng& rng);

// Same permutation/partition scheme with independent standard-normal blocks.
RotationMatrix make_srp_rotation(int m, const RotationConfig& cfg, Rng& rng);

// Dense m x m standard-normal matrix, no block structure.
RotationMatrix make_crp_rotation(int m, Rng& rng);

// Applies the rotation to every sample (features * R); labels, class names
// and sample order are untouched. Rotated feature names are r_0..r_{m-1}.
SampleSet rotate_samples(const SampleSet& s, const RotationMatrix& rot);

Eigen::VectorXf rotate_features(const Eigen::Ref<const Eigen::VectorXf>& x,
                                const RotationMatrix& rot);

struct EnsembleConfig {
  int members = 20;  // C
  RotationConfig rotation;
  forest::ForestConfig forest;  // seed ignored; member seeds are derived
  std::uint64_t seed = 0;
  // Member weights come from the validation set handed to train_ensemble.
  // This flag only matters to the callers that choose that set (CLI,
  // tune_forests): by default they hold out a slice of the training data;
  // in literal mode they pass the evaluation set itself.
  bool evaluate_weights_on_test = false;
  int threads = 1;
};

struct EnsembleMember {
  RotationMatrix rotation;
  forest::ForestModel forest;
  double weight = 0.0;
};

struct EnsembleModel {
  EnsembleConfig config;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  // Per-feature mean/sigma applied before any rotation; present for pca,
  // whose component directions are fitted on normalized features.
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> normalization;
  std::vector<EnsembleMember> members;

  int m() const { return int(feature_names.size()); }
  int k() const { return int(class_names.size()); }
};

// Seed stream for member `index`: role 0 draws the rotation, role 1 seeds
// the member's forest. Public for matched-seed equivalence checks.
inline std::uint64_t member_stream_seed(std::uint64_t ensemble_seed, int index, int role) {
  return derive_seed(ensemble_seed, 0x2207u + std::uint64_t(index), std::uint64_t(role));
}

// Trains C (rotation, forest) members on `train`; each member's weight is
// max(overall kappa on `validation`, 0), with a uniform fallback when every
// weight clamps to zero. Both sets must share the class list.
EnsembleModel train_ensemble(const SampleSet& train, const SampleSet& validation,
                             const EnsembleConfig& cfg);

// Weighted hard vote over members; ties go to the lowest class index.
// Returns (class, weight tally).
std::pair<int, Eigen::VectorXd> predict_ensemble(const EnsembleModel& model,
                                                 const Eigen::Ref<const Eigen::VectorXf>& x);

std::vector<int> predict_ensemble_all(const EnsembleModel& model, const SampleSet& samples,
                                      int threads = 1);

// Trains on `train` with member weights from an internal stratified 75/25
// carve-out (or from `evaluation` itself when cfg.evaluate_weights_on_test
// is set) and returns the model; helper shared by the CLI and tune_forests.
EnsembleModel train_ensemble_holdout(const SampleSet& train, const SampleSet& evaluation,
                                     const EnsembleConfig& cfg, std::uint64_t holdout_seed);

// Sweeps ensemble sizes exactly like forest::tune_trees sweeps tree counts.
accuracy::TuneResult tune_forests(const SampleSet& train, const SampleSet& test,
                                  const EnsembleConfig& base, const std::vector<int>& counts,
                                  int repetitions);

}  // namespace lulc::rotation
