#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lulc/forest.hpp"
#include "lulc/raster.hpp"
#include "lulc/rotation.hpp"

namespace lulc::pipeline {

// Either model family behind one save/load/predict surface.
using Classifier = std::variant<forest::ForestModel, rotation::EnsembleModel>;

// Identifier used in model files and experiment configs: "rf" for a bagged
// forest, "pca-rfe" / "srp-rfe" / "crp-rfe" for rotation ensembles by
// rotation kind, "rfe" for the identity-rotation ensemble.
std::string classifier_id(const Classifier& c);

const std::vector<std::string>& classifier_classes(const Classifier& c);
int classifier_width(const Classifier& c);

// Single-document JSON model files; the top-level "model" key selects the
// decoder. Thread counts are runtime knobs and never stored. Serialization
// is canonical (sorted keys, shortest round-trip numbers), so equal models
// produce byte-equal text; loading validates structure and every key.
std::string classifier_to_json(const Classifier& c);
Classifier classifier_from_json(const std::string& text);
void save_classifier(const Classifier& c, const std::string& path);
Classifier load_classifier(const std::string& path);

int predict(const Classifier& c, const Eigen::Ref<const Eigen::VectorXf>& x);
std::vector<int> predict_all(const Classifier& c, const SampleSet& samples, int threads = 1);

// Per-pixel prediction over a band stack whose width matches the model.
// Pixels with any nodata or non-finite band stay unlabeled (255); the
// output legend is the model's class list.
ClassMap classify_raster(const Classifier& c, const Raster& r, int threads = 1);

struct DatasetSpec {
  std::string name;
  std::string raster;    // band stack path
  std::string classmap;  // aligned labels path
};

struct ModelSpec {
  std::string name;       // row label in the result CSVs
  std::string kind;       // "rf" | "rfe" | "pca-rfe" | "srp-rfe" | "crp-rfe"
  int trees = 30;         // trees per forest
  int forests = 20;       // ensemble members; unused for "rf"
  int subset = 3;         // rotation subset size; pca/srp only
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<ModelSpec> models;
  std::vector<double> fractions;  // training fractions, each in (0,1)
  int repetitions = 25;
  std::uint64_t seed = 0;
  int threads = 1;
  // Ensemble member weights normally come from an internal 75/25 carve-out
  // of the training samples; this switches them to the evaluation split.
  bool weights_on_test = false;
  std::string out;            // results CSV path; empty = do not write
  std::string per_class_out;  // per-class CSV path; empty = do not write
};

// Strict parse of a JSON config document; unknown keys anywhere are errors.
// "fractions" is either an explicit array or {"from","to","step"}
// (inclusive arithmetic grid).
ExperimentConfig parse_experiment_config(const std::string& text);

struct ExperimentResult {
  // dataset,model,fraction,repetitions,mean_kappa,mean_kappa_se,mean_runtime_s
  std::string results_csv;
  // dataset,model,fraction,class,mean_user_kappa,mean_user_kappa_se,
  // mean_producer_kappa,mean_producer_kappa_se
  std::string per_class_csv;
};

// Full cross product datasets x models x fractions, `repetitions` seeded
// resplits each. Means skip repetitions where a statistic is undefined;
// cells that are never defined print "nan". Every column except the
// trailing runtime is byte-reproducible for a fixed seed regardless of
// thread count. Also writes the CSVs when the config names output paths.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace lulc::pipeline
