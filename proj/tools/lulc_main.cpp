#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lulc/accuracy.hpp"
#include "lulc/bands.hpp"
#include "lulc/error.hpp"
#include "lulc/fusion.hpp"
#include "lulc/pipeline.hpp"
#include "lulc/raster.hpp"
#include "lulc/rng.hpp"
#include "lulc/rotation.hpp"
#include "lulc/text.hpp"
#include "lulc/texture.hpp"

namespace {

using nlohmann::json;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  lulc::require(bool(out), "io_error", "cannot open for writing: " + path);
  out << text;
  lulc::require(bool(out), "io_error", "write failed: " + path);
}

std::vector<lulc::texture::Direction> parse_directions(const std::string& text) {
  using lulc::texture::Direction;
  if (text == "all")
    return {Direction::deg0, Direction::deg45, Direction::deg90, Direction::deg135};
  std::vector<Direction> out;
  for (std::string_view token : lulc::split_csv_line(text)) {
    if (token == "0")
      out.push_back(Direction::deg0);
    else if (token == "45")
      out.push_back(Direction::deg45);
    else if (token == "90")
      out.push_back(Direction::deg90);
    else if (token == "135")
      out.push_back(Direction::deg135);
    else
      lulc::fail("bad_direction", "directions must be 'all' or a comma list of 0,45,90,135");
  }
  return out;
}

json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json optionals_to_json(const std::vector<std::optional<double>>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(optional_to_json(v));
  return out;
}

// Paired hard labels for `evaluate`: either two sample CSVs (row-aligned) or
// two class maps (pixel-aligned; only pixels labeled on both sides count).
struct LabeledPair {
  std::vector<int> predicted;
  std::vector<int> reference;
  std::vector<std::string> class_names;
};

LabeledPair load_label_pair(const std::string& pred_path, const std::string& ref_path) {
  const bool pred_csv = pred_path.ends_with(".csv");
  const bool ref_csv = ref_path.ends_with(".csv");
  lulc::require(pred_csv == ref_csv, "mixed_inputs",
                "--pred and --ref must both be sample CSVs or both be class maps");
  LabeledPair pair;
  if (pred_csv) {
    const lulc::SampleSet pred = lulc::read_samples_csv(pred_path);
    const lulc::SampleSet ref = lulc::read_samples_csv(ref_path);
    lulc::require(pred.n() == ref.n(), "length_mismatch",
                  "prediction and reference CSVs carry different sample counts");
    pair.predicted = pred.labels;
    pair.reference = ref.labels;
    pair.class_names = pred.k() >= ref.k() ? pred.class_names : ref.class_names;
    return pair;
  }
  const lulc::ClassMap pred = lulc::read_class_map(pred_path);
  const lulc::ClassMap ref = lulc::read_class_map(ref_path);
  lulc::require(pred.rows == ref.rows && pred.cols == ref.cols, "shape_mismatch",
                "prediction and reference class maps differ in shape");
  for (int r = 0; r < ref.rows; ++r)
    for (int c = 0; c < ref.cols; ++c) {
      const std::uint8_t p = pred.at(r, c);
      const std::uint8_t t = ref.at(r, c);
      if (p == lulc::kUnlabeled || t == lulc::kUnlabeled) continue;
      pair.predicted.push_back(p);
      pair.reference.push_back(t);
    }
  lulc::require(!pair.predicted.empty(), "no_overlap",
                "no pixel is labeled in both class maps");
  pair.class_names = pred.legend.size() >= ref.legend.size() ? pred.legend : ref.legend;
  return pair;
}

struct TrainOptions {
  std::string samples, test, out, model = "rf", criterion = "gini";
  int trees = 30, forests = 20, subset = 3, mtry = 0, min_leaf = 1, max_depth = 0;
  std::uint64_t seed = 0;
  bool weights_on_test = false;
  int threads = 1;
};

void run_train(const TrainOptions& opt) {
  const lulc::SampleSet train = lulc::read_samples_csv(opt.samples);
  lulc::cart::TreeConfig tree;
  tree.criterion = opt.criterion == "gini" ? lulc::cart::Criterion::gini
                                           : lulc::cart::Criterion::info_gain;
  tree.mtry = opt.mtry;
  tree.min_leaf = opt.min_leaf;
  tree.max_depth = opt.max_depth;

  lulc::pipeline::Classifier model;
  if (opt.model == "rf") {
    lulc::forest::ForestConfig cfg;
    cfg.n_trees = opt.trees;
    cfg.tree = tree;
    cfg.seed = opt.seed;
    cfg.threads = opt.threads;
    model = lulc::forest::train_forest(train, cfg);
  } else {
    lulc::rotation::EnsembleConfig cfg;
    cfg.members = opt.forests;
    cfg.rotation.kind = opt.model == "rfe"       ? lulc::rotation::Kind::identity
                        : opt.model == "pca-rfe" ? lulc::rotation::Kind::pca
                        : opt.model == "srp-rfe" ? lulc::rotation::Kind::srp
                                                 : lulc::rotation::Kind::crp;
    cfg.rotation.subset_size = opt.subset;
    cfg.forest.n_trees = opt.trees;
    cfg.forest.tree = tree;
    cfg.forest.threads = opt.threads;
    cfg.seed = opt.seed;
    cfg.evaluate_weights_on_test = opt.weights_on_test;
    cfg.threads = opt.threads;
    lulc::require(!opt.weights_on_test || !opt.test.empty(), "bad_config",
                  "--weights-on-test needs --test");
    const lulc::SampleSet evaluation =
        opt.test.empty() ? train : lulc::read_samples_csv(opt.test);
    model = lulc::rotation::train_ensemble_holdout(train, evaluation, cfg,
                                                   lulc::derive_seed(opt.seed, 0x75u));
  }
  lulc::pipeline::save_classifier(model, opt.out);
}

std::string tune_csv(const lulc::accuracy::TuneResult& result) {
  std::string out = "param,mean_kappa,mean_kappa_se,selected\n";
  for (const auto& row : result.rows)
    out += lulc::format_number(row.param) + "," + lulc::format_number(row.mean_kappa) + "," +
           lulc::format_number(row.mean_se) + "," +
           (row.param == result.selected ? "1" : "0") + "\n";
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raster land-cover classification toolkit"};
  app.require_subcommand(1);

  // texture
  std::string tex_in, tex_out, tex_band, tex_directions = "all";
  lulc::texture::GlcmConfig tex_cfg;
  int tex_threads = 1;
  auto* texture = app.add_subcommand("texture", "add a GLCM homogeneity band");
  texture->add_option("input", tex_in, "input raster")->required();
  texture->add_option("output", tex_out, "output raster")->required();
  texture->add_option("--band", tex_band, "band to quantize")->required();
  texture->add_option("--levels", tex_cfg.levels, "gray levels")->capture_default_str();
  texture->add_option("--window", tex_cfg.window, "window side (odd)")->capture_default_str();
  texture->add_option("--directions", tex_directions, "all or comma list of 0,45,90,135")->capture_default_str();
  texture->add_option("--symmetric", tex_cfg.symmetric, "count pairs in both orders")->capture_default_str();
  texture->add_option("--threads", tex_threads, "worker threads")->capture_default_str();
  texture->callback([&] {
    const lulc::Raster in = lulc::read_raster(tex_in);
    tex_cfg.directions = parse_directions(tex_directions);
    const lulc::Raster out =
        lulc::texture::texture_band(in, in.band_index(tex_band), tex_cfg, tex_threads);
    lulc::write_raster(out, tex_out);
  });

  // derive
  std::string der_in, der_out, der_op;
  std::vector<std::string> der_inputs;
  auto* derive = app.add_subcommand("derive", "compute derived spectral/SAR bands");
  derive->add_option("input", der_in, "input raster")->required();
  derive->add_option("output", der_out, "output raster")->required();
  derive->add_option("--op", der_op, "sar, rdvi, or nbr")
      ->required()
      ->check(CLI::IsMember({"sar", "rdvi", "nbr"}));
  derive->add_option("--inputs", der_inputs, "band names (sar: vv,vh; rdvi: nir,red; nbr: nir,swir)")
      ->required()
      ->delimiter(',');
  derive->callback([&] {
    const lulc::Raster in = lulc::read_raster(der_in);
    lulc::require(der_inputs.size() == 2, "bad_config", "--inputs needs exactly two band names");
    const lulc::Raster a = lulc::take_band(in, in.band_index(der_inputs[0]));
    const lulc::Raster b = lulc::take_band(in, in.band_index(der_inputs[1]));
    lulc::Raster out = der_op == "sar"    ? lulc::bands::sar_derived(a, b)
                       : der_op == "rdvi" ? lulc::bands::rdvi(a, b)
                                          : lulc::bands::nbr(a, b);
    lulc::write_raster(out, der_out);
  });

  // fuse
  std::string fuse_ms, fuse_aux, fuse_out, fuse_kernel = "fast";
  double fuse_w = 0.6;
  auto* fuse = app.add_subcommand("fuse", "blend an auxiliary band into a band stack");
  fuse->add_option("--ms", fuse_ms, "band stack to sharpen")->required();
  fuse->add_option("--aux", fuse_aux, "single-band auxiliary raster")->required();
  fuse->add_option("--out", fuse_out, "output raster")->required();
  fuse->add_option("--w", fuse_w, "auxiliary weight in [0,1)")->capture_default_str();
  fuse->add_option("--kernel", fuse_kernel, "fast or reference")->capture_default_str()
      ->check(CLI::IsMember({"fast", "reference"}));
  fuse->callback([&] {
    const lulc::Raster ms = lulc::read_raster(fuse_ms);
    const lulc::Raster aux = lulc::read_raster(fuse_aux);
    const lulc::fusion::FusionModel model = lulc::fusion::fit_fusion(ms, aux, fuse_w);
    const lulc::Raster out = fuse_kernel == "fast"
                                 ? lulc::fusion::fuse_fast(model, ms, aux)
                                 : lulc::fusion::fuse_reference(model, ms, aux);
    lulc::write_raster(out, fuse_out);
  });

  // bench-fusion
  std::vector<int> bench_sizes{100, 200, 400};
  std::vector<int> bench_bands{2, 6, 11};
  int bench_reps = 5;
  double bench_w = 0.6;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench-fusion", "time the fusion kernels");
  bench->add_option("--sizes", bench_sizes, "square image sides")->capture_default_str()->delimiter(',');
  bench->add_option("--bands", bench_bands, "band counts")->capture_default_str()->delimiter(',');
  bench->add_option("--reps", bench_reps, "timed repetitions per cell")->capture_default_str();
  bench->add_option("--w", bench_w, "auxiliary weight")->capture_default_str();
  bench->add_option("--out", bench_out, "output CSV (default stdout)");
  bench->callback([&] {
    const auto rows = lulc::fusion::bench_fusion(bench_sizes, bench_bands, bench_w, bench_reps);
    std::string csv = "size,bands,w,repetitions,t_reference_s,t_fast_s,increment_factor\n";
    for (const auto& row : rows)
      csv += lulc::format_number(row.size) + "," + lulc::format_number(row.bands) + "," +
             lulc::format_number(row.w) + "," + lulc::format_number(row.repetitions) + "," +
             lulc::format_number(row.t_reference_s) + "," + lulc::format_number(row.t_fast_s) +
             "," + lulc::format_number(row.increment_factor) + "\n";
    emit(csv, bench_out);
  });

  // train
  TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "train a classifier on a sample CSV");
  train->add_option("--samples", train_opt.samples, "training sample CSV")->required();
  train->add_option("--test", train_opt.test, "evaluation sample CSV (member weighting)");
  train->add_option("--out", train_opt.out, "model JSON path")->required();
  train->add_option("--model", train_opt.model, "classifier kind")->capture_default_str()
      ->check(CLI::IsMember({"rf", "rfe", "pca-rfe", "srp-rfe", "crp-rfe"}));
  train->add_option("--trees", train_opt.trees, "trees per forest")->capture_default_str();
  train->add_option("--forests", train_opt.forests, "ensemble members")->capture_default_str();
  train->add_option("--subset", train_opt.subset, "rotation subset size")->capture_default_str();
  train->add_option("--criterion", train_opt.criterion, "split criterion")->capture_default_str()
      ->check(CLI::IsMember({"gini", "info_gain"}));
  train->add_option("--mtry", train_opt.mtry, "features tried per node (0 = sqrt)")->capture_default_str();
  train->add_option("--min-leaf", train_opt.min_leaf, "minimum samples per leaf")->capture_default_str();
  train->add_option("--max-depth", train_opt.max_depth, "depth cap (0 = unlimited)")->capture_default_str();
  train->add_option("--seed", train_opt.seed, "RNG seed")->capture_default_str();
  train->add_flag("--weights-on-test", train_opt.weights_on_test,
                  "weight ensemble members on --test instead of an internal holdout");
  train->add_option("--threads", train_opt.threads, "worker threads")->capture_default_str();
  train->callback([&] { run_train(train_opt); });

  // classify
  std::string cls_model, cls_raster, cls_out;
  int cls_threads = 1;
  auto* classify = app.add_subcommand("classify", "label every pixel of a band stack");
  classify->add_option("--model", cls_model, "model JSON path")->required();
  classify->add_option("--raster", cls_raster, "band stack")->required();
  classify->add_option("--out", cls_out, "output class map")->required();
  classify->add_option("--threads", cls_threads, "worker threads")->capture_default_str();
  classify->callback([&] {
    const lulc::pipeline::Classifier model = lulc::pipeline::load_classifier(cls_model);
    const lulc::Raster raster = lulc::read_raster(cls_raster);
    lulc::write_class_map(lulc::pipeline::classify_raster(model, raster, cls_threads), cls_out);
  });

  // evaluate
  std::string eval_pred, eval_ref, eval_out;
  bool eval_half_factor = false;
  auto* evaluate = app.add_subcommand("evaluate", "accuracy report for predictions");
  evaluate->add_option("--pred", eval_pred, "predicted class map or sample CSV")->required();
  evaluate->add_option("--ref", eval_ref, "reference class map or sample CSV")->required();
  evaluate->add_option("--out", eval_out, "report JSON (default stdout)");
  evaluate->add_flag("--half-factor-se", eval_half_factor,
                     "use the constant 1/2 leading factor in conditional kappa SEs");
  evaluate->callback([&] {
    const LabeledPair pair = load_label_pair(eval_pred, eval_ref);
    const auto cm = lulc::accuracy::confusion(pair.predicted, pair.reference,
                                              int(pair.class_names.size()), pair.class_names);
    const auto naive = lulc::accuracy::naive_stats(cm);
    const auto kappa = lulc::accuracy::kappa_stats(cm, eval_half_factor);
    json counts = json::array();
    for (int i = 0; i < cm.k(); ++i) {
      json row = json::array();
      for (int j = 0; j < cm.k(); ++j) row.push_back(cm.counts(i, j));
      counts.push_back(std::move(row));
    }
    const json report{
        {"classes", cm.class_names},
        {"confusion", std::move(counts)},  // row = predicted, column = reference
        {"samples", cm.total()},
        {"overall_accuracy", naive.overall_accuracy},
        {"user_accuracy", optionals_to_json(naive.user_accuracy)},
        {"user_accuracy_se", optionals_to_json(naive.user_accuracy_se)},
        {"producer_accuracy", optionals_to_json(naive.producer_accuracy)},
        {"producer_accuracy_se", optionals_to_json(naive.producer_accuracy_se)},
        {"theta", json::array({kappa.theta1, kappa.theta2, kappa.theta3, kappa.theta4})},
        {"kappa", optional_to_json(kappa.kappa)},
        {"kappa_se", optional_to_json(kappa.kappa_se)},
        {"user_kappa", optionals_to_json(kappa.user_kappa)},
        {"user_kappa_se", optionals_to_json(kappa.user_kappa_se)},
        {"producer_kappa", optionals_to_json(kappa.producer_kappa)},
        {"producer_kappa_se", optionals_to_json(kappa.producer_kappa_se)},
        {"conditional_se_factor", eval_half_factor ? "1/2" : "1/a"},
    };
    emit(report.dump(2) + "\n", eval_out);
  });

  // tune-trees
  std::string tt_train, tt_test, tt_out;
  std::vector<int> tt_counts{1, 5, 10, 15, 20, 25, 30};
  int tt_reps = 25, tt_threads = 1;
  std::uint64_t tt_seed = 0;
  auto* tune_trees = app.add_subcommand("tune-trees", "sweep forest sizes by test kappa");
  tune_trees->add_option("--train", tt_train, "training sample CSV")->required();
  tune_trees->add_option("--test", tt_test, "test sample CSV")->required();
  tune_trees->add_option("--counts", tt_counts, "tree counts to sweep")->capture_default_str()->delimiter(',');
  tune_trees->add_option("--reps", tt_reps, "repetitions per count")->capture_default_str();
  tune_trees->add_option("--seed", tt_seed, "RNG seed")->capture_default_str();
  tune_trees->add_option("--out", tt_out, "output CSV (default stdout)");
  tune_trees->add_option("--threads", tt_threads, "worker threads")->capture_default_str();
  tune_trees->callback([&] {
    const lulc::SampleSet train_set = lulc::read_samples_csv(tt_train);
    const lulc::SampleSet test_set = lulc::read_samples_csv(tt_test);
    lulc::forest::ForestConfig base;
    base.seed = tt_seed;
    base.threads = tt_threads;
    emit(tune_csv(lulc::forest::tune_trees(train_set, test_set, base, tt_counts, tt_reps)),
         tt_out);
  });

  // tune-forests
  std::string tf_train, tf_test, tf_out, tf_model = "pca-rfe";
  std::vector<int> tf_counts{5, 10, 15, 20};
  int tf_reps = 25, tf_trees = 30, tf_subset = 3, tf_threads = 1;
  std::uint64_t tf_seed = 0;
  bool tf_weights_on_test = false;
  auto* tune_forests = app.add_subcommand("tune-forests", "sweep ensemble sizes by test kappa");
  tune_forests->add_option("--train", tf_train, "training sample CSV")->required();
  tune_forests->add_option("--test", tf_test, "test sample CSV")->required();
  tune_forests->add_option("--model", tf_model, "ensemble kind")->capture_default_str()
      ->check(CLI::IsMember({"rfe", "pca-rfe", "srp-rfe", "crp-rfe"}));
  tune_forests->add_option("--counts", tf_counts, "member counts to sweep")->capture_default_str()->delimiter(',');
  tune_forests->add_option("--trees", tf_trees, "trees per member")->capture_default_str();
  tune_forests->add_option("--subset", tf_subset, "rotation subset size")->capture_default_str();
  tune_forests->add_option("--reps", tf_reps, "repetitions per count")->capture_default_str();
  tune_forests->add_option("--seed", tf_seed, "RNG seed")->capture_default_str();
  tune_forests->add_flag("--weights-on-test", tf_weights_on_test,
                         "weight members on --test instead of an internal holdout");
  tune_forests->add_option("--out", tf_out, "output CSV (default stdout)");
  tune_forests->add_option("--threads", tf_threads, "worker threads")->capture_default_str();
  tune_forests->callback([&] {
    const lulc::SampleSet train_set = lulc::read_samples_csv(tf_train);
    const lulc::SampleSet test_set = lulc::read_samples_csv(tf_test);
    lulc::rotation::EnsembleConfig base;
    base.rotation.kind = tf_model == "rfe"       ? lulc::rotation::Kind::identity
                         : tf_model == "pca-rfe" ? lulc::rotation::Kind::pca
                         : tf_model == "srp-rfe" ? lulc::rotation::Kind::srp
                                                 : lulc::rotation::Kind::crp;
    base.rotation.subset_size = tf_subset;
    base.forest.n_trees = tf_trees;
    base.forest.threads = tf_threads;
    base.seed = tf_seed;
    base.evaluate_weights_on_test = tf_weights_on_test;
    base.threads = tf_threads;
    emit(tune_csv(lulc::rotation::tune_forests(train_set, test_set, base, tf_counts, tf_reps)),
         tf_out);
  });

  // run-experiment
  std::string exp_config;
  int exp_threads = 0;
  auto* experiment = app.add_subcommand("run-experiment", "datasets x models x fractions sweep");
  experiment->add_option("--config", exp_config, "experiment config JSON")->required();
  experiment->add_option("--threads", exp_threads, "override the config thread count");
  experiment->callback([&] {
    std::ifstream in(exp_config);
    lulc::require(bool(in), "missing_file", "config not found: " + exp_config);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    lulc::pipeline::ExperimentConfig cfg = lulc::pipeline::parse_experiment_config(text);
    if (exp_threads > 0) cfg.threads = exp_threads;
    const auto result = lulc::pipeline::run_experiment(cfg);
    if (cfg.out.empty()) std::cout << result.results_csv;
  });

  // stack
  std::vector<std::string> stack_inputs;
  std::string stack_out;
  auto* stack = app.add_subcommand("stack", "concatenate raster bands");
  stack->add_option("inputs", stack_inputs, "input rasters")->required()->expected(-1);
  stack->add_option("--out", stack_out, "output raster")->required();
  stack->callback([&] {
    std::vector<lulc::Raster> parts;
    parts.reserve(stack_inputs.size());
    for (const auto& path : stack_inputs) parts.push_back(lulc::read_raster(path));
    std::vector<const lulc::Raster*> refs;
    for (const auto& part : parts) refs.push_back(&part);
    lulc::write_raster(lulc::stack_bands(refs), stack_out);
  });

  // extract
  std::string ext_raster, ext_classmap, ext_out;
  auto* extract = app.add_subcommand("extract", "sample CSV from labeled pixels");
  extract->add_option("--raster", ext_raster, "band stack")->required();
  extract->add_option("--classmap", ext_classmap, "aligned class map")->required();
  extract->add_option("--out", ext_out, "output sample CSV")->required();
  extract->callback([&] {
    const lulc::Raster raster = lulc::read_raster(ext_raster);
    const lulc::ClassMap cm = lulc::read_class_map(ext_classmap);
    lulc::write_samples_csv(lulc::extract_samples(raster, cm), ext_out);
  });

  // split
  std::string split_samples, split_train_out, split_test_out;
  double split_fraction = 0.5;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "stratified train/test split of a sample CSV");
  split->add_option("--samples", split_samples, "input sample CSV")->required();
  split->add_option("--fraction", split_fraction, "training fraction")->capture_default_str();
  split->add_option("--seed", split_seed, "RNG seed")->capture_default_str();
  split->add_option("--train-out", split_train_out, "training CSV")->required();
  split->add_option("--test-out", split_test_out, "test CSV")->required();
  split->callback([&] {
    const lulc::SampleSet samples = lulc::read_samples_csv(split_samples);
    const auto [train_set, test_set] = lulc::stratified_split(samples, split_fraction, split_seed);
    lulc::write_samples_csv(train_set, split_train_out);
    lulc::write_samples_csv(test_set, split_test_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const lulc::Error& e) {
    std::cerr << "error[" << e.category() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
