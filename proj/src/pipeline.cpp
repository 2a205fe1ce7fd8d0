#include "lulc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "lulc/accuracy.hpp"
#include "lulc/error.hpp"
#include "lulc/parallel.hpp"
#include "lulc/text.hpp"

namespace lulc::pipeline {

using nlohmann::json;

namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(bool(out), "io_error", "cannot open for writing: " + path);
  out << text;
  require(bool(out), "io_error", "write failed: " + path);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what,
                const char* category = "bad_model") {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    require(known, category, std::string(what) + ": unknown key '" + it.key() + "'");
  }
}

void need_keys(const json& j, std::initializer_list<const char*> needed, const char* what,
               const char* category = "bad_model") {
  for (const char* k : needed)
    require(j.contains(k), category, std::string(what) + " missing '" + k + "'");
}

const char* criterion_name(cart::Criterion c) {
  return c == cart::Criterion::gini ? "gini" : "info_gain";
}

cart::Criterion criterion_from_name(const std::string& name) {
  if (name == "gini") return cart::Criterion::gini;
  if (name == "info_gain") return cart::Criterion::info_gain;
  fail("bad_model", "unknown split criterion: " + name);
}

const char* rotation_name(rotation::Kind k) {
  switch (k) {
    case rotation::Kind::identity: return "identity";
    case rotation::Kind::pca: return "pca";
    case rotation::Kind::srp: return "srp";
    case rotation::Kind::crp: return "crp";
  }
  fail("bad_model", "unknown rotation kind");
}

rotation::Kind rotation_from_name(const std::string& name) {
  if (name == "identity") return rotation::Kind::identity;
  if (name == "pca") return rotation::Kind::pca;
  if (name == "srp") return rotation::Kind::srp;
  if (name == "crp") return rotation::Kind::crp;
  fail("bad_model", "unknown rotation kind: " + name);
}

json tree_to_json(const cart::Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    if (n.feature < 0)
      nodes.push_back(json{{"counts", n.counts}});
    else
      nodes.push_back(json{{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
  }
  return json{{"m", t.m}, {"k", t.k}, {"nodes", std::move(nodes)}};
}

cart::Tree tree_from_json(const json& j) {
  check_keys(j, {"m", "k", "nodes"}, "tree");
  need_keys(j, {"m", "k", "nodes"}, "tree");
  cart::Tree t;
  t.m = j["m"].get<int>();
  t.k = j["k"].get<int>();
  require(t.m >= 1 && t.k >= 1, "bad_model", "tree needs positive feature and class counts");
  const json& nodes = j["nodes"];
  require(nodes.is_array() && !nodes.empty(), "bad_model", "tree needs at least one node");
  const int size = int(nodes.size());
  for (int i = 0; i < size; ++i) {
    const json& nj = nodes[std::size_t(i)];
    cart::TreeNode node;
    if (nj.contains("counts")) {
      check_keys(nj, {"counts"}, "leaf node");
      node.counts = nj["counts"].get<std::vector<std::int64_t>>();
      require(int(node.counts.size()) == t.k, "bad_model", "leaf counts length must equal k");
      std::int64_t total = 0;
      for (std::int64_t c : node.counts) {
        require(c >= 0, "bad_model", "leaf counts must be non-negative");
        total += c;
      }
      require(total > 0, "bad_model", "leaf counts must not be all zero");
    } else {
      check_keys(nj, {"f", "t", "l", "r"}, "internal node");
      need_keys(nj, {"f", "t", "l", "r"}, "internal node");
      node.feature = nj["f"].get<int>();
      node.threshold = nj["t"].get<double>();
      node.left = nj["l"].get<int>();
      node.right = nj["r"].get<int>();
      require(node.feature >= 0 && node.feature < t.m, "bad_model",
              "split feature index out of range");
      require(std::isfinite(node.threshold), "bad_model", "split threshold must be finite");
      // Children sit after their parent in the arena, which rules out loops.
      for (int child : {node.left, node.right})
        require(child > i && child < size, "bad_model", "child index must follow its parent");
    }
    t.nodes.push_back(std::move(node));
  }
  return t;
}

json forest_to_json(const forest::ForestModel& f, bool with_seed) {
  json cfg{{"trees", f.config.n_trees},
           {"criterion", criterion_name(f.config.tree.criterion)},
           {"mtry", f.config.tree.mtry},
           {"min_leaf", f.config.tree.min_leaf},
           {"max_depth", f.config.tree.max_depth},
           {"bootstrap", f.config.bootstrap}};
  if (with_seed) cfg["seed"] = f.config.seed;
  json trees = json::array();
  for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
  return json{{"config", std::move(cfg)},
              {"feature_names", f.feature_names},
              {"class_names", f.class_names},
              {"trees", std::move(trees)}};
}

void check_names(const json& j, const char* what) {
  require(j.is_array() && !j.empty(), "bad_model", std::string(what) + " must be non-empty");
  std::set<std::string> seen;
  for (const auto& item : j) {
    require(item.is_string() && !item.get<std::string>().empty(), "bad_model",
            std::string(what) + " entries must be non-empty strings");
    require(seen.insert(item.get<std::string>()).second, "bad_model",
            std::string(what) + " entries must be unique");
  }
}

forest::ForestModel forest_from_json(const json& j, bool with_seed) {
  check_keys(j, {"config", "feature_names", "class_names", "trees"}, "forest");
  need_keys(j, {"config", "feature_names", "class_names", "trees"}, "forest");

  forest::ForestModel f;
  const json& cfg = j["config"];
  if (with_seed) {
    check_keys(cfg, {"trees", "criterion", "mtry", "min_leaf", "max_depth", "seed", "bootstrap"},
               "forest config");
    need_keys(cfg, {"trees", "criterion", "mtry", "min_leaf", "max_depth", "seed", "bootstrap"},
              "forest config");
    f.config.seed = cfg["seed"].get<std::uint64_t>();
  } else {
    check_keys(cfg, {"trees", "criterion", "mtry", "min_leaf", "max_depth", "bootstrap"},
               "forest config");
    need_keys(cfg, {"trees", "criterion", "mtry", "min_leaf", "max_depth", "bootstrap"},
              "forest config");
  }
  f.config.n_trees = cfg["trees"].get<int>();
  f.config.tree.criterion = criterion_from_name(cfg["criterion"].get<std::string>());
  f.config.tree.mtry = cfg["mtry"].get<int>();
  f.config.tree.min_leaf = cfg["min_leaf"].get<int>();
  f.config.tree.max_depth = cfg["max_depth"].get<int>();
  f.config.bootstrap = cfg["bootstrap"].get<bool>();
  require(f.config.n_trees >= 1, "bad_model", "forest needs at least one tree");
  require(f.config.tree.mtry >= 0 && f.config.tree.min_leaf >= 1 && f.config.tree.max_depth >= 0,
          "bad_model", "tree hyperparameters out of range");

  check_names(j["feature_names"], "feature_names");
  check_names(j["class_names"], "class_names");
  f.feature_names = j["feature_names"].get<std::vector<std::string>>();
  f.class_names = j["class_names"].get<std::vector<std::string>>();

  const json& trees = j["trees"];
  require(trees.is_array() && int(trees.size()) == f.config.n_trees, "bad_model",
          "tree array length must match the configured tree count");
  for (const auto& tj : trees) {
    cart::Tree t = tree_from_json(tj);
    require(t.m == int(f.feature_names.size()) && t.k == int(f.class_names.size()), "bad_model",
            "tree dimensions must match the model's names");
    f.trees.push_back(std::move(t));
  }
  return f;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, int m, const char* what) {
  require(j.is_array() && int(j.size()) == m, "bad_model",
          std::string(what) + " must be an array of length m");
  Eigen::VectorXd out(m);
  for (int i = 0; i < m; ++i) {
    require(j[std::size_t(i)].is_number(), "bad_model",
            std::string(what) + " entries must be numbers");
    out[i] = j[std::size_t(i)].get<double>();
    require(std::isfinite(out[i]), "bad_model", std::string(what) + " entries must be finite");
  }
  return out;
}

json rotation_to_json(const rotation::RotationMatrix& rot) {
  json matrix = json::array();
  for (Eigen::Index i = 0; i < rot.r.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < rot.r.cols(); ++j) row.push_back(rot.r(i, j));
    matrix.push_back(std::move(row));
  }
  return json{{"kind", rotation_name(rot.kind)},
              {"matrix", std::move(matrix)},
              {"permutation", rot.permutation},
              {"boundaries", rot.boundaries}};
}

rotation::RotationMatrix rotation_from_json(const json& j, int m) {
  check_keys(j, {"kind", "matrix", "permutation", "boundaries"}, "rotation");
  need_keys(j, {"kind", "matrix", "permutation", "boundaries"}, "rotation");
  rotation::RotationMatrix rot;
  rot.kind = rotation_from_name(j["kind"].get<std::string>());

  const json& matrix = j["matrix"];
  require(matrix.is_array() && int(matrix.size()) == m, "bad_model",
          "rotation matrix must have m rows");
  rot.r.resize(m, m);
  for (int i = 0; i < m; ++i)
    rot.r.row(i) = vector_from_json(matrix[std::size_t(i)], m, "matrix row").transpose();

  rot.permutation = j["permutation"].get<std::vector<int>>();
  if (!rot.permutation.empty()) {
    require(int(rot.permutation.size()) == m, "bad_model",
            "permutation must be empty or length m");
    std::set<int> seen;
    for (int p : rot.permutation)
      require(p >= 0 && p < m && seen.insert(p).second, "bad_model",
              "permutation must cover 0..m-1 once");
  }
  rot.boundaries = j["boundaries"].get<std::vector<int>>();
  int prev = -1;
  for (int b : rot.boundaries) {
    require(b > prev && b < m, "bad_model", "boundaries must be increasing offsets below m");
    prev = b;
  }
  if (!rot.boundaries.empty())
    require(rot.boundaries.front() == 0, "bad_model", "first boundary must be 0");
  return rot;
}

std::string ensemble_id(rotation::Kind kind) {
  switch (kind) {
    case rotation::Kind::identity: return "rfe";
    case rotation::Kind::pca: return "pca-rfe";
    case rotation::Kind::srp: return "srp-rfe";
    case rotation::Kind::crp: return "crp-rfe";
  }
  fail("bad_model", "unknown rotation kind");
}

json ensemble_to_json(const rotation::EnsembleModel& e) {
  json cfg{{"members", e.config.members},
           {"subset", e.config.rotation.subset_size},
           {"seed", e.config.seed},
           {"weights_on_test", e.config.evaluate_weights_on_test},
           {"forest", json{{"trees", e.config.forest.n_trees},
                           {"criterion", criterion_name(e.config.forest.tree.criterion)},
                           {"mtry", e.config.forest.tree.mtry},
                           {"min_leaf", e.config.forest.tree.min_leaf},
                           {"max_depth", e.config.forest.tree.max_depth},
                           {"bootstrap", e.config.forest.bootstrap}}}};
  json members = json::array();
  for (const auto& member : e.members)
    members.push_back(json{{"weight", member.weight},
                           {"rotation", rotation_to_json(member.rotation)},
                           {"forest", forest_to_json(member.forest, true)}});
  json normalization;
  if (e.normalization)
    normalization = json{{"mean", vector_to_json(e.normalization->first)},
                         {"sigma", vector_to_json(e.normalization->second)}};
  return json{{"config", std::move(cfg)},
              {"feature_names", e.feature_names},
              {"class_names", e.class_names},
              {"normalization", std::move(normalization)},
              {"members", std::move(members)}};
}

rotation::EnsembleModel ensemble_from_json(const json& j, rotation::Kind kind) {
  check_keys(j, {"config", "feature_names", "class_names", "normalization", "members"},
             "ensemble");
  need_keys(j, {"config", "feature_names", "class_names", "normalization", "members"},
            "ensemble");

  rotation::EnsembleModel e;
  e.config.rotation.kind = kind;
  const json& cfg = j["config"];
  check_keys(cfg, {"members", "subset", "seed", "weights_on_test", "forest"}, "ensemble config");
  need_keys(cfg, {"members", "subset", "seed", "weights_on_test", "forest"}, "ensemble config");
  e.config.members = cfg["members"].get<int>();
  e.config.rotation.subset_size = cfg["subset"].get<int>();
  e.config.seed = cfg["seed"].get<std::uint64_t>();
  e.config.evaluate_weights_on_test = cfg["weights_on_test"].get<bool>();
  require(e.config.members >= 1 && e.config.rotation.subset_size >= 1, "bad_model",
          "ensemble needs positive member and subset sizes");

  const json& fc = cfg["forest"];
  check_keys(fc, {"trees", "criterion", "mtry", "min_leaf", "max_depth", "bootstrap"},
             "ensemble forest config");
  need_keys(fc, {"trees", "criterion", "mtry", "min_leaf", "max_depth", "bootstrap"},
            "ensemble forest config");
  e.config.forest.n_trees = fc["trees"].get<int>();
  e.config.forest.tree.criterion = criterion_from_name(fc["criterion"].get<std::string>());
  e.config.forest.tree.mtry = fc["mtry"].get<int>();
  e.config.forest.tree.min_leaf = fc["min_leaf"].get<int>();
  e.config.forest.tree.max_depth = fc["max_depth"].get<int>();
  e.config.forest.bootstrap = fc["bootstrap"].get<bool>();

  check_names(j["feature_names"], "feature_names");
  check_names(j["class_names"], "class_names");
  e.feature_names = j["feature_names"].get<std::vector<std::string>>();
  e.class_names = j["class_names"].get<std::vector<std::string>>();
  const int m = int(e.feature_names.size());

  const json& normalization = j["normalization"];
  if (!normalization.is_null()) {
    check_keys(normalization, {"mean", "sigma"}, "normalization");
    need_keys(normalization, {"mean", "sigma"}, "normalization");
    Eigen::VectorXd mean = vector_from_json(normalization["mean"], m, "normalization mean");
    Eigen::VectorXd sigma = vector_from_json(normalization["sigma"], m, "normalization sigma");
    require((sigma.array() > 0).all(), "bad_model", "normalization sigma must be positive");
    e.normalization = std::make_pair(std::move(mean), std::move(sigma));
  }

  const json& members = j["members"];
  require(members.is_array() && int(members.size()) == e.config.members, "bad_model",
          "member array length must match the configured member count");
  for (const auto& mj : members) {
    check_keys(mj, {"weight", "rotation", "forest"}, "member");
    need_keys(mj, {"weight", "rotation", "forest"}, "member");
    rotation::EnsembleMember member;
    member.weight = mj["weight"].get<double>();
    require(std::isfinite(member.weight) && member.weight >= 0, "bad_model",
            "member weights must be finite and non-negative");
    member.rotation = rotation_from_json(mj["rotation"], m);
    require(member.rotation.kind == kind, "bad_model",
            "member rotation kind must match the model id");
    member.forest = forest_from_json(mj["forest"], true);
    require(member.forest.m() == m, "bad_model", "member forest width must match the model");
    require(member.forest.class_names == e.class_names, "bad_model",
            "member forests must share the ensemble class list");
    e.members.push_back(std::move(member));
  }
  return e;
}

int predict_one(const forest::ForestModel& f, const Eigen::Ref<const Eigen::VectorXf>& x) {
  return forest::predict_forest(f, x).first;
}

int predict_one(const rotation::EnsembleModel& e, const Eigen::Ref<const Eigen::VectorXf>& x) {
  return rotation::predict_ensemble(e, x).first;
}

}  // namespace

std::string classifier_id(const Classifier& c) {
  if (std::holds_alternative<forest::ForestModel>(c)) return "rf";
  return ensemble_id(std::get<rotation::EnsembleModel>(c).config.rotation.kind);
}

const std::vector<std::string>& classifier_classes(const Classifier& c) {
  return std::visit([](const auto& model) -> const std::vector<std::string>& {
    return model.class_names;
  }, c);
}

int classifier_width(const Classifier& c) {
  return std::visit([](const auto& model) { return int(model.feature_names.size()); }, c);
}

std::string classifier_to_json(const Classifier& c) {
  json body;
  if (const auto* f = std::get_if<forest::ForestModel>(&c))
    body = forest_to_json(*f, true);
  else
    body = ensemble_to_json(std::get<rotation::EnsembleModel>(c));
  body["model"] = classifier_id(c);
  return body.dump(2) + "\n";
}

Classifier classifier_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail("bad_model", std::string("cannot parse model JSON: ") + e.what());
  }
  require(j.is_object() && j.contains("model") && j["model"].is_string(), "bad_model",
          "model file needs a top-level \"model\" string");
  const std::string id = j["model"].get<std::string>();
  j.erase("model");
  if (id == "rf") return forest_from_json(j, true);
  for (rotation::Kind kind : {rotation::Kind::identity, rotation::Kind::pca, rotation::Kind::srp,
                              rotation::Kind::crp})
    if (id == ensemble_id(kind)) return ensemble_from_json(j, kind);
  fail("bad_model", "unknown model id: " + id);
}

void save_classifier(const Classifier& c, const std::string& path) {
  write_text_file(path, classifier_to_json(c));
}

Classifier load_classifier(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), "missing_file", "model file not found: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return classifier_from_json(text);
}

int predict(const Classifier& c, const Eigen::Ref<const Eigen::VectorXf>& x) {
  return std::visit([&](const auto& model) { return predict_one(model, x); }, c);
}

std::vector<int> predict_all(const Classifier& c, const SampleSet& samples, int threads) {
  if (const auto* f = std::get_if<forest::ForestModel>(&c))
    return forest::predict_forest_all(*f, samples, threads);
  return rotation::predict_ensemble_all(std::get<rotation::EnsembleModel>(c), samples, threads);
}

ClassMap classify_raster(const Classifier& c, const Raster& r, int threads) {
  r.validate();
  const int width = classifier_width(c);
  require(r.bands() == width, "band_mismatch",
          "raster has " + std::to_string(r.bands()) + " bands, model expects " +
              std::to_string(width));
  ClassMap out(r.rows, r.cols, classifier_classes(c));
  std::visit([&](const auto& model) {
    parallel_for(std::size_t(r.rows), threads, [&](std::size_t row) {
      Eigen::VectorXf x(width);
      for (int col = 0; col < r.cols; ++col) {
        bool valid = true;
        for (int b = 0; b < width; ++b) {
          const float v = r.at(int(row), col, b);
          if (r.is_nodata(v) || !std::isfinite(v)) {
            valid = false;
            break;
          }
          x[b] = v;
        }
        if (valid) out.at(int(row), col) = std::uint8_t(predict_one(model, x));
      }
    });
  }, c);
  return out;
}

namespace {

// Accumulates a mean over the repetitions where the statistic exists;
// "nan" marks a cell that was never defined.
struct MeanAcc {
  double sum = 0;
  long long count = 0;

  void add(double v) {
    sum += v;
    ++count;
  }
  void add(const std::optional<double>& v) {
    if (v) add(*v);
  }
  std::string text() const { return count ? format_number(sum / double(count)) : "nan"; }
};

void check_csv_name(const std::string& name, const char* what) {
  require(!name.empty(), "bad_name", std::string(what) + " must be non-empty");
  require(name.find_first_of(",\"\n\r") == std::string::npos, "bad_name",
          std::string(what) + " '" + name + "' cannot carry CSV delimiters");
}

rotation::Kind kind_from_model_id(const std::string& id) {
  for (rotation::Kind kind : {rotation::Kind::identity, rotation::Kind::pca, rotation::Kind::srp,
                              rotation::Kind::crp})
    if (id == ensemble_id(kind)) return kind;
  fail("bad_config", "unknown model kind: " + id);
}

bool is_ensemble_id(const std::string& id) {
  return id == "rfe" || id == "pca-rfe" || id == "srp-rfe" || id == "crp-rfe";
}

std::vector<double> parse_fractions(const json& j) {
  std::vector<double> fractions;
  if (j.is_array()) {
    require(!j.empty(), "bad_config", "fractions must not be empty");
    for (const auto& f : j) {
      require(f.is_number(), "bad_config", "fractions must be numbers");
      fractions.push_back(f.get<double>());
    }
  } else if (j.is_object()) {
    check_keys(j, {"from", "to", "step"}, "fractions", "bad_config");
    need_keys(j, {"from", "to", "step"}, "fractions", "bad_config");
    const double from = j["from"].get<double>();
    const double to = j["to"].get<double>();
    const double step = j["step"].get<double>();
    require(step > 0 && from <= to, "bad_config", "fractions grid needs step > 0 and from <= to");
    for (int i = 0;; ++i) {
      const double f = from + i * step;
      if (f > to + 1e-12) break;
      fractions.push_back(f);
    }
  } else {
    fail("bad_config", "fractions must be an array or a {from,to,step} grid");
  }
  for (double f : fractions)
    require(f > 0 && f < 1, "bad_config", "training fractions must lie in (0,1)");
  return fractions;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail("bad_config", std::string("cannot parse experiment config: ") + e.what());
  }
  require(j.is_object(), "bad_config", "experiment config must be a JSON object");
  check_keys(j,
             {"datasets", "models", "fractions", "repetitions", "seed", "threads",
              "weights_on_test", "out", "per_class_out"},
             "experiment config", "bad_config");
  need_keys(j, {"datasets", "models", "fractions", "repetitions", "seed"}, "experiment config",
            "bad_config");

  ExperimentConfig cfg;
  require(j["datasets"].is_array() && !j["datasets"].empty(), "bad_config",
          "datasets must be a non-empty array");
  for (const auto& dj : j["datasets"]) {
    check_keys(dj, {"name", "raster", "classmap"}, "dataset", "bad_config");
    need_keys(dj, {"name", "raster", "classmap"}, "dataset", "bad_config");
    DatasetSpec ds;
    ds.name = dj["name"].get<std::string>();
    ds.raster = dj["raster"].get<std::string>();
    ds.classmap = dj["classmap"].get<std::string>();
    check_csv_name(ds.name, "dataset name");
    cfg.datasets.push_back(std::move(ds));
  }

  require(j["models"].is_array() && !j["models"].empty(), "bad_config",
          "models must be a non-empty array");
  for (const auto& mj : j["models"]) {
    check_keys(mj, {"name", "kind", "trees", "forests", "subset"}, "model", "bad_config");
    need_keys(mj, {"name", "kind"}, "model", "bad_config");
    ModelSpec ms;
    ms.name = mj["name"].get<std::string>();
    ms.kind = mj["kind"].get<std::string>();
    check_csv_name(ms.name, "model name");
    require(ms.kind == "rf" || is_ensemble_id(ms.kind), "bad_config",
            "model kind must be rf, rfe, pca-rfe, srp-rfe, or crp-rfe");
    if (mj.contains("trees")) ms.trees = mj["trees"].get<int>();
    if (mj.contains("forests")) ms.forests = mj["forests"].get<int>();
    if (mj.contains("subset")) ms.subset = mj["subset"].get<int>();
    require(ms.trees >= 1 && ms.forests >= 1 && ms.subset >= 1, "bad_config",
            "model hyperparameters must be positive");
    cfg.models.push_back(std::move(ms));
  }

  cfg.fractions = parse_fractions(j["fractions"]);
  cfg.repetitions = j["repetitions"].get<int>();
  require(cfg.repetitions >= 1, "bad_config", "repetitions must be positive");
  cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) {
    cfg.threads = j["threads"].get<int>();
    require(cfg.threads >= 1, "bad_config", "threads must be positive");
  }
  if (j.contains("weights_on_test")) cfg.weights_on_test = j["weights_on_test"].get<bool>();
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  if (j.contains("per_class_out")) cfg.per_class_out = j["per_class_out"].get<std::string>();

  std::set<std::string> names;
  for (const auto& ds : cfg.datasets)
    require(names.insert(ds.name).second, "bad_config", "duplicate dataset name: " + ds.name);
  names.clear();
  for (const auto& ms : cfg.models)
    require(names.insert(ms.name).second, "bad_config", "duplicate model name: " + ms.name);
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  require(!cfg.datasets.empty() && !cfg.models.empty() && !cfg.fractions.empty(), "bad_config",
          "experiment needs datasets, models, and fractions");
  require(cfg.repetitions >= 1 && cfg.threads >= 1, "bad_config",
          "repetitions and threads must be positive");

  ExperimentResult result;
  result.results_csv =
      "dataset,model,fraction,repetitions,mean_kappa,mean_kappa_se,mean_runtime_s\n";
  result.per_class_csv =
      "dataset,model,fraction,class,mean_user_kappa,mean_user_kappa_se,"
      "mean_producer_kappa,mean_producer_kappa_se\n";

  for (std::size_t di = 0; di < cfg.datasets.size(); ++di) {
    const DatasetSpec& ds = cfg.datasets[di];
    const Raster raster = read_raster(ds.raster);
    const ClassMap cm = read_class_map(ds.classmap);
    const SampleSet samples = extract_samples(raster, cm);
    const int k = samples.k();
    for (const std::string& name : samples.class_names) check_csv_name(name, "class name");

    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
      const ModelSpec& ms = cfg.models[mi];
      for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
        const double fraction = cfg.fractions[fi];
        const std::uint64_t cell_seed = derive_seed(cfg.seed, di, mi, fi);

        MeanAcc kappa, kappa_se;
        std::vector<MeanAcc> user(k), user_se(k), producer(k), producer_se(k);
        double runtime_sum = 0;

        for (int rep = 0; rep < cfg.repetitions; ++rep) {
          const std::uint64_t rep_seed = derive_seed(cell_seed, std::uint64_t(rep));
          auto [train, test] = stratified_split(samples, fraction, derive_seed(rep_seed, 0));

          const auto start = std::chrono::steady_clock::now();
          std::vector<int> predicted;
          if (ms.kind == "rf") {
            forest::ForestConfig fc;
            fc.n_trees = ms.trees;
            fc.seed = derive_seed(rep_seed, 1);
            fc.threads = cfg.threads;
            const forest::ForestModel model = forest::train_forest(train, fc);
            predicted = forest::predict_forest_all(model, test, cfg.threads);
          } else {
            rotation::EnsembleConfig ec;
            ec.members = ms.forests;
            ec.rotation.kind = kind_from_model_id(ms.kind);
            ec.rotation.subset_size = ms.subset;
            ec.forest.n_trees = ms.trees;
            ec.forest.threads = cfg.threads;
            ec.seed = derive_seed(rep_seed, 1);
            ec.evaluate_weights_on_test = cfg.weights_on_test;
            ec.threads = cfg.threads;
            const rotation::EnsembleModel model =
                rotation::train_ensemble_holdout(train, test, ec, derive_seed(rep_seed, 2));
            predicted = rotation::predict_ensemble_all(model, test, cfg.threads);
          }
          runtime_sum += std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count();

          const accuracy::KappaStats stats = accuracy::kappa_stats(
              accuracy::confusion(predicted, test.labels, k, samples.class_names));
          kappa.add(stats.kappa);
          kappa_se.add(stats.kappa_se);
          for (int i = 0; i < k; ++i) {
            user[std::size_t(i)].add(stats.user_kappa[std::size_t(i)]);
            user_se[std::size_t(i)].add(stats.user_kappa_se[std::size_t(i)]);
            producer[std::size_t(i)].add(stats.producer_kappa[std::size_t(i)]);
            producer_se[std::size_t(i)].add(stats.producer_kappa_se[std::size_t(i)]);
          }
        }

        const std::string prefix =
            ds.name + "," + ms.name + "," + format_number(fraction) + ",";
        result.results_csv += prefix + format_number(cfg.repetitions) + "," + kappa.text() +
                              "," + kappa_se.text() + "," +
                              format_number(runtime_sum / cfg.repetitions) + "\n";
        for (int i = 0; i < k; ++i)
          result.per_class_csv += prefix + samples.class_names[std::size_t(i)] + "," +
                                  user[std::size_t(i)].text() + "," +
                                  user_se[std::size_t(i)].text() + "," +
                                  producer[std::size_t(i)].text() + "," +
                                  producer_se[std::size_t(i)].text() + "\n";
      }
    }
  }

  if (!cfg.out.empty()) write_text_file(cfg.out, result.results_csv);
  if (!cfg.per_class_out.empty()) write_text_file(cfg.per_class_out, result.per_class_csv);
  return result;
}

}  // namespace lulc::pipeline
