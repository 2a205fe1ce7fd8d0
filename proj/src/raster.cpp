#include "lulc/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lulc/rng.hpp"
#include "lulc/text.hpp"

// Payloads are raw little-endian IEEE-754; this implementation memcpy's
// straight from the in-memory arrays.
static_assert(std::endian::native == std::endian::little,
              "raster payload I/O assumes a little-endian host");

namespace lulc {

using nlohmann::json;

namespace {

std::string header_path(const std::string& path) { return path + ".json"; }

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  require(bool(in), "missing_file", std::string(what) + " not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("bad_header", std::string("cannot parse ") + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(bool(out), "io_error", "cannot open for writing: " + path);
  out << text;
  require(bool(out), "io_error", "write failed: " + path);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    require(known, "bad_header", std::string(what) + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

Raster::Raster(int rows_, int cols_, std::vector<std::string> names,
               std::optional<float> nodata_value)
    : rows(rows_), cols(cols_), band_names(std::move(names)), nodata(nodata_value) {
  require(rows > 0 && cols > 0, "bad_shape", "raster dimensions must be positive");
  require(!band_names.empty(), "bad_shape", "raster needs at least one band");
  data.assign(plane() * band_names.size(), 0.0f);
  validate();
}

void Raster::validate() const {
  require(rows > 0 && cols > 0, "bad_shape", "raster dimensions must be positive");
  require(!band_names.empty(), "bad_shape", "raster needs at least one band");
  require(data.size() == plane() * band_names.size(), "bad_shape",
          "raster payload size does not match rows*cols*bands");
  std::set<std::string> seen;
  for (const auto& n : band_names) {
    require(!n.empty(), "bad_band_name", "band names must be non-empty");
    require(seen.insert(n).second, "bad_band_name", "duplicate band name: " + n);
  }
}

int Raster::band_index(std::string_view name) const {
  for (int b = 0; b < bands(); ++b)
    if (band_names[b] == name) return b;
  fail("unknown_band", "no band named '" + std::string(name) + "'");
}

ClassMap::ClassMap(int rows_, int cols_, std::vector<std::string> legend_)
    : rows(rows_), cols(cols_), legend(std::move(legend_)) {
  require(rows > 0 && cols > 0, "bad_shape", "class map dimensions must be positive");
  labels.assign(std::size_t(rows) * cols, kUnlabeled);
  validate();
}

void ClassMap::validate() const {
  require(rows > 0 && cols > 0, "bad_shape", "class map dimensions must be positive");
  require(labels.size() == std::size_t(rows) * cols, "bad_shape",
          "class map payload size does not match rows*cols");
  require(!legend.empty(), "bad_legend", "legend must not be empty");
  require(legend.size() <= std::size_t(kUnlabeled), "bad_legend",
          "at most 254 classes fit next to the unlabeled sentinel");
  for (std::uint8_t v : labels)
    require(v == kUnlabeled || v < legend.size(), "bad_label",
            "label value " + std::to_string(int(v)) + " outside the legend");
}

SampleSet SampleSet::make(Eigen::MatrixXf features, std::vector<int> labels,
                          std::vector<std::string> feature_names,
                          std::vector<std::string> class_names, bool allow_empty_classes) {
  SampleSet s;
  require(std::size_t(features.rows()) == labels.size(), "length_mismatch",
          "feature rows and label count differ");
  require(features.cols() == Eigen::Index(feature_names.size()), "length_mismatch",
          "feature columns and feature name count differ");
  require(!class_names.empty(), "bad_classes", "class name list must not be empty");
  require(features.rows() > 0, "empty_samples", "sample set must not be empty");
  require(features.allFinite(), "nonfinite_feature",
          "sample features must be finite (no NaN/inf)");
  const int k = int(class_names.size());
  std::vector<long long> counts(k, 0);
  for (int label : labels) {
    require(label >= 0 && label < k, "bad_label",
            "label " + std::to_string(label) + " outside [0, " + std::to_string(k) + ")");
    ++counts[label];
  }
  if (!allow_empty_classes) {
    for (int c = 0; c < k; ++c)
      require(counts[c] > 0, "empty_class", "class '" + class_names[c] + "' has no samples");
  }
  s.features = std::move(features);
  s.labels = std::move(labels);
  s.feature_names = std::move(feature_names);
  s.class_names = std::move(class_names);
  return s;
}

std::vector<long long> SampleSet::class_counts() const {
  std::vector<long long> counts(class_names.size(), 0);
  for (int label : labels) ++counts[label];
  return counts;
}

void write_raster(const Raster& r, const std::string& path) {
  r.validate();
  for (float v : r.data)
    require(!std::isnan(v), "nan_payload", "raster payload contains NaN; refusing to write");

  json header;
  header["rows"] = r.rows;
  header["cols"] = r.cols;
  header["bands"] = r.bands();
  header["dtype"] = "f32";
  header["band_names"] = r.band_names;
  if (r.nodata)
    header["nodata"] = *r.nodata;
  else
    header["nodata"] = nullptr;
  write_text_file(header_path(path), header.dump(2) + "\n");

  std::ofstream out(path, std::ios::binary);
  require(bool(out), "io_error", "cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(r.data.data()),
            std::streamsize(r.data.size() * sizeof(float)));
  require(bool(out), "io_error", "write failed: " + path);
}

Raster read_raster(const std::string& path) {
  json h = read_json_file(header_path(path), "raster header");
  check_keys(h, {"rows", "cols", "bands", "dtype", "band_names", "nodata"}, "raster header");
  for (const char* k : {"rows", "cols", "bands", "dtype", "band_names", "nodata"})
    require(h.contains(k), "bad_header", std::string("raster header missing '") + k + "'");
  require(h["dtype"] == "f32", "bad_header", "raster dtype must be \"f32\"");

  Raster r;
  r.rows = h["rows"].get<int>();
  r.cols = h["cols"].get<int>();
  r.band_names = h["band_names"].get<std::vector<std::string>>();
  require(h["bands"].get<int>() == r.bands(), "bad_header",
          "band count does not match band_names length");
  if (!h["nodata"].is_null()) r.nodata = h["nodata"].get<float>();

  std::ifstream in(path, std::ios::binary | std::ios::ate);
  require(bool(in), "missing_file", "raster payload not found: " + path);
  const std::streamsize size = in.tellg();
  const std::size_t expected =
      std::size_t(r.rows) * std::size_t(r.cols) * std::size_t(r.bands()) * sizeof(float);
  require(std::size_t(size) == expected, "bad_payload",
          "payload is " + std::to_string(size) + " bytes, header implies " +
              std::to_string(expected));
  r.data.resize(expected / sizeof(float));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(r.data.data()), std::streamsize(expected));
  require(bool(in), "io_error", "read failed: " + path);
  r.validate();
  return r;
}

void write_class_map(const ClassMap& cm, const std::string& path) {
  cm.validate();
  json header;
  header["rows"] = cm.rows;
  header["cols"] = cm.cols;
  header["dtype"] = "u8";
  header["legend"] = cm.legend;
  write_text_file(header_path(path), header.dump(2) + "\n");

  std::ofstream out(path, std::ios::binary);
  require(bool(out), "io_error", "cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(cm.labels.data()), std::streamsize(cm.labels.size()));
  require(bool(out), "io_error", "write failed: " + path);
}

ClassMap read_class_map(const std::string& path) {
  json h = read_json_file(header_path(path), "class map header");
  check_keys(h, {"rows", "cols", "dtype", "legend"}, "class map header");
  for (const char* k : {"rows", "cols", "dtype", "legend"})
    require(h.contains(k), "bad_header", std::string("class map header missing '") + k + "'");
  require(h["dtype"] == "u8", "bad_header", "class map dtype must be \"u8\"");

  ClassMap cm;
  cm.rows = h["rows"].get<int>();
  cm.cols = h["cols"].get<int>();
  cm.legend = h["legend"].get<std::vector<std::string>>();

  std::ifstream in(path, std::ios::binary | std::ios::ate);
  require(bool(in), "missing_file", "class map payload not found: " + path);
  const std::streamsize size = in.tellg();
  const std::size_t expected = std::size_t(cm.rows) * std::size_t(cm.cols);
  require(std::size_t(size) == expected, "bad_payload",
          "payload is " + std::to_string(size) + " bytes, header implies " +
              std::to_string(expected));
  cm.labels.resize(expected);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(cm.labels.data()), std::streamsize(expected));
  require(bool(in), "io_error", "read failed: " + path);
  cm.validate();
  return cm;
}

void write_samples_csv(const SampleSet& s, const std::string& path) {
  std::string out;
  for (int j = 0; j < s.m(); ++j) out += "f_" + std::to_string(j) + ",";
  out += "label\n";
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) {
      out += format_number(s.features(i, j));
      out += ',';
    }
    out += format_number(s.labels[i]);
    out += '\n';
  }
  write_text_file(path, out);
}

SampleSet read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), "missing_file", "sample CSV not found: " + path);
  std::string line;
  require(bool(std::getline(in, line)), "bad_csv", "sample CSV is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split_csv_line(line);
  require(header.size() >= 2, "bad_csv", "sample CSV header needs f_0,...,label");
  const int m = int(header.size()) - 1;
  for (int j = 0; j < m; ++j)
    require(header[j] == "f_" + std::to_string(j), "bad_csv",
            "sample CSV header column " + std::to_string(j) + " must be f_" + std::to_string(j));
  require(header.back() == "label", "bad_csv", "sample CSV last header column must be 'label'");

  std::vector<float> values;
  std::vector<int> labels;
  int max_label = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    require(int(cells.size()) == m + 1, "bad_csv",
            "sample CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                std::to_string(m + 1));
    for (int j = 0; j < m; ++j) values.push_back(parse_number<float>(cells[j], "feature"));
    const int label = parse_number<int>(cells[m], "label");
    require(label >= 0, "bad_label", "labels must be non-negative");
    labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  require(!labels.empty(), "empty_samples", "sample CSV has no data rows: " + path);

  const int n = int(labels.size());
  Eigen::MatrixXf features(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) features(i, j) = values[std::size_t(i) * m + j];

  std::vector<std::string> feature_names;
  for (int j = 0; j < m; ++j) feature_names.push_back("f_" + std::to_string(j));
  std::vector<std::string> class_names;
  for (int c = 0; c <= max_label; ++c) class_names.push_back("class_" + std::to_string(c));
  // The CSV does not carry class names, so gaps in the label range are legal.
  return SampleSet::make(std::move(features), std::move(labels), std::move(feature_names),
                         std::move(class_names), /*allow_empty_classes=*/true);
}

Raster stack_bands(const std::vector<const Raster*>& parts) {
  require(!parts.empty(), "empty_input", "stack_bands needs at least one raster");
  for (const Raster* p : parts) {
    require(p != nullptr, "empty_input", "stack_bands got a null raster");
    p->validate();
  }
  const Raster& first = *parts.front();
  std::optional<float> nodata;
  for (const Raster* p : parts) {
    require(p->rows == first.rows && p->cols == first.cols, "shape_mismatch",
            "all rasters in a stack must share rows/cols");
    if (p->nodata) {
      if (nodata)
        require(*nodata == *p->nodata, "nodata_mismatch",
                "stacked rasters declare different nodata values");
      else
        nodata = p->nodata;
    }
  }

  std::set<std::string> used;
  std::vector<std::string> names;
  for (const Raster* p : parts)
    for (const auto& base : p->band_names) {
      std::string name = base;
      int suffix = 2;
      while (!used.insert(name).second) name = base + "_" + std::to_string(suffix++);
      names.push_back(name);
    }

  Raster out(first.rows, first.cols, std::move(names), nodata);
  std::size_t offset = 0;
  for (const Raster* p : parts) {
    std::copy(p->data.begin(), p->data.end(), out.data.begin() + offset);
    offset += p->data.size();
  }
  return out;
}

Raster take_band(const Raster& r, int band) {
  require(band >= 0 && band < r.bands(), "unknown_band",
          "band index " + std::to_string(band) + " outside [0, " + std::to_string(r.bands()) + ")");
  Raster out(r.rows, r.cols, {r.band_names[band]}, r.nodata);
  std::copy(r.data.begin() + r.plane() * band, r.data.begin() + r.plane() * (band + 1),
            out.data.begin());
  return out;
}

SampleSet extract_samples(const Raster& r, const ClassMap& cm) {
  r.validate();
  cm.validate();
  require(r.rows == cm.rows && r.cols == cm.cols, "shape_mismatch",
          "raster and class map dimensions differ");

  std::vector<int> labels;
  std::vector<std::size_t> pixels;
  const std::size_t plane = r.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    if (cm.labels[p] == kUnlabeled) continue;
    labels.push_back(int(cm.labels[p]));
    pixels.push_back(p);
  }
  require(!labels.empty(), "no_labeled_pixels", "class map labels no pixels");

  Eigen::MatrixXf features(Eigen::Index(labels.size()), r.bands());
  for (std::size_t i = 0; i < pixels.size(); ++i)
    for (int b = 0; b < r.bands(); ++b)
      features(Eigen::Index(i), b) = r.data[plane * b + pixels[i]];

  // Legends may legitimately contain classes that never occur in the map.
  return SampleSet::make(std::move(features), std::move(labels), r.band_names, cm.legend,
                         /*allow_empty_classes=*/true);
}

std::pair<SampleSet, SampleSet> stratified_split(const SampleSet& s, double train_fraction,
                                                 std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "bad_fraction",
          "train_fraction must lie in (0, 1)");
  const int k = s.k();
  std::vector<std::vector<int>> by_class(k);
  for (int i = 0; i < s.n(); ++i) by_class[s.labels[i]].push_back(i);
  for (int c = 0; c < k; ++c)
    require(by_class[c].size() >= 2, "class_too_small",
            "class '" + s.class_names[c] + "' has " + std::to_string(by_class[c].size()) +
                " samples; a stratified split needs at least 2");

  // One engine, classes processed in index order: the split is a pure
  // function of (samples, fraction, seed).
  Rng rng(seed);
  std::vector<int> train_idx, test_idx;
  for (int c = 0; c < k; ++c) {
    auto& idx = by_class[c];
    const std::size_t n_c = idx.size();
    std::size_t take = std::size_t(std::llround(train_fraction * double(n_c)));
    if (take < 1) take = 1;
    if (take > n_c) take = n_c;
    partial_shuffle(idx, take, rng);
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + take);
    test_idx.insert(test_idx.end(), idx.begin() + take, idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  require(!test_idx.empty(), "empty_split",
          "train_fraction leaves no test samples; lower it");

  auto build = [&](const std::vector<int>& rows_sel) {
    Eigen::MatrixXf f(Eigen::Index(rows_sel.size()), s.m());
    std::vector<int> l(rows_sel.size());
    for (std::size_t i = 0; i < rows_sel.size(); ++i) {
      f.row(Eigen::Index(i)) = s.features.row(rows_sel[i]);
      l[i] = s.labels[rows_sel[i]];
    }
    return SampleSet::make(std::move(f), std::move(l), s.feature_names, s.class_names,
                           /*allow_empty_classes=*/true);
  };
  return {build(train_idx), build(test_idx)};
}

}  // namespace lulc
