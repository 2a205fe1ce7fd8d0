#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lulc/error.hpp"

namespace lulc {

// Sentinel written into derived bands where an operation has no defined
// value (masked ratio denominators, texture window borders, ...). Kept
// finite so downstream feature matrices stay NaN-free.
inline constexpr float kDefaultNodata = -9999.0f;

// Class-map sentinel for pixels without a label.
inline constexpr std::uint8_t kUnlabeled = 255;

using GridF = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using GridI = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// In-memory raster: 32-bit float samples, band-sequential (each band is one
// contiguous row-major rows*cols plane). Band names are unique and there is
// at least one band; `validate()` enforces this and I/O re-checks it.
struct Raster {
  int rows = 0;
  int cols = 0;
  std::vector<std::string> band_names;
  std::optional<float> nodata;
  std::vector<float> data;

  Raster() = default;
  Raster(int rows_, int cols_, std::vector<std::string> names,
         std::optional<float> nodata_value = std::nullopt);

  int bands() const { return int(band_names.size()); }
  std::size_t plane() const { return std::size_t(rows) * std::size_t(cols); }

  float at(int r, int c, int b) const { return data[plane() * b + std::size_t(r) * cols + c]; }
  float& at(int r, int c, int b) { return data[plane() * b + std::size_t(r) * cols + c]; }

  Eigen::Map<const GridF> band(int b) const {
    return Eigen::Map<const GridF>(data.data() + plane() * b, rows, cols);
  }
  Eigen::Map<GridF> band(int b) {
    return Eigen::Map<GridF>(data.data() + plane() * b, rows, cols);
  }

  int band_index(std::string_view name) const;
  bool is_nodata(float v) const { return nodata.has_value() && v == *nodata; }

  void validate() const;
};

// Dense class map aligned with a raster: one uint8 label per pixel, row
// major; 255 means unlabeled. Labels index into `legend`.
struct ClassMap {
  int rows = 0;
  int cols = 0;
  std::vector<std::string> legend;
  std::vector<std::uint8_t> labels;

  ClassMap() = default;
  ClassMap(int rows_, int cols_, std::vector<std::string> legend_);

  std::uint8_t at(int r, int c) const { return labels[std::size_t(r) * cols + c]; }
  std::uint8_t& at(int r, int c) { return labels[std::size_t(r) * cols + c]; }

  void validate() const;
};

// Feature matrix plus integer labels. Construction rejects non-finite
// features and (by default) classes with no samples; CSV-loaded sets allow
// empty classes because the file format does not carry class names.
struct SampleSet {
  Eigen::MatrixXf features;  // n x m, row per sample
  std::vector<int> labels;   // n values in [0, k)
  std::vector<std::string> feature_names;  // m
  std::vector<std::string> class_names;    // k

  static SampleSet make(Eigen::MatrixXf features, std::vector<int> labels,
                        std::vector<std::string> feature_names,
                        std::vector<std::string> class_names,
                        bool allow_empty_classes = false);

  int n() const { return int(features.rows()); }
  int m() const { return int(features.cols()); }
  int k() const { return int(class_names.size()); }

  std::vector<long long> class_counts() const;
};

// Payload file at `path`, JSON header at `path + ".json"`
// ({rows, cols, bands, dtype:"f32", band_names, nodata}). Little-endian f32
// payload; write rejects NaN samples so everything on disk is finite.
void write_raster(const Raster& r, const std::string& path);
Raster read_raster(const std::string& path);

// uint8 payload plus {rows, cols, dtype:"u8", legend} sidecar.
void write_class_map(const ClassMap& cm, const std::string& path);
ClassMap read_class_map(const std::string& path);

// CSV with the fixed header f_0,...,f_{m-1},label. Class and feature names
// are not persisted; readers synthesize f_i / class_i names.
void write_samples_csv(const SampleSet& s, const std::string& path);
SampleSet read_samples_csv(const std::string& path);

// Concatenates bands of same-shaped rasters. Duplicate band names get a
// numeric suffix (name, name_2, name_3, ...). Nodata values must agree when
// more than one input declares one.
Raster stack_bands(const std::vector<const Raster*>& parts);

// One sample per labeled (non-255) pixel, scanned row-major; features are
// the pixel's band values, class names come from the legend.
SampleSet extract_samples(const Raster& r, const ClassMap& cm);

// Seeded stratified split: exactly max(1, round(fraction * n_c)) samples of
// every class go to train, the rest to test. Sample order inside each part
// follows the original set. Every class needs at least 2 samples.
std::pair<SampleSet, SampleSet> stratified_split(const SampleSet& s, double train_fraction,
                                                 std::uint64_t seed);

// Copies one band out of a stack (helper for band arithmetic and the CLI).
Raster take_band(const Raster& r, int band);

}  // namespace lulc
