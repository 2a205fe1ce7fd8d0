#pragma once

// Shared synthetic data for the test suites. Everything here is seeded and
// deterministic so expectations stay stable across runs and thread counts.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lulc/error.hpp"
#include "lulc/raster.hpp"
#include "lulc/rng.hpp"

namespace fixtures {

// Runs f, expecting it to throw lulc::Error; returns the error's category,
// or "" when nothing was thrown.
template <typename F>
inline std::string error_category(F&& f) {
  try {
    f();
  } catch (const lulc::Error& e) {
    return e.category();
  }
  return "";
}

// Gaussian class blobs: k clusters in m dimensions with unit-spaced means
// along rotating axes and common standard deviation `sigma`. Class sizes are
// as equal as n allows (n mod k classes get one extra). sigma around 1.5-2.5
// gives a mid-range problem: far from separable, far from random.
inline lulc::SampleSet make_blobs(int n, int k, int m, double sigma, std::uint64_t seed) {
  lulc::Rng rng(seed);
  Eigen::MatrixXf x(n, m);
  std::vector<int> labels(static_cast<std::size_t>(n));

  // Class centers: class c sits at distance 3 from the origin along a
  // direction that cycles through coordinate pairs, so no single feature
  // separates everything.
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(k, m);
  for (int c = 0; c < k; ++c) {
    centers(c, c % m) = 3.0 * ((c % 2) ? -1.0 : 1.0);
    centers(c, (c + 1) % m) = 1.5 * (c % 3);
  }

  const int base = n / k, extra = n % k;
  int row = 0;
  for (int c = 0; c < k; ++c) {
    const int count = base + (c < extra ? 1 : 0);
    for (int i = 0; i < count; ++i, ++row) {
      labels[std::size_t(row)] = c;
      for (int f = 0; f < m; ++f)
        x(row, f) = float(centers(c, f) + sigma * lulc::normal(rng));
    }
  }

  std::vector<std::string> fnames, cnames;
  for (int f = 0; f < m; ++f) fnames.push_back("f_" + std::to_string(f));
  for (int c = 0; c < k; ++c) cnames.push_back("class_" + std::to_string(c));
  return lulc::SampleSet::make(std::move(x), std::move(labels), std::move(fnames),
                               std::move(cnames));
}

// Small multiclass sample set that trees can fit exactly: features are well
// separated, useful where accuracy is not the point.
inline lulc::SampleSet make_easy(int n_per_class, int k, std::uint64_t seed) {
  return make_blobs(n_per_class * k, k, 4, 0.3, seed);
}

// Two-class scene for texture experiments: both regions share the same mean
// intensity (so spectral value alone cannot separate them) but differ in
// spatial roughness. Left half is smooth (slowly varying ramp plus small
// noise), right half is rough (checker-modulated heavy noise). Labels leave
// a margin of `margin` pixels to the region boundary and the image border so
// a GLCM window sees a pure region. Returns the single-band raster and the
// label map (0 = smooth, 1 = rough).
inline std::pair<lulc::Raster, lulc::ClassMap> make_texture_scene(int rows, int cols,
                                                                  std::uint64_t seed,
                                                                  int margin = 5) {
  lulc::Rng rng(seed);
  lulc::Raster r(rows, cols, {"intensity"});
  const int split = cols / 2;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      double v;
      if (j < split) {
        v = 100.0 + 2.0 * std::sin(i * 0.15) + 2.0 * std::cos(j * 0.2) + lulc::normal(rng);
      } else {
        const double checker = ((i + j) % 2) ? 6.0 : -6.0;
        v = 100.0 + checker + 5.0 * lulc::normal(rng);
      }
      r.at(i, j, 0) = float(v);
    }

  lulc::ClassMap cm(rows, cols, {"smooth", "rough"});
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const bool left = j < split;
      const int dist_edge = std::min({i, rows - 1 - i, j, cols - 1 - j});
      const int dist_split = left ? split - 1 - j : j - split;
      if (dist_edge >= margin && dist_split >= margin)
        cm.at(i, j) = left ? 0 : 1;
      else
        cm.at(i, j) = lulc::kUnlabeled;
    }
  return {std::move(r), std::move(cm)};
}

}  // namespace fixtures
