#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "lulc/raster.hpp"

namespace lulc::texture {

// Pairing directions for co-occurrence counting, as (row, col) offsets on
// screen coordinates: 0 deg looks right, 45 deg up-right, 90 deg up,
// 135 deg up-left.
enum class Direction { deg0, deg45, deg90, deg135 };

inline constexpr Direction kAllDirections[4] = {Direction::deg0, Direction::deg45,
                                                Direction::deg90, Direction::deg135};

struct GlcmConfig {
  int levels = 32;  // grey levels N_g after quantization
  int window = 9;   // odd window edge length q
  std::vector<Direction> directions = {Direction::deg0, Direction::deg45, Direction::deg90,
                                       Direction::deg135};  // pooled into one matrix
  bool symmetric = true;  // count each pair in both orders
};

// Co-occurrence counts over all configured directions. `pairs` (R) is the
// total number of counted pairs, i.e. counts.sum().
struct Glcm {
  Eigen::MatrixXi counts;
  std::int64_t pairs = 0;

  Eigen::MatrixXd probabilities() const;  // counts / pairs; errors when pairs == 0
};

// Global min-max quantization of one band to [0, levels): level =
// floor((v - min) * levels / (max - min)), the maximum maps to levels - 1,
// and a constant band maps to level 0. Nodata and non-finite samples get
// level -1, which excludes them from pairing. Requires at least one usable
// sample.
GridI quantize(const Raster& r, int band, int levels);

// Counts level pairs inside one window of the quantized grid. Pairs that
// touch a -1 cell or leave the window are skipped.
Glcm compute_glcm(const Eigen::Ref<const GridI>& levels_window, const GlcmConfig& cfg);

// Sum of p(i,j) / (1 + (i-j)^2) over the matrix; 1.0 means the window is
// constant, values fall toward 0 as mass moves off the diagonal.
double homogeneity(const Glcm& g);

// Slides a window x window GLCM over the band and writes per-pixel
// homogeneity. Border pixels without a full window, and windows with no
// valid pairs, become nodata. The result is invariant under strictly
// increasing affine rescaling of the band. Output band is named
// "<band>_homogeneity" with nodata = kDefaultNodata.
Raster texture_band(const Raster& r, int band, const GlcmConfig& cfg, int threads = 1);

}  // namespace lulc::texture
