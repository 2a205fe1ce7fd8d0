#include "lulc/texture.hpp"

#include <cmath>

#include "lulc/error.hpp"
#include "lulc/parallel.hpp"

namespace lulc::texture {

namespace {

void direction_offset(Direction d, int& dr, int& dc) {
  switch (d) {
    case Direction::deg0: dr = 0; dc = 1; break;
    case Direction::deg45: dr = -1; dc = 1; break;
    case Direction::deg90: dr = -1; dc = 0; break;
    case Direction::deg135: dr = -1; dc = -1; break;
  }
}

void validate_config(const GlcmConfig& cfg) {
  require(cfg.levels >= 2, "bad_config", "GLCM needs at least 2 grey levels");
  require(cfg.window >= 3 && cfg.window % 2 == 1, "bad_config",
          "GLCM window must be odd and at least 3");
  require(!cfg.directions.empty(), "bad_config", "GLCM needs at least one direction");
}

}  // namespace

Eigen::MatrixXd Glcm::probabilities() const {
  require(pairs > 0, "empty_glcm", "co-occurrence matrix has no pairs");
  return counts.cast<double>() / double(pairs);
}

GridI quantize(const Raster& r, int band, int levels) {
  require(levels >= 2, "bad_config", "quantize needs at least 2 levels");
  require(band >= 0 && band < r.bands(), "unknown_band", "band index out of range");

  const auto grid = r.band(band);
  bool any = false;
  float lo = 0, hi = 0;
  for (int i = 0; i < r.rows; ++i)
    for (int j = 0; j < r.cols; ++j) {
      const float v = grid(i, j);
      if (!std::isfinite(v) || r.is_nodata(v)) continue;
      if (!any) {
        lo = hi = v;
        any = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  require(any, "empty_band", "band has no finite non-nodata samples to quantize");

  GridI out(r.rows, r.cols);
  const double range = double(hi) - double(lo);
  for (int i = 0; i < r.rows; ++i)
    for (int j = 0; j < r.cols; ++j) {
      const float v = grid(i, j);
      if (!std::isfinite(v) || r.is_nodata(v)) {
        out(i, j) = -1;
      } else if (range == 0.0) {
        out(i, j) = 0;  // constant band
      } else if (v == hi) {
        out(i, j) = levels - 1;  // keep the maximum inside [0, levels)
      } else {
        out(i, j) = int(std::floor((double(v) - double(lo)) * double(levels) / range));
      }
    }
  return out;
}

Glcm compute_glcm(const Eigen::Ref<const GridI>& w, const GlcmConfig& cfg) {
  validate_config(cfg);
  require(w.rows() > 0 && w.cols() > 0, "empty_window", "GLCM window must not be empty");

  Glcm g;
  g.counts.setZero(cfg.levels, cfg.levels);
  for (Direction d : cfg.directions) {
    int dr = 0, dc = 0;
    direction_offset(d, dr, dc);
    for (int i = 0; i < w.rows(); ++i) {
      const int i2 = i + dr;
      if (i2 < 0 || i2 >= w.rows()) continue;
      for (int j = 0; j < w.cols(); ++j) {
        const int j2 = j + dc;
        if (j2 < 0 || j2 >= w.cols()) continue;
        const int a = w(i, j);
        const int b = w(i2, j2);
        if (a < 0 || b < 0) continue;  // pair touches an excluded pixel
        ++g.counts(a, b);
        if (cfg.symmetric) ++g.counts(b, a);
      }
    }
  }
  g.pairs = g.counts.sum();
  return g;
}

double homogeneity(const Glcm& g) {
  const Eigen::MatrixXd p = g.probabilities();
  double h = 0.0;
  for (int i = 0; i < p.rows(); ++i)
    for (int j = 0; j < p.cols(); ++j) h += p(i, j) / (1.0 + double(i - j) * double(i - j));
  return h;
}

Raster texture_band(const Raster& r, int band, const GlcmConfig& cfg, int threads) {
  validate_config(cfg);
  require(band >= 0 && band < r.bands(), "unknown_band", "band index out of range");

  const GridI levels = quantize(r, band, cfg.levels);
  Raster out(r.rows, r.cols, {r.band_names[band] + "_homogeneity"}, kDefaultNodata);
  auto plane = out.band(0);
  plane.setConstant(kDefaultNodata);

  const int half = cfg.window / 2;
  if (r.rows < cfg.window || r.cols < cfg.window) return out;  // no full window fits

  parallel_for(std::size_t(r.rows - 2 * half), threads, [&](std::size_t idx) {
    const int i = int(idx) + half;
    for (int j = half; j < r.cols - half; ++j) {
      const Glcm g =
          compute_glcm(levels.block(i - half, j - half, cfg.window, cfg.window), cfg);
      if (g.pairs == 0) continue;  // window entirely masked
      plane(i, j) = float(homogeneity(g));
    }
  });
  return out;
}

}  // namespace lulc::texture
