#include "lulc/bands.hpp"

#include <cmath>

#include "lulc/error.hpp"

namespace lulc::bands {

namespace {

void check_pair(const Raster& a, const Raster& b, const char* op) {
  a.validate();
  b.validate();
  require(a.bands() == 1 && b.bands() == 1, "bad_shape",
          std::string(op) + " expects single-band inputs");
  require(a.rows == b.rows && a.cols == b.cols, "shape_mismatch",
          std::string(op) + " inputs must share dimensions");
}

bool usable(const Raster& r, float v) { return std::isfinite(v) && !r.is_nodata(v); }

}  // namespace

Raster sar_derived(const Raster& vv, const Raster& vh) {
  check_pair(vv, vh, "sar_derived");
  Raster out(vv.rows, vv.cols, {"sar_average", "sar_difference", "sar_ratio"}, kDefaultNodata);
  for (int i = 0; i < vv.rows; ++i)
    for (int j = 0; j < vv.cols; ++j) {
      const float a = vv.at(i, j, 0);
      const float b = vh.at(i, j, 0);
      if (!usable(vv, a) || !usable(vh, b)) {
        out.at(i, j, 0) = out.at(i, j, 1) = out.at(i, j, 2) = kDefaultNodata;
        continue;
      }
      out.at(i, j, 0) = 0.5f * (a + b);
      out.at(i, j, 1) = a - b;
      out.at(i, j, 2) = b == 0.0f ? kDefaultNodata : a / b;
    }
  return out;
}

Raster rdvi(const Raster& nir, const Raster& red) {
  check_pair(nir, red, "rdvi");
  Raster out(nir.rows, nir.cols, {"rdvi"}, kDefaultNodata);
  for (int i = 0; i < nir.rows; ++i)
    for (int j = 0; j < nir.cols; ++j) {
      const float n = nir.at(i, j, 0);
      const float r = red.at(i, j, 0);
      if (!usable(nir, n) || !usable(red, r) || double(n) + double(r) <= 0.0) {
        out.at(i, j, 0) = kDefaultNodata;
        continue;
      }
      out.at(i, j, 0) = float((double(n) - double(r)) / std::sqrt(double(n) + double(r)));
    }
  return out;
}

Raster nbr(const Raster& nir, const Raster& swir) {
  check_pair(nir, swir, "nbr");
  Raster out(nir.rows, nir.cols, {"nbr"}, kDefaultNodata);
  for (int i = 0; i < nir.rows; ++i)
    for (int j = 0; j < nir.cols; ++j) {
      const float n = nir.at(i, j, 0);
      const float s = swir.at(i, j, 0);
      if (!usable(nir, n) || !usable(swir, s) || double(n) + double(s) == 0.0) {
        out.at(i, j, 0) = kDefaultNodata;
        continue;
      }
      out.at(i, j, 0) = float((double(n) - double(s)) / (double(n) + double(s)));
    }
  return out;
}

}  // namespace lulc::bands
