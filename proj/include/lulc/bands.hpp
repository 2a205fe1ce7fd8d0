#pragma once

#include "lulc/raster.hpp"

namespace lulc::bands {

// Derived-band arithmetic over single-band rasters of equal shape. A pixel
// where any input is nodata or non-finite, or where the operation's
// denominator vanishes, becomes nodata in the output instead of +-inf/NaN,
// so stacked feature sets stay finite. Outputs use kDefaultNodata.

// Dual-pol radar composite: bands "sar_average" = (vv+vh)/2,
// "sar_difference" = vv-vh, "sar_ratio" = vv/vh (nodata where vh == 0).
Raster sar_derived(const Raster& vv, const Raster& vh);

// Renormalized difference vegetation index (nir-red)/sqrt(nir+red); pixels
// with nir+red <= 0 become nodata. Band "rdvi".
Raster rdvi(const Raster& nir, const Raster& red);

// Normalized burn ratio (nir-swir)/(nir+swir); zero denominators become
// nodata. Band "nbr".
Raster nbr(const Raster& nir, const Raster& swir);

}  // namespace lulc::bands
