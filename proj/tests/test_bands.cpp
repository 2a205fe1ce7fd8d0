#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lulc/bands.hpp"
#include "lulc/raster.hpp"

using fixtures::error_category;
using lulc::Raster;

namespace {

Raster one_band(const std::string& name, std::vector<float> values,
                std::optional<float> nodata = std::nullopt) {
  Raster r(1, int(values.size()), {name}, nodata);
  for (int j = 0; j < int(values.size()); ++j) r.at(0, j, 0) = values[std::size_t(j)];
  return r;
}

}  // namespace

TEST_CASE("rdvi pins the renormalized-difference formula") {
  const Raster nir = one_band("nir", {0.5f, 0.8f});
  const Raster red = one_band("red", {0.1f, 0.3f});
  const Raster out = lulc::bands::rdvi(nir, red);
  CHECK(out.band_names == std::vector<std::string>{"rdvi"});
  // (0.5 - 0.1) / sqrt(0.6)
  CHECK(out.at(0, 0, 0) == doctest::Approx(0.5163978f).epsilon(1e-6));
  CHECK(out.at(0, 1, 0) == doctest::Approx((0.8 - 0.3) / std::sqrt(1.1)).epsilon(1e-6));
}

TEST_CASE("rdvi masks non-positive denominators instead of emitting inf") {
  const Raster nir = one_band("nir", {-0.5f, 0.2f, 0.0f});
  const Raster red = one_band("red", {0.2f, -0.2f, 0.0f});
  const Raster out = lulc::bands::rdvi(nir, red);
  REQUIRE(out.nodata.has_value());
  CHECK(out.at(0, 0, 0) == *out.nodata);  // sum -0.3
  CHECK(out.at(0, 1, 0) == *out.nodata);  // sum 0
  CHECK(out.at(0, 2, 0) == *out.nodata);  // sum 0
  for (float v : out.data) CHECK(std::isfinite(v));
}

TEST_CASE("nbr pins the normalized ratio and masks zero denominators") {
  const Raster nir = one_band("nir", {0.6f, 0.5f});
  const Raster swir = one_band("swir", {0.2f, -0.5f});
  const Raster out = lulc::bands::nbr(nir, swir);
  CHECK(out.band_names == std::vector<std::string>{"nbr"});
  CHECK(out.at(0, 0, 0) == doctest::Approx(0.5f));
  REQUIRE(out.nodata.has_value());
  CHECK(out.at(0, 1, 0) == *out.nodata);
}

TEST_CASE("sar_derived produces average, difference and masked ratio") {
  const Raster vv = one_band("vv", {6.0f, 2.0f, 4.0f});
  const Raster vh = one_band("vh", {2.0f, 0.0f, -4.0f});
  const Raster out = lulc::bands::sar_derived(vv, vh);
  CHECK(out.band_names ==
        std::vector<std::string>{"sar_average", "sar_difference", "sar_ratio"});
  CHECK(out.at(0, 0, 0) == 4.0f);
  CHECK(out.at(0, 0, 1) == 4.0f);
  CHECK(out.at(0, 0, 2) == 3.0f);
  REQUIRE(out.nodata.has_value());
  CHECK(out.at(0, 1, 2) == *out.nodata);  // vh == 0
  CHECK(out.at(0, 1, 0) == 1.0f);
  CHECK(out.at(0, 2, 2) == -1.0f);
}

TEST_CASE("input nodata and non-finite samples propagate to every derived band") {
  Raster vv = one_band("vv", {6.0f, -99.0f, 1.0f}, -99.0f);
  Raster vh = one_band("vh", {2.0f, 2.0f, 2.0f}, -99.0f);
  vh.at(0, 2, 0) = std::nanf("");
  const Raster out = lulc::bands::sar_derived(vv, vh);
  REQUIRE(out.nodata.has_value());
  for (int b = 0; b < 3; ++b) {
    CHECK(out.at(0, 1, b) == *out.nodata);
    CHECK(out.at(0, 2, b) == *out.nodata);
    CHECK(out.at(0, 0, b) != *out.nodata);
  }
}

TEST_CASE("derived-band operations reject shape and band-count mismatches") {
  const Raster a = one_band("a", {1.0f});
  Raster wide(1, 2, {"w"});
  wide.at(0, 0, 0) = wide.at(0, 1, 0) = 1.0f;
  CHECK(error_category([&] { lulc::bands::rdvi(a, wide); }) == "shape_mismatch");

  Raster two(1, 1, {"x", "y"});
  two.data = {1.0f, 2.0f};
  CHECK(!error_category([&] { lulc::bands::nbr(two, a); }).empty());
}
