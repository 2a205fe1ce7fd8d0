#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "lulc/fusion.hpp"
#include "lulc/raster.hpp"
#include "lulc/rng.hpp"

using fixtures::error_category;
using lulc::Raster;
using namespace lulc::fusion;

namespace {

// Textbook oracle: evaluate the stationary-solution formula per pixel with
// two explicit inversions and no algebraic simplification. Anything either
// production kernel computes must match this.
Eigen::VectorXd oracle_pixel(const FusionModel& m, const Eigen::VectorXd& y, double ys) {
  const double wm = 2.0 * (1.0 - m.w);
  const double wa = 2.0 * m.w / m.sigma_s2;
  const Eigen::MatrixXd sm_inv = m.sigma_m.inverse();
  const Eigen::MatrixXd sw_inv = wm * sm_inv + wa * m.beta * m.beta.transpose();
  const Eigen::MatrixXd sw = sw_inv.inverse();
  return sw * (wm * (sm_inv * y) + wa * (ys - m.alpha) * m.beta);
}

FusionModel random_model(int n, double w, lulc::Rng& rng) {
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n * n; ++i) b.data()[i] = lulc::normal(rng);
  Eigen::MatrixXd sigma_m = b * b.transpose() + 0.4 * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd beta(n);
  for (int i = 0; i < n; ++i) beta(i) = lulc::normal(rng);
  const double alpha = lulc::normal(rng);
  const double sigma_s2 = 0.3 + lulc::uniform01(rng);
  return FusionModel::from_parameters(alpha, beta, sigma_s2, sigma_m, w);
}

}  // namespace

TEST_CASE("one-band closed form: equal variances at w=1/2 average the midpoint") {
  // n=1, Sigma_M=[1], sigma_s^2=1, beta=[1], alpha=0, w=1/2: the operator
  // reduces to mu = (y + y_s) / 2, so (2, 4) fuses to 3.
  const FusionModel m = FusionModel::from_parameters(
      0.0, Eigen::VectorXd::Ones(1), 1.0, Eigen::MatrixXd::Identity(1, 1), 0.5);
  CHECK(m.a(0, 0) == doctest::Approx(0.5));
  CHECK(m.c(0) == doctest::Approx(0.5));
  Eigen::VectorXd y(1);
  y << 2.0;
  CHECK(oracle_pixel(m, y, 4.0)(0) == doctest::Approx(3.0));

  Raster ms(1, 1, {"b"});
  ms.at(0, 0, 0) = 2.0f;
  Raster aux(1, 1, {"s"});
  aux.at(0, 0, 0) = 4.0f;
  CHECK(fuse_fast(m, ms, aux).at(0, 0, 0) == doctest::Approx(3.0f));
  CHECK(fuse_reference(m, ms, aux).at(0, 0, 0) == doctest::Approx(3.0f));
}

TEST_CASE("precomputed operator satisfies A + c beta^T = I") {
  lulc::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + int(lulc::bounded(rng, 8));
    const double w = lulc::uniform01(rng) * 0.95;
    const FusionModel m = random_model(n, w, rng);
    const Eigen::MatrixXd residual =
        m.a + m.c * m.beta.transpose() - Eigen::MatrixXd::Identity(n, n);
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("w = 0 yields the exact identity: output reproduces the input") {
  lulc::Rng rng(7);
  const FusionModel m = random_model(4, 0.0, rng);
  CHECK((m.a == Eigen::MatrixXd::Identity(4, 4)));
  CHECK((m.c == Eigen::VectorXd::Zero(4)));

  auto [ms, aux] = make_correlated_stack(6, 5, 4, 99);
  const Raster fused = fuse_fast(m, ms, aux);
  CHECK(fused.data == ms.data);
}

TEST_CASE("both kernels match the per-pixel textbook oracle") {
  lulc::Rng rng(123);
  for (const int n : {1, 2, 5}) {
    const FusionModel m = random_model(n, 0.6, rng);
    auto [ms, aux] = make_correlated_stack(4, 7, n, std::uint64_t(1000 + n));

    const Raster fast = fuse_fast(m, ms, aux);
    const Raster ref = fuse_reference(m, ms, aux);
    const std::size_t plane = ms.plane();
    for (std::size_t p = 0; p < plane; ++p) {
      Eigen::VectorXd y(n);
      for (int b = 0; b < n; ++b) y(b) = double(ms.data[plane * std::size_t(b) + p]);
      const Eigen::VectorXd want = oracle_pixel(m, y, double(aux.data[p]));
      for (int b = 0; b < n; ++b) {
        CHECK(double(fast.data[plane * std::size_t(b) + p]) ==
              doctest::Approx(want(b)).epsilon(1e-5));
        CHECK(double(ref.data[plane * std::size_t(b) + p]) ==
              doctest::Approx(want(b)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("kernels agree with each other and preserve nodata pixels") {
  auto [ms, aux] = make_correlated_stack(9, 8, 3, 5);
  ms.nodata = -777.0f;
  ms.at(2, 3, 1) = -777.0f;
  aux.nodata = -888.0f;
  aux.at(5, 5, 0) = -888.0f;
  ms.at(7, 1, 0) = std::nanf("");

  const FusionModel m = fit_fusion(ms, aux, 0.6);
  const Raster fast = fuse_fast(m, ms, aux);
  const Raster ref = fuse_reference(m, ms, aux);

  REQUIRE(fast.nodata.has_value());
  for (std::size_t i = 0; i < fast.data.size(); ++i)
    CHECK(double(fast.data[i]) == doctest::Approx(double(ref.data[i])).epsilon(1e-5));
  for (int b = 0; b < 3; ++b) {
    CHECK(fast.at(2, 3, b) == *fast.nodata);
    CHECK(fast.at(5, 5, b) == *fast.nodata);
    CHECK(fast.at(7, 1, b) == *fast.nodata);
  }
  CHECK(fast.at(0, 0, 0) != *fast.nodata);
}

TEST_CASE("fit_fusion recovers a planted linear relation") {
  // aux = 1.5 + 2 b0 - 0.5 b1 + noise(0.1); the regression must land close.
  lulc::Rng rng(2);
  Raster ms(40, 40, {"b0", "b1"});
  Raster aux(40, 40, {"s"});
  const std::size_t plane = ms.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    const double b0 = lulc::normal(rng), b1 = lulc::normal(rng);
    ms.data[p] = float(b0);
    ms.data[plane + p] = float(b1);
    aux.data[p] = float(1.5 + 2.0 * b0 - 0.5 * b1 + 0.1 * lulc::normal(rng));
  }
  const FusionModel m = fit_fusion(ms, aux, 0.6);
  CHECK(m.alpha == doctest::Approx(1.5).epsilon(0.02));
  CHECK(m.beta(0) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(m.beta(1) == doctest::Approx(-0.5).epsilon(0.05));
  CHECK(m.sigma_s2 == doctest::Approx(0.01).epsilon(0.15));
  CHECK(m.w == 0.6);
}

TEST_CASE("fit_fusion validates its inputs") {
  auto [ms, aux] = make_correlated_stack(5, 5, 2, 3);
  CHECK(error_category([&] { fit_fusion(ms, aux, 1.0); }) == "bad_weight");
  CHECK(error_category([&] { fit_fusion(ms, aux, -0.1); }) == "bad_weight");

  Raster flat = aux;
  for (float& v : flat.data) v = 5.0f;
  CHECK(error_category([&] { fit_fusion(ms, flat, 0.5); }) == "degenerate_regression");

  Raster wrong(4, 5, {"s"});
  for (float& v : wrong.data) v = 1.0f;
  CHECK(error_category([&] { fit_fusion(ms, wrong, 0.5); }) == "shape_mismatch");

  auto [tiny_ms, tiny_aux] = make_correlated_stack(1, 3, 2, 4);
  CHECK(error_category([&] { fit_fusion(tiny_ms, tiny_aux, 0.5); }) == "insufficient_samples");
}

TEST_CASE("fuse kernels reject band-count mismatches") {
  auto [ms, aux] = make_correlated_stack(5, 5, 3, 8);
  lulc::Rng rng(9);
  const FusionModel m = random_model(2, 0.5, rng);
  CHECK(error_category([&] { fuse_fast(m, ms, aux); }) == "shape_mismatch");
  CHECK(error_category([&] { fuse_reference(m, ms, aux); }) == "shape_mismatch");
}

TEST_CASE("make_correlated_stack is seed-deterministic with correlated aux") {
  auto [ms1, aux1] = make_correlated_stack(10, 10, 3, 42);
  auto [ms2, aux2] = make_correlated_stack(10, 10, 3, 42);
  CHECK(ms1.data == ms2.data);
  CHECK(aux1.data == aux2.data);

  auto [ms3, aux3] = make_correlated_stack(10, 10, 3, 43);
  CHECK(ms1.data != ms3.data);
}

TEST_CASE("bench_fusion reports positive times and consistent factors") {
  const auto rows = bench_fusion({8, 12}, {2}, 0.6, 2);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.bands == 2);
    CHECK(r.w == 0.6);
    CHECK(r.repetitions == 2);
    CHECK(r.t_reference_s > 0.0);
    CHECK(r.t_fast_s > 0.0);
    CHECK(r.increment_factor == doctest::Approx(r.t_reference_s / r.t_fast_s));
  }
  CHECK(rows[0].size == 8);
  CHECK(rows[1].size == 12);

  CHECK(error_category([] { bench_fusion({}, {2}, 0.5, 3); }) == "empty_input");
  CHECK(error_category([] { bench_fusion({16}, {2}, 0.5, 0); }) == "bad_config");
  CHECK(error_category([] { bench_fusion({4}, {2}, 0.5, 3); }) == "bad_config");
}
