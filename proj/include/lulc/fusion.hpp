#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "lulc/raster.hpp"

namespace lulc::fusion {

// Per-pixel weighted blend of a multispectral pixel vector y and one
// auxiliary sample y_s, derived from the stationary solution of
//
//   Sigma_w^-1 = 2(1-w) Sigma_M^-1 + (2w / sigma_s^2) beta beta^T
//   mu = Sigma_w (2(1-w) Sigma_M^-1 y + (2w / sigma_s^2)(y_s - alpha) beta)
//
// where the auxiliary band is modeled as alpha + y^T beta + noise. Because
// every factor except (y, y_s) is pixel-invariant, mu collapses to the
// affine map mu = A y + (y_s - alpha) c with
//
//   A = (I + w / ((1-w) sigma_s^2) * Sigma_M beta beta^T)^-1
//   c = w / ((1-w) sigma_s^2) * A Sigma_M beta
//
// which needs a single n x n inversion at fit time and satisfies
// A + c beta^T = I (checked to 1e-8 when the model is built). w = 0 gives
// A = I, c = 0 exactly: the output reproduces the multispectral input.
struct FusionModel {
  int n = 0;            // multispectral band count
  double alpha = 0.0;   // regression intercept of aux on the bands
  Eigen::VectorXd beta; // regression slopes
  double sigma_s2 = 0.0;
  double w = 0.0;       // auxiliary weight in [0, 1)
  Eigen::MatrixXd sigma_m;  // band covariance (after any ridge repair)
  Eigen::MatrixXd a;    // precomputed fast operator
  Eigen::VectorXd c;

  // Builds the operator from explicit parameters (used directly by tests and
  // by fit_fusion). Validates shapes, w in [0,1), sigma_s2 > 0, and the
  // A + c beta^T identity.
  static FusionModel from_parameters(double alpha, Eigen::VectorXd beta, double sigma_s2,
                                     Eigen::MatrixXd sigma_m, double w);
};

// Fits alpha/beta by OLS of the auxiliary band on the multispectral bands
// over pixels where every input is finite and non-nodata (needs n + 2 of
// them), sets sigma_s2 to the mean squared residual (floored at
// 1e-12 * var(aux)), and takes Sigma_M as the sample covariance of the
// multispectral pixels with an eps * I ridge (eps = 1e-8 * trace / n) when
// the covariance is numerically singular. A constant auxiliary band has no
// regression and is rejected.
FusionModel fit_fusion(const Raster& ms, const Raster& aux, double w);

// Timing baseline. Computes mu per pixel from scratch: re-inverts Sigma_M,
// forms and inverts Sigma_w^-1, and appends each pixel's result to a buffer
// grown by reallocate-and-copy. Output values match fuse_fast; only the
// cost profile is deliberately naive.
Raster fuse_reference(const FusionModel& model, const Raster& ms, const Raster& aux);

// Production kernel. A is a rank-one update of the identity
// (A = I - c beta^T follows from the fit-time identity), so the whole map
// reduces to mu = y + (y_s - alpha - beta^T y) c: one dot product and one
// scaled add per pixel, no per-pixel matrices at all. Pixels with
// nodata/non-finite input become nodata.
Raster fuse_fast(const FusionModel& model, const Raster& ms, const Raster& aux);

struct BenchRow {
  int size = 0;   // image edge length
  int bands = 0;  // multispectral band count
  double w = 0.0;
  int repetitions = 0;        // timed fast-kernel runs
  double t_reference_s = 0.0; // seconds for the single timed reference run
  double t_fast_s = 0.0;      // mean seconds over `repetitions` fast runs
  double increment_factor = 0.0;  // t_reference_s / t_fast_s
};

// Times both kernels on synthetic correlated stacks, one configuration at a
// time (full cross product of sizes x band_counts). The reference kernel is
// timed over a single run: one run already takes seconds at the sizes worth
// benchmarking, so repetition buys nothing but wall-clock. The fast kernel
// is sub-millisecond and gets one discarded warm-up run plus the mean over
// `repetitions` timed runs. The reference and warm-up outputs must agree to
// 1e-5 or the bench aborts.
std::vector<BenchRow> bench_fusion(const std::vector<int>& sizes,
                                   const std::vector<int>& band_counts, double w,
                                   int repetitions);

// Synthesizes a correlated multispectral stack plus an auxiliary band that
// is a noisy linear function of it (deterministic in the seed).
std::pair<Raster, Raster> make_correlated_stack(int rows, int cols, int bands,
                                                std::uint64_t seed);

}  // namespace lulc::fusion
