#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lulc::accuracy {

// Square contingency table of hard classifications. Convention throughout:
// row i = predicted class, column j = reference class, so a(i,j) counts
// samples predicted i whose true class is j.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::vector<std::string> class_names;

  int k() const { return int(counts.rows()); }
  std::int64_t total() const { return counts.sum(); }
  Eigen::MatrixXd proportions() const;       // counts / total
  Eigen::VectorXd row_marginals() const;     // p_i+ (predicted)
  Eigen::VectorXd col_marginals() const;     // p_+j (reference)
};

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& reference,
                          int k, std::vector<std::string> class_names = {});

// Plain (non-chance-corrected) accuracies. Entries are empty when the
// defining marginal is zero; degenerate tables never yield silent zeros.
struct NaiveStats {
  double overall_accuracy = 0.0;
  std::vector<std::optional<double>> user_accuracy;        // C_i = a_ii / a_i+
  std::vector<std::optional<double>> user_accuracy_se;     // sqrt(C_i(1-C_i)/a_i+)
  std::vector<std::optional<double>> producer_accuracy;    // O_j = a_jj / a_+j
  std::vector<std::optional<double>> producer_accuracy_se;
};

NaiveStats naive_stats(const ConfusionMatrix& cm);

// Chance-corrected agreement. kappa is empty when theta2 == 1 (all mass on
// one class pair), per-class entries when their denominators vanish.
// Conditional (per-class) standard errors use the delta-method form with a
// leading 1/a factor; `half_factor_se` swaps that factor for the constant
// 1/2 some published accuracy tables carry, for side-by-side audits.
struct KappaStats {
  double theta1 = 0, theta2 = 0, theta3 = 0, theta4 = 0;
  std::optional<double> kappa;
  std::optional<double> kappa_se;
  std::vector<std::optional<double>> user_kappa;      // conditional on predicted class i
  std::vector<std::optional<double>> user_kappa_se;
  std::vector<std::optional<double>> producer_kappa;  // conditional on reference class j
  std::vector<std::optional<double>> producer_kappa_se;
};

KappaStats kappa_stats(const ConfusionMatrix& cm, bool half_factor_se = false);

// One-tailed comparison of two kappa estimates at the 95% level.
struct ZTest {
  double z = 0.0;
  double critical = 1.645;
  bool first_better = false;  // z > critical
};

// Errors when both standard errors are zero (no sampling variance to test).
ZTest z_test(double kappa1, double se1, double kappa2, double se2);

// One tuning-table row: a swept parameter value (tree count, forest count)
// with its mean kappa and mean kappa standard error across repetitions.
struct TuneRow {
  int param = 0;
  double mean_kappa = 0.0;
  double mean_se = 0.0;
};

struct TuneResult {
  std::vector<TuneRow> rows;
  int selected = 0;  // param value of the chosen configuration
};

// Picks the sweep winner by the Z statistic of each row against the first
// (baseline) row: argmax Z, ties to the smaller param, baseline when no row
// beats it. Zero joint variance is resolved by the kappa difference sign
// instead of calling z_test (which rejects that input).
int select_optimum(const std::vector<TuneRow>& rows);

}  // namespace lulc::accuracy
