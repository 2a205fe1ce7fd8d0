#include "lulc/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lulc/error.hpp"

namespace lulc::accuracy {

Eigen::MatrixXd ConfusionMatrix::proportions() const {
  const std::int64_t a = total();
  require(a > 0, "empty_matrix", "confusion matrix has no samples");
  return counts.cast<double>() / double(a);
}

Eigen::VectorXd ConfusionMatrix::row_marginals() const {
  return proportions().rowwise().sum();
}

Eigen::VectorXd ConfusionMatrix::col_marginals() const {
  return proportions().colwise().sum().transpose();
}

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& reference,
                          int k, std::vector<std::string> class_names) {
  require(k >= 1, "bad_classes", "confusion needs k >= 1");
  require(predicted.size() == reference.size(), "length_mismatch",
          "predicted and reference label counts differ");
  require(!predicted.empty(), "empty_input", "confusion needs at least one sample");
  if (class_names.empty())
    for (int c = 0; c < k; ++c) class_names.push_back("class_" + std::to_string(c));
  require(int(class_names.size()) == k, "length_mismatch",
          "class name count does not match k");

  ConfusionMatrix cm;
  cm.counts.setZero(k, k);
  cm.class_names = std::move(class_names);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i];
    const int r = reference[i];
    require(p >= 0 && p < k, "bad_label", "predicted label outside [0, k)");
    require(r >= 0 && r < k, "bad_label", "reference label outside [0, k)");
    ++cm.counts(p, r);
  }
  return cm;
}

NaiveStats naive_stats(const ConfusionMatrix& cm) {
  const std::int64_t a = cm.total();
  require(a > 0, "empty_matrix", "confusion matrix has no samples");
  const int k = cm.k();
  NaiveStats s;
  s.overall_accuracy = double(cm.counts.diagonal().sum()) / double(a);
  s.user_accuracy.resize(k);
  s.user_accuracy_se.resize(k);
  s.producer_accuracy.resize(k);
  s.producer_accuracy_se.resize(k);
  for (int i = 0; i < k; ++i) {
    const double row = double(cm.counts.row(i).sum());
    const double col = double(cm.counts.col(i).sum());
    const double diag = double(cm.counts(i, i));
    if (row > 0) {
      const double c = diag / row;
      s.user_accuracy[i] = c;
      s.user_accuracy_se[i] = std::sqrt(c * (1.0 - c) / row);
    }
    if (col > 0) {
      const double o = diag / col;
      s.producer_accuracy[i] = o;
      s.producer_accuracy_se[i] = std::sqrt(o * (1.0 - o) / col);
    }
  }
  return s;
}

namespace {

// Conditional kappa for the classes a classifier labeled i (row-conditional)
// on proportion matrix p. The column-conditional (producer) numbers are the
// same formulas on the transpose. se_factor is 1/a normally, 1/2 in the
// literal audit mode.
void conditional_kappa(const Eigen::MatrixXd& p, double se_factor,
                       std::vector<std::optional<double>>& kappa,
                       std::vector<std::optional<double>>& se) {
  const int k = int(p.rows());
  kappa.assign(k, std::nullopt);
  se.assign(k, std::nullopt);
  const Eigen::VectorXd row = p.rowwise().sum();
  const Eigen::VectorXd col = p.colwise().sum().transpose();
  for (int i = 0; i < k; ++i) {
    const double pii = p(i, i);
    const double pi = row(i);
    const double qi = col(i);
    const double denom = pi - pi * qi;  // pi * (1 - qi)
    if (denom <= 0.0) continue;         // pi == 0 or qi == 1: undefined
    kappa[i] = (pii - pi * qi) / denom;
    const double var = se_factor * ((pi - pii) / (pi * pi * pi * std::pow(1.0 - qi, 3))) *
                       ((pi - pii) * (pi * qi - pii) + pii * (1.0 - pi - qi + pii));
    se[i] = std::sqrt(std::max(var, 0.0));
  }
}

}  // namespace

KappaStats kappa_stats(const ConfusionMatrix& cm, bool half_factor_se) {
  const std::int64_t a = cm.total();
  require(a > 0, "empty_matrix", "confusion matrix has no samples");
  const Eigen::MatrixXd p = cm.proportions();
  const int k = cm.k();
  const Eigen::VectorXd row = p.rowwise().sum();
  const Eigen::VectorXd col = p.colwise().sum().transpose();

  KappaStats s;
  s.theta1 = p.diagonal().sum();
  s.theta2 = row.dot(col);
  for (int i = 0; i < k; ++i) s.theta3 += p(i, i) * (row(i) + col(i));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double m = row(j) + col(i);
      s.theta4 += p(i, j) * m * m;
    }

  if (s.theta2 < 1.0) {
    const double t1 = s.theta1, t2 = s.theta2, t3 = s.theta3, t4 = s.theta4;
    const double om = 1.0 - t2;
    s.kappa = (t1 - t2) / om;
    const double var =
        (1.0 / double(a)) *
        (t1 * (1.0 - t1) / (om * om) +
         2.0 * (1.0 - t1) * (2.0 * t1 * t2 - t3) / (om * om * om) +
         (1.0 - t1) * (1.0 - t1) * (t4 - 4.0 * t2 * t2) / (om * om * om * om));
    s.kappa_se = std::sqrt(std::max(var, 0.0));
  }

  const double se_factor = half_factor_se ? 0.5 : 1.0 / double(a);
  conditional_kappa(p, se_factor, s.user_kappa, s.user_kappa_se);
  conditional_kappa(p.transpose(), se_factor, s.producer_kappa, s.producer_kappa_se);
  return s;
}

ZTest z_test(double kappa1, double se1, double kappa2, double se2) {
  const double joint = se1 * se1 + se2 * se2;
  require(joint > 0.0, "zero_variance",
          "z_test needs a positive joint variance; both standard errors are zero");
  ZTest t;
  t.z = (kappa1 - kappa2) / std::sqrt(joint);
  t.first_better = t.z > t.critical;
  return t;
}

int select_optimum(const std::vector<TuneRow>& rows) {
  require(!rows.empty(), "empty_input", "select_optimum needs at least one row");
  if (rows.size() == 1) return rows[0].param;
  const TuneRow& base = rows[0];
  int best_param = base.param;
  double best_z = 0.0;  // anything with Z <= 0 never dethrones the baseline
  bool found = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const TuneRow& r = rows[i];
    const double joint = r.mean_se * r.mean_se + base.mean_se * base.mean_se;
    double z;
    if (joint > 0.0) {
      z = (r.mean_kappa - base.mean_kappa) / std::sqrt(joint);
    } else {
      // No sampling variance on either side: the kappa difference alone
      // decides, mapped onto the Z axis as +/- infinity.
      const double d = r.mean_kappa - base.mean_kappa;
      z = d > 0   ? std::numeric_limits<double>::infinity()
          : d < 0 ? -std::numeric_limits<double>::infinity()
                  : 0.0;
    }
    if (z <= 0.0) continue;
    if (!found || z > best_z || (z == best_z && r.param < best_param)) {
      best_z = z;
      best_param = r.param;
      found = true;
    }
  }
  return best_param;
}

}  // namespace lulc::accuracy
