#include "sae/survey.hpp"

namespace sae {

namespace {

double hajek_mean(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  return (weights.array() * values.array()).sum() / weights.sum();
}

// Weighted analogue of the n-1 sample variance of the residuals `e`.
double weighted_s2(const Eigen::VectorXd& e, const Eigen::VectorXd& weights, double dof) {
  double mean = hajek_mean(e, weights);
  double ss = (weights.array() * (e.array() - mean).square()).sum() / weights.sum();
  return ss * static_cast<double>(e.size()) / dof;
}

}  // namespace

EstimateVar ht_mean(const SampleDomain& dom) {
  dom.validate();
  if (dom.n_d() < 2) throw SingletonDomain(dom.domain);
  EstimateVar out;
  out.estimate = hajek_mean(dom.values, dom.weights);
  double s2 = weighted_s2(dom.values, dom.weights, dom.n_d() - 1.0);
  out.variance = (1.0 - dom.sampling_fraction()) * s2 / dom.n_d();
  return out;
}

EstimateVar greg_mean(const SampleDomain& dom) {
  dom.validate();
  if (dom.n_d() < 2) throw SingletonDomain(dom.domain);
  const auto n = dom.values.size();
  const auto k = dom.aux_pop_means.size();
  if (k == 0) throw ValidationError("calibration requires auxiliary variables");

  // Weighted regression of y on [1, aux]; the intercept makes residuals
  // weight-orthogonal to the calibration constraint.
  Eigen::MatrixXd Z(n, k + 1);
  Z.col(0).setOnes();
  Z.rightCols(k) = dom.aux_sample;
  Eigen::VectorXd sw = dom.weights.cwiseSqrt();
  Eigen::MatrixXd Zw = sw.asDiagonal() * Z;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Zw);
  qr.setThreshold(1e-10);
  if (qr.rank() < Z.cols())
    throw SingularAux("auxiliary matrix is rank deficient (constant or collinear column)");
  Eigen::VectorXd b = qr.solve(sw.asDiagonal() * dom.values);

  double ht = hajek_mean(dom.values, dom.weights);
  Eigen::VectorXd aux_ht(k);
  for (Eigen::Index c = 0; c < k; ++c) aux_ht[c] = hajek_mean(dom.aux_sample.col(c), dom.weights);

  EstimateVar out;
  out.estimate = ht + (dom.aux_pop_means - aux_ht).dot(b.tail(k));
  Eigen::VectorXd resid = dom.values - Z * b;
  double s2e = weighted_s2(resid, dom.weights, static_cast<double>(n));
  out.variance = (1.0 - dom.sampling_fraction()) * s2e / dom.n_d();
  return out;
}

EstimateVar composite_of(const EstimateVar& direct, int n_d, double synthetic, double n_bar) {
  if (n_d < 1) throw EmptyDomain(0);
  double phi = n_d / (n_d + n_bar);
  EstimateVar out;
  out.estimate = phi * direct.estimate + (1.0 - phi) * synthetic;
  out.variance = phi * phi * direct.variance;
  return out;
}

EstimateVar composite_mean(const SampleDomain& dom, double synthetic, double n_bar) {
  dom.validate();
  if (dom.n_d() < 1) throw EmptyDomain(dom.domain);
  return composite_of(ht_mean(dom), dom.n_d(), synthetic, n_bar);
}

}  // namespace sae
