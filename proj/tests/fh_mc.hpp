#pragma once

// Monte Carlo studies of the area-level model shared by the property suite
// and the acceptance runner: generate from the model with known variance
// components, fit by REML, and summarize prediction error.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "sae/fay_herriot.hpp"
#include "sae/rng.hpp"

namespace sae::test {

struct FhGenerative {
  sae::AreaDesign design;  // X and sigma2 fixed; gamma_hat refilled per draw
  Eigen::VectorXd beta;
  double sigma2_u = 1.0;
};

inline FhGenerative make_fh_generative(int D, std::uint64_t seed) {
  std::mt19937_64 rng = sae::substream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uvar(0.5, 2.0);
  FhGenerative g;
  g.design.X.resize(D, 2);
  g.design.X.col(0).setOnes();
  for (int d = 0; d < D; ++d) g.design.X(d, 1) = normal(rng);
  g.design.sigma2.resize(D);
  for (int d = 0; d < D; ++d) g.design.sigma2[d] = uvar(rng);
  g.design.gamma_hat = Eigen::VectorXd::Zero(D);
  g.beta.resize(2);
  g.beta << 10.0, 2.0;
  g.sigma2_u = 1.0;
  return g;
}

struct UnbiasednessResult {
  int domains = 0;
  int within_two_se = 0;
  double fraction() const { return static_cast<double>(within_two_se) / domains; }
};

inline UnbiasednessResult run_eblup_unbiasedness(int D, int R, std::uint64_t seed) {
  FhGenerative g = make_fh_generative(D, seed);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(D);
  Eigen::MatrixXd diffs(R, D);
  for (int r = 0; r < R; ++r) {
    std::mt19937_64 rng = sae::substream(seed, 1000 + r);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd gamma(D);
    for (int d = 0; d < D; ++d)
      gamma[d] = g.design.X.row(d).dot(g.beta) + std::sqrt(g.sigma2_u) * normal(rng);
    for (int d = 0; d < D; ++d)
      g.design.gamma_hat[d] = gamma[d] + std::sqrt(g.design.sigma2[d]) * normal(rng);
    sae::FHFit fit = sae::fit_fh(g.design, sae::VarianceMethod::REML);
    diffs.row(r) = (fit.eblup - gamma).transpose();
  }
  UnbiasednessResult out;
  out.domains = D;
  for (int d = 0; d < D; ++d) {
    double m = diffs.col(d).mean();
    double sd = std::sqrt((diffs.col(d).array() - m).square().sum() / (R - 1.0));
    if (std::abs(m) <= 2.0 * sd / std::sqrt(static_cast<double>(R))) ++out.within_two_se;
  }
  return out;
}

struct MseCalibrationResult {
  double avg_rel_gap = 0.0;  // mean over domains of |empirical - mean estimated| / empirical
};

inline MseCalibrationResult run_mse_calibration(int D, int R, std::uint64_t seed) {
  FhGenerative g = make_fh_generative(D, seed);
  Eigen::VectorXd sq_err = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd est_mse = Eigen::VectorXd::Zero(D);
  for (int r = 0; r < R; ++r) {
    std::mt19937_64 rng = sae::substream(seed, 5000 + r);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd gamma(D);
    for (int d = 0; d < D; ++d)
      gamma[d] = g.design.X.row(d).dot(g.beta) + std::sqrt(g.sigma2_u) * normal(rng);
    for (int d = 0; d < D; ++d)
      g.design.gamma_hat[d] = gamma[d] + std::sqrt(g.design.sigma2[d]) * normal(rng);
    sae::FHFit fit = sae::fit_fh(g.design, sae::VarianceMethod::REML);
    sq_err += (fit.eblup - gamma).array().square().matrix();
    est_mse += fit.mse;
  }
  sq_err /= R;
  est_mse /= R;
  MseCalibrationResult out;
  for (int d = 0; d < D; ++d)
    out.avg_rel_gap += std::abs(sq_err[d] - est_mse[d]) / sq_err[d];
  out.avg_rel_gap /= D;
  return out;
}

}  // namespace sae::test
