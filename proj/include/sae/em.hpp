#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sae/item_model.hpp"
#include "sae/latent_regression.hpp"
#include "sae/response_data.hpp"

namespace sae {

// Gauss-Hermite rule rewritten for integrals against the standard normal:
// integral f(t) phi(t) dt ~= sum_k weight[k] * f(node[k]).
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  static GaussHermite standard_normal(int points);
};

struct EmConfig {
  int quadrature_points = 41;
  double tol = 1e-5;  // absolute change of the marginal log likelihood
  int max_iter = 500;
  double item_scale = 1.7;
  bool estimate_guessing = false;  // default is the 2PL form, c = 0
  // Beta-style penalty keeping a free guessing parameter near 0.2.
  double guessing_penalty_alpha = 5.0;
  double guessing_penalty_beta = 17.0;
  double latreg_tol = 1e-9;
  int latreg_max_iter = 1000;
};

struct EmResult {
  ItemBank bank;
  LatentRegression latreg;
  std::vector<double> loglik_items;   // one entry per item-calibration sweep
  std::vector<double> loglik_latreg;  // one entry per conditioning sweep
  bool converged_items = false;
  bool converged_latreg = false;
};

// Marginal-maximum-likelihood calibration. Item parameters are estimated
// against a standard normal ability scale (which fixes location and scale of
// the latent metric); the conditioning model (gamma, sigma2) is then fitted
// with the items held fixed. Both sweeps are EM with the same fixed
// quadrature grid, so their log likelihood traces are non-decreasing.
// `covariates` may be empty, in which case an intercept-only model is used.
EmResult calibrate_em(const ResponseMatrix& responses, const Eigen::MatrixXd& covariates,
                      const EmConfig& config = {});

}  // namespace sae
