#pragma once

#include <Eigen/Dense>
#include <string>

#include "sae/errors.hpp"

namespace sae {

enum class VarianceMethod { PrasadRao, ML, REML };

std::string to_string(VarianceMethod method);
VarianceMethod variance_method_from_string(const std::string& name);

// Area-level data for the model gamma_hat_d = x_d' beta + u_d + e_d, with
// known sampling variances sigma2_d and u_d ~ (0, sigma2_u).
struct AreaDesign {
  Eigen::MatrixXd X;          // D x p, first column the intercept
  Eigen::VectorXd gamma_hat;  // D
  Eigen::VectorXd sigma2;     // D, all > 0

  Eigen::Index D() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  void validate() const;
};

struct Sigma2uEstimate {
  double sigma2_u = 0.0;
  double var_sigma2_u = 0.0;
  int iterations = 0;
};

struct BlupResult {
  Eigen::VectorXd eblup;  // (1 - B_d) gamma_hat_d + B_d x_d' beta
  Eigen::VectorXd B;      // sigma2_d / (sigma2_u + sigma2_d)
  Eigen::VectorXd u_hat;  // (1 - B_d) (gamma_hat_d - x_d' beta)
};

struct MseComponents {
  Eigen::VectorXd g1;  // sigma2_u sigma2_d / (sigma2_u + sigma2_d)
  Eigen::VectorXd g2;  // B_d^2 x_d' F^{-1} x_d
  Eigen::VectorXd g3;  // sigma2_d^2 (sigma2_u + sigma2_d)^{-3} Var(sigma2_u_hat)
};

struct FHFit {
  VarianceMethod method = VarianceMethod::REML;
  Eigen::VectorXd beta;
  double sigma2_u = 0.0;
  double var_sigma2_u = 0.0;
  Eigen::VectorXd B;
  Eigen::VectorXd u_hat;
  Eigen::VectorXd eblup;
  Eigen::VectorXd g1, g2, g3;
  Eigen::VectorXd mse;
  Eigen::VectorXd synthetic;  // x_d' beta
  int iterations = 0;
};

struct QualityMeasures {
  Eigen::VectorXd eer_pct;      // sqrt(mse) / eblup * 100
  Eigen::VectorXd dif_rel_pct;  // (sigma2_d - mse) / sigma2_d * 100
};

// Generalized least squares coefficients with V = diag(sigma2_u + sigma2_d).
Eigen::VectorXd gls_beta(const AreaDesign& design, double sigma2_u);

// Variance-component estimate plus the model-based Var(sigma2_u_hat) for the
// chosen method. Prasad-Rao is a closed-form moment estimator; ML and REML
// run Fisher scoring (tolerance 1e-8, at most `max_iter` steps) and clamp the
// estimate at zero.
Sigma2uEstimate estimate_sigma2_u(const AreaDesign& design, VarianceMethod method,
                                  double tol = 1e-8, int max_iter = 100);

BlupResult eblup(const AreaDesign& design, const Eigen::VectorXd& beta, double sigma2_u);

MseComponents mse_components(const AreaDesign& design, double sigma2_u, double var_sigma2_u);

// g1 + g2 + 2 g3 for Prasad-Rao and REML; ML subtracts the bias correction
// b * grad(g1). Throws MethodMismatch when `method` differs from the method
// the fit state was produced under.
Eigen::VectorXd mse_total(const MseComponents& components, VarianceMethod method,
                          const AreaDesign& design, const FHFit& state);

QualityMeasures quality_measures(const FHFit& fit, const AreaDesign& design);

// Full pipeline: variance component, GLS, EBLUP, MSE decomposition.
FHFit fit_fh(const AreaDesign& design, VarianceMethod method);

// As fit_fh but with the variance component pinned externally (used when a
// published sigma2_u is replayed rather than re-estimated). Var(sigma2_u_hat)
// is still computed from `method`.
FHFit fit_fh_fixed_sigma2_u(const AreaDesign& design, VarianceMethod method, double sigma2_u);

// Log likelihood surfaces in sigma2_u, exposed for profile-based checks.
double ml_loglik(const AreaDesign& design, double sigma2_u);
double reml_loglik(const AreaDesign& design, double sigma2_u);

// The REML-specific closed form of g3; algebraically equal to the general
// expression and cross-checked against it in the tests.
Eigen::VectorXd g3_reml_closed_form(const AreaDesign& design, double sigma2_u);

// Bias term entering the ML total MSE.
double ml_bias_b(const AreaDesign& design, double sigma2_u);

}  // namespace sae
