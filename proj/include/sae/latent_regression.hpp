#pragma once

#include <Eigen/Dense>

#include "sae/errors.hpp"

namespace sae {

// Conditioning model for ability: theta_j ~ N(w_j' gamma, sigma2), with w_j
// the person covariate row (first column an intercept).
struct LatentRegression {
  Eigen::VectorXd gamma;  // coefficient per covariate column
  double sigma2 = 1.0;    // residual variance, > 0

  void validate() const {
    if (!(sigma2 > 0.0)) throw ValidationError("latent residual variance must be > 0");
  }

  double prior_mean(const Eigen::Ref<const Eigen::RowVectorXd>& covariates) const {
    return covariates * gamma;
  }
};

// Covariate matrix used when none is supplied: a single intercept column.
inline Eigen::MatrixXd intercept_only(int persons) { return Eigen::MatrixXd::Ones(persons, 1); }

}  // namespace sae
