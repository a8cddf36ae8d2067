#pragma once

#include <Eigen/Dense>

#include "sae/errors.hpp"

namespace sae {

// One domain's sample for the design-based estimators. `values` are the
// per-person measurements (plausible-value means in this pipeline).
struct SampleDomain {
  int domain = 0;
  Eigen::VectorXd values;
  Eigen::VectorXd weights;
  double N_d = 0.0;            // population size; 0 means unknown (no fpc)
  Eigen::MatrixXd aux_sample;  // n x k person auxiliaries, no intercept column
  Eigen::VectorXd aux_pop_means;  // k known domain auxiliary means

  int n_d() const { return static_cast<int>(values.size()); }
  double sampling_fraction() const { return N_d > 0.0 ? n_d() / N_d : 0.0; }

  void validate() const {
    if (values.size() != weights.size())
      throw ValidationError("values and weights must have equal length");
    if ((weights.array() <= 0.0).any()) throw ValidationError("design weights must be > 0");
    if (N_d > 0.0 && n_d() > N_d)
      throw ValidationError("sample size exceeds population size");
    if (aux_sample.size() > 0 &&
        (aux_sample.rows() != values.size() || aux_sample.cols() != aux_pop_means.size()))
      throw ValidationError("auxiliary dimensions are inconsistent");
  }
};

struct EstimateVar {
  double estimate = 0.0;
  double variance = 0.0;
};

// Hajek mean with the SRS variance (1 - f) s^2 / n.
EstimateVar ht_mean(const SampleDomain& dom);

// Generalized regression estimator: HT mean plus the auxiliary correction
// (aux population means - aux HT means)' b_hat, with a residual variance.
EstimateVar greg_mean(const SampleDomain& dom);

// Sample-size-dependent composite phi * direct + (1 - phi) * synthetic with
// phi = n_d / (n_d + n_bar); the synthetic part is treated as fixed, so the
// variance is phi^2 times the direct estimator's variance.
EstimateVar composite_of(const EstimateVar& direct, int n_d, double synthetic, double n_bar);

// Convenience form combining the domain's HT mean.
EstimateVar composite_mean(const SampleDomain& dom, double synthetic, double n_bar);

}  // namespace sae
