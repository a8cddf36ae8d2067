#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace sae {

struct PlausibleValueSet;

// Pooled per-domain direct estimate after combining L imputations:
//   gamma_hat = mean of the L point estimates,
//   sigma2_d  = within + (1 + 1/L) * between.
struct AreaEstimate {
  int domain = 0;
  double gamma_hat = 0.0;
  double sigma2_d = 0.0;
  double within = 0.0;
  double between = 0.0;
  int L = 0;
  int n_d = 0;
};

// Design variance of a weighted domain mean; pluggable so other designs can
// slot in behind the same combining path.
using VarianceModel = std::function<double(const Eigen::VectorXd& values,
                                           const Eigen::VectorXd& weights, double mean)>;

// Simple random sampling within the domain: (1 - f) * s^2 / n with s^2 the
// weighted analogue of the n-1 sample variance.
VarianceModel srs_variance(double sampling_fraction = 0.0);

// Hajek mean of one imputation over the persons of a domain, with its design
// variance. Throws EmptyDomain / SingletonDomain.
std::pair<double, double> weighted_mean_variance(const Eigen::VectorXd& values,
                                                 const Eigen::VectorXd& weights,
                                                 const VarianceModel& variance, int domain = 0);

// Same, addressed through a PlausibleValueSet: imputation `ell` restricted to
// persons of `domain`.
std::pair<double, double> domain_pv_mean(const PlausibleValueSet& pvs,
                                         const Eigen::VectorXd& weights, int domain, int ell,
                                         const VarianceModel& variance);

// Combining rules over the L per-imputation (estimate, variance) pairs.
AreaEstimate rubin_combine(const std::vector<std::pair<double, double>>& per_imputation,
                           int domain = 0, int n_d = 0);

// Every domain present in the set, combined; domains are the set's 0..D-1.
std::vector<AreaEstimate> combine_all_domains(const PlausibleValueSet& pvs,
                                              const Eigen::VectorXd& weights,
                                              const VarianceModel& variance);

}  // namespace sae
