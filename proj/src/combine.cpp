#include "sae/combine.hpp"

#include <cmath>

#include "sae/errors.hpp"
#include "sae/plausible_values.hpp"

namespace sae {

VarianceModel srs_variance(double sampling_fraction) {
  return [sampling_fraction](const Eigen::VectorXd& values, const Eigen::VectorXd& weights,
                             double mean) {
    const auto n = values.size();
    double wsum = weights.sum();
    double ss = (weights.array() * (values.array() - mean).square()).sum();
    // Weighted analogue of the n-1 sample variance; equals it under equal weights.
    double s2 = (ss / wsum) * (static_cast<double>(n) / (n - 1.0));
    return (1.0 - sampling_fraction) * s2 / static_cast<double>(n);
  };
}

std::pair<double, double> weighted_mean_variance(const Eigen::VectorXd& values,
                                                 const Eigen::VectorXd& weights,
                                                 const VarianceModel& variance, int domain) {
  if (values.size() == 0) throw EmptyDomain(domain);
  if (values.size() == 1) throw SingletonDomain(domain);
  if (values.size() != weights.size())
    throw ValidationError("values and weights must have equal length");
  if ((weights.array() <= 0.0).any()) throw ValidationError("design weights must be > 0");
  double mean = (weights.array() * values.array()).sum() / weights.sum();
  return {mean, variance(values, weights, mean)};
}

std::pair<double, double> domain_pv_mean(const PlausibleValueSet& pvs,
                                         const Eigen::VectorXd& weights, int domain, int ell,
                                         const VarianceModel& variance) {
  if (weights.size() != pvs.persons())
    throw ValidationError("one design weight per person is required");
  std::vector<int> members;
  for (int j = 0; j < pvs.persons(); ++j)
    if (pvs.domain_of[j] == domain) members.push_back(j);
  Eigen::VectorXd v(members.size()), w(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    v[k] = pvs.draws(members[k], ell);
    w[k] = weights[members[k]];
  }
  return weighted_mean_variance(v, w, variance, domain);
}

AreaEstimate rubin_combine(const std::vector<std::pair<double, double>>& per_imputation,
                           int domain, int n_d) {
  const int L = static_cast<int>(per_imputation.size());
  if (L < 2) throw TooFewImputations(L);

  AreaEstimate out;
  out.domain = domain;
  out.L = L;
  out.n_d = n_d;
  for (const auto& [point, var] : per_imputation) {
    out.gamma_hat += point;
    out.within += var;
  }
  out.gamma_hat /= L;
  out.within /= L;
  for (const auto& [point, var] : per_imputation)
    out.between += (point - out.gamma_hat) * (point - out.gamma_hat);
  out.between /= (L - 1.0);
  out.sigma2_d = out.within + (1.0 + 1.0 / L) * out.between;
  return out;
}

std::vector<AreaEstimate> combine_all_domains(const PlausibleValueSet& pvs,
                                              const Eigen::VectorXd& weights,
                                              const VarianceModel& variance) {
  const int D = pvs.domains();
  std::vector<AreaEstimate> out;
  out.reserve(D);
  for (int d = 0; d < D; ++d) {
    std::vector<std::pair<double, double>> per_imputation;
    per_imputation.reserve(pvs.imputations());
    for (int ell = 0; ell < pvs.imputations(); ++ell)
      per_imputation.push_back(domain_pv_mean(pvs, weights, d, ell, variance));
    int n_d = 0;
    for (int j = 0; j < pvs.persons(); ++j)
      if (pvs.domain_of[j] == d) ++n_d;
    out.push_back(rubin_combine(per_imputation, d, n_d));
  }
  return out;
}

}  // namespace sae
