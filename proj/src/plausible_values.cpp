#include "sae/plausible_values.hpp"

#include <cmath>

#include "sae/rng.hpp"

namespace sae {

double person_loglik(const ResponseMatrix& responses, int person, const ItemBank& bank,
                     double theta) {
  double ll = 0.0;
  for (int i = 0; i < responses.items(); ++i) {
    int cell = responses.values(person, i);
    if (cell == ResponseMatrix::kMissing) continue;
    ll += cell == 1 ? log_irf(theta, bank.items[i]) : log_irf_complement(theta, bank.items[i]);
  }
  return ll;
}

PlausibleValueSet draw_plausible_values(const ResponseMatrix& responses, const ItemBank& bank,
                                        const LatentRegression& reg,
                                        const Eigen::MatrixXd& covariates, int L,
                                        std::uint64_t seed, const PvConfig& config) {
  responses.validate();
  bank.validate();
  reg.validate();
  if (bank.size() != responses.items())
    throw ValidationError("item bank does not match the response matrix");
  if (L < 2) throw TooFewImputations(L);
  if (config.step <= 0.0 || config.thin < 1 || config.burn_in < 0)
    throw ValidationError("sampler settings must have step > 0, thin >= 1, burn_in >= 0");
  Eigen::MatrixXd W =
      covariates.size() == 0 ? intercept_only(responses.persons()) : covariates;
  if (W.rows() != responses.persons())
    throw ValidationError("covariate rows do not match the response matrix");
  if (W.cols() != reg.gamma.size())
    throw ValidationError("covariate columns do not match the regression coefficients");

  const double sd = std::sqrt(reg.sigma2);
  PlausibleValueSet out;
  out.draws.resize(responses.persons(), L);
  out.domain_of = responses.domain_of;

  for (int j = 0; j < responses.persons(); ++j) {
    auto rng = substream(seed, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> proposal(0.0, config.step);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const double mu = reg.prior_mean(W.row(j));
    auto log_post = [&](double theta) {
      double z = (theta - mu) / sd;
      return person_loglik(responses, j, bank, theta) - 0.5 * z * z;
    };

    double theta = mu;
    double lp = log_post(theta);
    int drawn = 0;
    const int total = config.burn_in + config.thin * L;
    for (int t = 1; t <= total; ++t) {
      double cand = theta + proposal(rng);
      double lp_cand = log_post(cand);
      if (std::log(unif(rng)) < lp_cand - lp) {
        theta = cand;
        lp = lp_cand;
      }
      if (t > config.burn_in && (t - config.burn_in) % config.thin == 0)
        out.draws(j, drawn++) = theta;
    }
  }
  return out;
}

}  // namespace sae
