#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sae/errors.hpp"
#include "sae/item_model.hpp"
#include "sae/latent_regression.hpp"
#include "sae/response_data.hpp"

namespace sae {

// Random-walk Metropolis settings. Each person owns an independent RNG
// substream keyed by (seed, person index), so draws are reproducible and
// independent of evaluation order.
struct PvConfig {
  double step = 1.0;
  int burn_in = 500;
  int thin = 50;
};

struct PlausibleValueSet {
  Eigen::MatrixXd draws;       // persons x L
  std::vector<int> domain_of;  // copied from the response data

  int persons() const { return static_cast<int>(draws.rows()); }
  int imputations() const { return static_cast<int>(draws.cols()); }

  int domains() const {
    int d = 0;
    for (int v : domain_of) d = std::max(d, v + 1);
    return d;
  }

  void validate() const {
    if (imputations() < 2) throw TooFewImputations(imputations());
    if (static_cast<int>(domain_of.size()) != persons())
      throw ValidationError("plausible value rows do not match domain assignments");
    if (!draws.allFinite()) throw ValidationError("plausible values must be finite");
  }
};

// L posterior draws of ability per person, given observed responses and the
// calibrated bank plus conditioning model.
PlausibleValueSet draw_plausible_values(const ResponseMatrix& responses, const ItemBank& bank,
                                        const LatentRegression& reg,
                                        const Eigen::MatrixXd& covariates, int L,
                                        std::uint64_t seed, const PvConfig& config = {});

// Observed-response log likelihood of one person at ability theta.
double person_loglik(const ResponseMatrix& responses, int person, const ItemBank& bank,
                     double theta);

}  // namespace sae
