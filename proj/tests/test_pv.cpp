#include <doctest.h>

#include <cmath>
#include <random>

#include "sae/plausible_values.hpp"
#include "support.hpp"

using namespace sae;

TEST_CASE("a person with no observed items draws from the prior") {
  ResponseMatrix responses;
  responses.values = Eigen::MatrixXi::Constant(1, 10, ResponseMatrix::kMissing);
  responses.domain_of = {0};
  ItemBank bank = [] {
    std::mt19937_64 rng(1);
    return test::random_bank(10, rng);
  }();
  LatentRegression reg;
  reg.gamma = Eigen::VectorXd::Constant(1, 0.6);
  reg.sigma2 = 0.49;

  PvConfig config;
  config.thin = 10;  // cheaper; draws remain near-independent for the prior
  const int L = 4000;
  PlausibleValueSet pvs =
      draw_plausible_values(responses, bank, reg, Eigen::MatrixXd(), L, 7, config);
  double mean = pvs.draws.row(0).mean();
  double var = (pvs.draws.row(0).array() - mean).square().sum() / (L - 1.0);
  // prior N(0.6, 0.49); Monte Carlo tolerances at ~3 standard errors
  CHECK(std::abs(mean - 0.6) < 3.0 * std::sqrt(0.49 / L));
  CHECK(var / 0.49 > 0.9);
  CHECK(var / 0.49 < 1.1);
}

TEST_CASE("posterior mean after answering every item tracks the grid oracle") {
  std::mt19937_64 rng(99);
  const int I = 150;
  ItemBank bank = test::random_bank(I, rng);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
  ResponseMatrix responses = test::simulate_responses(theta, bank, rng);
  LatentRegression reg;
  reg.gamma = Eigen::VectorXd::Zero(1);
  reg.sigma2 = 1.0;

  const int L = 200;
  PlausibleValueSet pvs =
      draw_plausible_values(responses, bank, reg, Eigen::MatrixXd(), L, 31);
  double mh_mean = pvs.draws.row(0).mean();
  CHECK(std::abs(mh_mean - 1.0) <= 0.25);

  auto loglik = [&](double t) { return person_loglik(responses, 0, bank, t); };
  auto post = test::grid_posterior(loglik, 0.0, 1.0);
  CHECK(std::abs(mh_mean - post.mean) < 0.05);
}

TEST_CASE("draws are deterministic given the seed and person substream") {
  std::mt19937_64 rng(12);
  ItemBank bank = test::random_bank(20, rng);
  Eigen::VectorXd theta(3);
  theta << -0.5, 0.2, 1.0;
  ResponseMatrix responses = test::simulate_responses(theta, bank, rng);
  LatentRegression reg;
  reg.gamma = Eigen::VectorXd::Zero(1);
  reg.sigma2 = 1.0;

  PlausibleValueSet a = draw_plausible_values(responses, bank, reg, Eigen::MatrixXd(), 5, 404);
  PlausibleValueSet b = draw_plausible_values(responses, bank, reg, Eigen::MatrixXd(), 5, 404);
  CHECK(a.draws == b.draws);

  // two identical persons presented through the same substream index
  ResponseMatrix single;
  single.values = responses.values.row(1);
  single.domain_of = {0};
  PlausibleValueSet c = draw_plausible_values(single, bank, reg, Eigen::MatrixXd(), 5, 404);
  ResponseMatrix copy = single;
  PlausibleValueSet d = draw_plausible_values(copy, bank, reg, Eigen::MatrixXd(), 5, 404);
  CHECK(c.draws == d.draws);

  PlausibleValueSet e = draw_plausible_values(responses, bank, reg, Eigen::MatrixXd(), 5, 405);
  CHECK(a.draws != e.draws);
}

TEST_CASE("L below two is rejected") {
  ResponseMatrix responses;
  responses.values = Eigen::MatrixXi::Zero(1, 2);
  responses.values(0, 1) = 1;
  responses.domain_of = {0};
  ItemBank bank;
  bank.items = {{1.0, 0.0, 0.0, 1.7}, {1.0, 0.5, 0.0, 1.7}};
  LatentRegression reg;
  reg.gamma = Eigen::VectorXd::Zero(1);
  reg.sigma2 = 1.0;
  CHECK_THROWS_AS(draw_plausible_values(responses, bank, reg, Eigen::MatrixXd(), 1, 1),
                  TooFewImputations);
}
