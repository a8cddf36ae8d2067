#include <doctest.h>

#include <random>

#include "sae/combine.hpp"
#include "sae/errors.hpp"
#include "sae/plausible_values.hpp"
#include "support.hpp"

using namespace sae;

TEST_CASE("constant plausible values give the constant and zero variance") {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(5, 2.0);
  Eigen::VectorXd w(5);
  w << 1.0, 2.0, 0.5, 3.0, 1.5;
  auto [mean, var] = weighted_mean_variance(v, w, srs_variance(0.0));
  CHECK(mean == doctest::Approx(2.0));
  CHECK(var == doctest::Approx(0.0));
}

TEST_CASE("equal weights, values {1,2,3}, f = 0 gives mean 2 and variance 1/3") {
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, 3.0;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  auto [mean, var] = weighted_mean_variance(v, w, srs_variance(0.0));
  CHECK(mean == doctest::Approx(2.0));
  CHECK(var == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("domain with one person is rejected") {
  Eigen::VectorXd v(1), w(1);
  v << 2.0;
  w << 1.0;
  CHECK_THROWS_AS(weighted_mean_variance(v, w, srs_variance(0.0)), SingletonDomain);
  CHECK_THROWS_AS(
      weighted_mean_variance(Eigen::VectorXd(), Eigen::VectorXd(), srs_variance(0.0)),
      EmptyDomain);
}

TEST_CASE("rubin_combine on the L = 2 worked example") {
  AreaEstimate est = rubin_combine({{1.0, 0.5}, {3.0, 0.5}});
  CHECK(est.gamma_hat == doctest::Approx(2.0));
  CHECK(est.within == doctest::Approx(0.5));
  CHECK(est.between == doctest::Approx(2.0));
  CHECK(est.sigma2_d == doctest::Approx(3.5));
}

TEST_CASE("identical points collapse to the shared value and variance") {
  AreaEstimate est = rubin_combine({{1.7, 0.3}, {1.7, 0.3}, {1.7, 0.3}});
  CHECK(est.gamma_hat == doctest::Approx(1.7));
  CHECK(est.between == doctest::Approx(0.0));
  CHECK(est.sigma2_d == doctest::Approx(0.3));
}

TEST_CASE("fewer than two imputations is an error") {
  CHECK_THROWS_AS(rubin_combine({{1.0, 0.5}}), TooFewImputations);
}

TEST_CASE("rubin_combine matches the independent oracle on random input") {
  std::mt19937_64 rng(991);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uvar(0.1, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::pair<double, double>> input;
    for (int ell = 0; ell < 5; ++ell) input.push_back({normal(rng), uvar(rng)});
    AreaEstimate est = rubin_combine(input);
    auto oracle = test::oracle_rubin(input);
    CHECK(est.gamma_hat == doctest::Approx(oracle.point).epsilon(1e-12));
    CHECK(est.sigma2_d == doctest::Approx(oracle.total_variance).epsilon(1e-12));
  }
}

TEST_CASE("domain_pv_mean selects the requested domain and imputation") {
  PlausibleValueSet pvs;
  pvs.draws.resize(5, 2);
  pvs.draws << 1.0, 10.0, 2.0, 20.0, 3.0, 30.0, 7.0, 70.0, 9.0, 90.0;
  pvs.domain_of = {0, 0, 0, 1, 1};
  Eigen::VectorXd w = Eigen::VectorXd::Ones(5);
  auto [mean0, var0] = domain_pv_mean(pvs, w, 0, 0, srs_variance(0.0));
  CHECK(mean0 == doctest::Approx(2.0));
  CHECK(var0 == doctest::Approx(1.0 / 3.0));
  auto [mean1, var1] = domain_pv_mean(pvs, w, 1, 1, srs_variance(0.0));
  CHECK(mean1 == doctest::Approx(80.0));
  CHECK(var1 > 0.0);
}
