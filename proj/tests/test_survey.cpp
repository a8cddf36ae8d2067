#include <doctest.h>

#include <random>

#include "sae/survey.hpp"
#include "support.hpp"

using namespace sae;

namespace {

SampleDomain simple_domain(std::initializer_list<double> values, double N_d = 0.0) {
  SampleDomain dom;
  dom.values.resize(static_cast<int>(values.size()));
  int i = 0;
  for (double v : values) dom.values[i++] = v;
  dom.weights = Eigen::VectorXd::Ones(dom.values.size());
  dom.N_d = N_d;
  return dom;
}

}  // namespace

TEST_CASE("ht_mean on {1,2,3} with a huge population") {
  SampleDomain dom = simple_domain({1.0, 2.0, 3.0}, 1e9);
  EstimateVar out = ht_mean(dom);
  CHECK(out.estimate == doctest::Approx(2.0));
  CHECK(out.variance == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("census and constant samples have zero variance") {
  SampleDomain census = simple_domain({4.0, 5.0, 6.0}, 3.0);
  CHECK(ht_mean(census).variance == doctest::Approx(0.0));
  SampleDomain constant = simple_domain({2.5, 2.5, 2.5, 2.5}, 100.0);
  CHECK(ht_mean(constant).variance == doctest::Approx(0.0));
}

TEST_CASE("singleton domain is rejected") {
  SampleDomain dom = simple_domain({1.0});
  CHECK_THROWS_AS(ht_mean(dom), SingletonDomain);
}

TEST_CASE("greg reproduces the population mean when values are linear in aux") {
  SampleDomain dom;
  const int n = 12;
  dom.values.resize(n);
  dom.aux_sample.resize(n, 1);
  dom.weights = Eigen::VectorXd::Ones(n);
  dom.N_d = 500.0;
  for (int i = 0; i < n; ++i) {
    double x = 0.5 * i - 2.0;
    dom.aux_sample(i, 0) = x;
    dom.values[i] = 3.0 + 2.0 * x;
  }
  dom.aux_pop_means = Eigen::VectorXd::Constant(1, 1.25);  // known population mean
  EstimateVar out = greg_mean(dom);
  CHECK(out.estimate == doctest::Approx(3.0 + 2.0 * 1.25).epsilon(1e-10));
  CHECK(out.variance == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("greg matches the textbook oracle on random data") {
  std::mt19937_64 rng(555);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uw(0.5, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 25;
    SampleDomain dom;
    dom.values.resize(n);
    dom.weights.resize(n);
    dom.aux_sample.resize(n, 2);
    dom.aux_pop_means.resize(2);
    dom.aux_pop_means << 0.1, -0.2;
    dom.N_d = 400.0;
    for (int i = 0; i < n; ++i) {
      dom.aux_sample(i, 0) = normal(rng);
      dom.aux_sample(i, 1) = normal(rng);
      dom.values[i] = 1.0 + dom.aux_sample(i, 0) - 0.5 * dom.aux_sample(i, 1) + normal(rng);
      dom.weights[i] = uw(rng);
    }
    EstimateVar out = greg_mean(dom);
    auto oracle = test::oracle_greg(dom.values, dom.aux_sample, dom.weights, dom.aux_pop_means,
                                    n / dom.N_d);
    CHECK(out.estimate == doctest::Approx(oracle.estimate).epsilon(1e-10));
    CHECK(out.variance == doctest::Approx(oracle.variance).epsilon(1e-10));
  }
}

TEST_CASE("greg with uncorrelated aux stays near the ht mean on average") {
  std::mt19937_64 rng(808);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int R = 3000, n = 30;
  double sum_diff = 0.0, sumsq_diff = 0.0;
  for (int rep = 0; rep < R; ++rep) {
    SampleDomain dom;
    dom.values.resize(n);
    dom.weights = Eigen::VectorXd::Ones(n);
    dom.aux_sample.resize(n, 1);
    dom.aux_pop_means = Eigen::VectorXd::Zero(1);
    dom.N_d = 0.0;
    for (int i = 0; i < n; ++i) {
      dom.values[i] = 2.0 + normal(rng);
      dom.aux_sample(i, 0) = normal(rng);  // independent of the values
    }
    double diff = greg_mean(dom).estimate - ht_mean(dom).estimate;
    sum_diff += diff;
    sumsq_diff += diff * diff;
  }
  double mean_diff = sum_diff / R;
  double se = std::sqrt((sumsq_diff / R - mean_diff * mean_diff) / R);
  CHECK(std::abs(mean_diff) < 2.0 * se + 1e-12);
}

TEST_CASE("composite weighting follows the sample-size rule") {
  SampleDomain dom = simple_domain({10.0, 10.0, 10.0}, 0.0);
  // n_d = n_bar -> midpoint of HT and synthetic
  EstimateVar mid = composite_mean(dom, 20.0, 3.0);
  CHECK(mid.estimate == doctest::Approx(15.0));

  // hand-worked case: HT = 10, synthetic = 20, n_d = 10, n_bar = 30
  SampleDomain ten = simple_domain({10, 10, 10, 10, 10, 10, 10, 10, 10, 10});
  EstimateVar out = composite_mean(ten, 20.0, 30.0);
  CHECK(out.estimate == doctest::Approx(0.25 * 10.0 + 0.75 * 20.0));

  // dominant sample size -> the direct estimate
  EstimateVar direct = composite_mean(ten, 20.0, 1e-9);
  CHECK(direct.estimate == doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("composite variance scales by phi squared") {
  SampleDomain dom = simple_domain({1.0, 2.0, 3.0, 4.0}, 0.0);
  EstimateVar ht = ht_mean(dom);
  EstimateVar comp = composite_mean(dom, 0.0, 4.0);
  CHECK(comp.variance == doctest::Approx(0.25 * ht.variance).epsilon(1e-12));
}
