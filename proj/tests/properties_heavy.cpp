#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "fh_mc.hpp"
#include "sae/combine.hpp"
#include "sae/em.hpp"
#include "sae/io.hpp"
#include "sae/plausible_values.hpp"
#include "sae/simulation.hpp"
#include "sae/survey.hpp"
#include "support.hpp"

using namespace sae;

TEST_SUITE_BEGIN("properties");

TEST_CASE("EM log likelihood traces are non-decreasing") {
  std::mt19937_64 rng(1001);
  const int N = 400, I = 15;
  ItemBank truth = test::random_bank(I, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd W(N, 2);
  Eigen::VectorXd theta(N);
  for (int j = 0; j < N; ++j) {
    W(j, 0) = 1.0;
    W(j, 1) = normal(rng);
    theta[j] = 0.4 * W(j, 1) + std::sqrt(0.84) * normal(rng);
  }
  ResponseMatrix responses = test::simulate_responses(theta, truth, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < I; ++i)
      if (unif(rng) < 0.2) responses.values(j, i) = ResponseMatrix::kMissing;

  EmResult result = calibrate_em(responses, W);
  REQUIRE(result.loglik_items.size() > 2);
  for (std::size_t t = 1; t < result.loglik_items.size(); ++t)
    CHECK(result.loglik_items[t] >= result.loglik_items[t - 1] - 1e-10);
  REQUIRE(result.loglik_latreg.size() > 2);
  for (std::size_t t = 1; t < result.loglik_latreg.size(); ++t)
    CHECK(result.loglik_latreg[t] >= result.loglik_latreg[t - 1] - 1e-10);
}

TEST_CASE("MH draws match the grid posterior within KS 0.02") {
  std::mt19937_64 rng(1002);
  const int I = 30;
  ItemBank bank = test::random_bank(I, rng);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.4);
  ResponseMatrix responses = test::simulate_responses(theta, bank, rng);
  LatentRegression reg;
  reg.gamma = Eigen::VectorXd::Zero(1);
  reg.sigma2 = 1.0;

  const int L = 10000;
  PlausibleValueSet pvs =
      draw_plausible_values(responses, bank, reg, Eigen::MatrixXd(), L, 2027);
  std::vector<double> draws(pvs.draws.row(0).begin(), pvs.draws.row(0).end());
  auto loglik = [&](double t) { return person_loglik(responses, 0, bank, t); };
  auto post = test::grid_posterior(loglik, 0.0, 1.0, -6.0, 6.0, 4001);
  CHECK(test::ks_distance(draws, post) < 0.02);
}

TEST_CASE("MCAR masking does not bias the posterior mean") {
  std::mt19937_64 rng(1003);
  const int N = 800, I = 40;
  ItemBank bank = test::random_bank(I, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd theta(N);
  for (int j = 0; j < N; ++j) theta[j] = normal(rng);
  ResponseMatrix responses = test::simulate_responses(theta, bank, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ResponseMatrix masked = responses;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < I; ++i)
      if (unif(rng) < 0.3) masked.values(j, i) = ResponseMatrix::kMissing;

  LatentRegression reg;
  reg.gamma = Eigen::VectorXd::Zero(1);
  reg.sigma2 = 1.0;
  PvConfig quick;
  quick.burn_in = 300;
  quick.thin = 25;
  PlausibleValueSet pvs =
      draw_plausible_values(masked, bank, reg, Eigen::MatrixXd(), 8, 77, quick);
  Eigen::VectorXd err = pvs.draws.rowwise().mean() - theta;
  double bias = err.mean();
  double se = std::sqrt((err.array() - bias).square().sum() / (N - 1.0) / N);
  CHECK(std::abs(bias) < 2.0 * se);
}

TEST_CASE("EBLUP is unbiased across the generative model") {
  auto result = test::run_eblup_unbiasedness(100, 2000, 777);
  CHECK(result.fraction() >= 0.95);
}

TEST_CASE("estimated MSE tracks the empirical MSE under REML") {
  auto result = test::run_mse_calibration(50, 5000, 717171);
  CHECK(result.avg_rel_gap < 0.10);
}

TEST_CASE("HT variance estimate matches the empirical replicate variance") {
  std::mt19937_64 rng(1004);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int Npop = 2000, n = 100, R = 10000;
  Eigen::VectorXd pop(Npop);
  for (int i = 0; i < Npop; ++i) pop[i] = 3.0 + normal(rng);

  double mean_est_var = 0.0, sum = 0.0, sumsq = 0.0;
  std::vector<int> idx(Npop);
  std::iota(idx.begin(), idx.end(), 0);
  for (int r = 0; r < R; ++r) {
    for (int i = 0; i < n; ++i) {
      std::uniform_int_distribution<int> pick(i, Npop - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    SampleDomain dom;
    dom.values.resize(n);
    for (int i = 0; i < n; ++i) dom.values[i] = pop[idx[i]];
    dom.weights = Eigen::VectorXd::Ones(n);
    dom.N_d = Npop;
    EstimateVar out = ht_mean(dom);
    mean_est_var += out.variance;
    sum += out.estimate;
    sumsq += out.estimate * out.estimate;
  }
  mean_est_var /= R;
  double emp_var = (sumsq - sum * sum / R) / (R - 1.0);
  CHECK(std::abs(mean_est_var - emp_var) / emp_var < 0.05);
}

// Reduced-replicate rendition of the study design; the acceptance runner
// executes the full-size version.
TEST_CASE("estimator ordering and monotonicity on the reduced grid") {
  SimGrid grid;
  grid.base.N = 10000;
  grid.base.D = 50;
  grid.base.I = 60;
  grid.base.L = 5;
  grid.base.R = 150;
  grid.base.missing_rate = 0.10;
  grid.base.corr_level = CorrLevel::High;
  auto cells = run_grid(grid);
  REQUIRE(cells.size() == 9);
  for (const auto& cell : cells) {
    CAPTURE(cell.f_d);
    CAPTURE(cell.f_n);
    CHECK(cell.eerp_dir > cell.eerp_cal);
    CHECK(cell.eerp_cal > cell.eerp_comp);
    CHECK(cell.eerp_comp > cell.eerp_prop);
    CHECK(std::abs(cell.sbr_prop) < 0.5);
  }
  auto at = [&](double fd, double fn) -> const CellSummary& {
    for (const auto& cell : cells)
      if (cell.f_d == fd && cell.f_n == fn) return cell;
    throw std::runtime_error("cell not found");
  };
  for (double fd : {0.3, 0.5, 0.7}) {
    for (auto metric : {&CellSummary::eerp_dir, &CellSummary::eerp_cal,
                        &CellSummary::eerp_comp, &CellSummary::eerp_prop}) {
      CHECK(at(fd, 0.05).*metric >= at(fd, 0.10).*metric);
      CHECK(at(fd, 0.10).*metric >= at(fd, 0.20).*metric);
    }
  }
  for (double fn : {0.05, 0.10, 0.20}) {
    for (auto metric : {&CellSummary::eerp_dir, &CellSummary::eerp_cal,
                        &CellSummary::eerp_comp, &CellSummary::eerp_prop}) {
      CHECK(at(0.3, fn).*metric <= at(0.5, fn).*metric);
      CHECK(at(0.5, fn).*metric <= at(0.7, fn).*metric);
    }
  }
}

// The effect of extra missingness on the proposed estimator is real but small
// at desk scale, so it is averaged over the f_n cells of one f_d level.
TEST_CASE("more missing data cannot reduce the proposed estimator's EERP") {
  SimConfig config;
  config.N = 10000;
  config.D = 50;
  config.I = 60;
  config.L = 5;
  config.R = 400;
  config.f_d = 0.3;
  config.corr_level = CorrLevel::High;
  config.seed = 99;

  auto mean_eerp_prop = [&](double missing_rate) {
    SimConfig scenario = config;
    scenario.missing_rate = missing_rate;
    PreparedPopulation prepared = prepare_population(scenario);
    double total = 0.0;
    for (double f_n : {0.05, 0.10, 0.20}) {
      scenario.f_n = f_n;
      total += run_cell(scenario, prepared).eerp_prop;
    }
    return total / 3.0;
  };

  CHECK(mean_eerp_prop(0.30) >= mean_eerp_prop(0.10));
}

TEST_CASE("identical seed and config give byte-identical outputs") {
  SimConfig config;
  config.N = 600;
  config.D = 10;
  config.I = 12;
  config.R = 5;
  config.f_d = 0.5;
  config.f_n = 0.2;
  auto run_once = [&]() {
    PreparedPopulation prepared = prepare_population(config);
    std::vector<CellSummary> cells = {run_cell(config, prepared)};
    std::string path = std::string("/tmp/sae_determinism_") + std::to_string(config.seed) +
                       ".csv";
    write_sim_results_csv(path, cells);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::remove(path.c_str());
    return buf.str();
  };
  CHECK(run_once() == run_once());
}

TEST_SUITE_END();
