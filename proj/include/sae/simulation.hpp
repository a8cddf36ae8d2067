#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sae/em.hpp"
#include "sae/item_model.hpp"
#include "sae/plausible_values.hpp"
#include "sae/response_data.hpp"

namespace sae {

enum class CorrLevel { High, Medium, Low };

std::string to_string(CorrLevel level);
CorrLevel corr_level_from_string(const std::string& name);

struct SimConfig {
  int N = 10000;  // population size
  int I = 60;     // items per student
  int D = 50;     // domains
  double missing_rate = 0.10;
  CorrLevel corr_level = CorrLevel::High;
  double f_d = 0.30;  // fraction of domains in the sample
  double f_n = 0.05;  // fraction of the population sampled, spread over those domains
  int L = 5;          // plausible values
  int R = 500;        // replicates
  std::uint64_t seed = 2015;

  void validate() const;
};

// Ability scores are reported on a conventional assessment scale so relative
// metrics stay away from zero.
constexpr double kReportMean = 500.0;
constexpr double kReportSd = 100.0;

struct Population {
  ResponseMatrix responses;          // before masking
  Eigen::VectorXd theta;             // latent ability, N
  Eigen::MatrixXd person_cov;        // N x 3: intercept + two auxiliaries
  Eigen::MatrixXd area_cov;          // D x 3: intercept + two auxiliaries
  Eigen::MatrixXd domain_aux_means;  // D x 2 population means of person auxiliaries
  Eigen::VectorXd gamma_true;        // D true domain means, report scale
  std::vector<int> domain_size;
  ItemBank items;  // generating parameters
};

Population synth_population(const SimConfig& config, std::mt19937_64& rng);

// Each observed cell is independently hidden with probability `rate`;
// missing cells stay missing.
ResponseMatrix apply_mcar_mask(const ResponseMatrix& responses, double rate,
                               std::mt19937_64& rng);

// Population plus everything derived once per scenario: masked responses,
// calibration and plausible values on the report scale.
struct PreparedPopulation {
  Population population;
  ResponseMatrix masked;
  EmResult calibration;
  PlausibleValueSet pvs;          // latent scale
  Eigen::MatrixXd pv_report;      // N x L, report scale
  Eigen::VectorXd pv_person_mean; // N, mean over the L values, report scale
};

PreparedPopulation prepare_population(const SimConfig& config);

// Per-replicate averages of the relative bias and the relative standard
// error, one entry per estimator.
struct ReplicateMetrics {
  double sbp_dir = 0.0, sbp_cal = 0.0, sbp_comp = 0.0, sbp_prop = 0.0;    // percent
  double eerp_dir = 0.0, eerp_cal = 0.0, eerp_comp = 0.0, eerp_prop = 0.0;  // percent
  int domains_used = 0;
  int domains_skipped = 0;
};

// One draw of the two-stage design: a prefix of a domain permutation, then an
// equal-allocation subsample inside each selected domain. Permutations are
// keyed by (seed, replicate, domain) only, so samples are nested across
// (f_d, f_n) cells and cell contrasts use common random numbers.
ReplicateMetrics run_replicate(const SimConfig& config, const PreparedPopulation& prepared,
                               int replicate);

struct CellSummary {
  double missing_rate = 0.0;
  CorrLevel corr_level = CorrLevel::High;
  double f_d = 0.0, f_n = 0.0;
  double eerp_dir = 0.0, eerp_cal = 0.0, eerp_comp = 0.0, eerp_prop = 0.0;
  double sbr_dir = 0.0, sbr_cal = 0.0, sbr_comp = 0.0, sbr_prop = 0.0;
  int replicates = 0;
  int domains_skipped = 0;
};

// Plain means over replicates.
CellSummary aggregate(const SimConfig& config, const std::vector<ReplicateMetrics>& metrics);

CellSummary run_cell(const SimConfig& config, const PreparedPopulation& prepared,
                     std::vector<ReplicateMetrics>* per_replicate = nullptr);

struct SimGrid {
  SimConfig base;
  std::vector<double> missing_rates = {0.10};
  std::vector<CorrLevel> corr_levels = {CorrLevel::High};
  std::vector<double> f_d_values = {0.30, 0.50, 0.70};
  std::vector<double> f_n_values = {0.05, 0.10, 0.20};
};

struct LongRow {
  double missing_rate;
  CorrLevel corr_level;
  double f_d, f_n;
  int replicate;
  std::string estimator;
  double sbp, eerp;
};

// Full grid; prepares each (missing rate, correlation) scenario once and
// reuses it across the (f_d, f_n) cells. `long_rows` is filled when not null.
std::vector<CellSummary> run_grid(const SimGrid& grid, std::vector<LongRow>* long_rows = nullptr);

}  // namespace sae
