#include "sae/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sae/combine.hpp"
#include "sae/fay_herriot.hpp"
#include "sae/rng.hpp"
#include "sae/survey.hpp"

namespace sae {

std::string to_string(CorrLevel level) {
  switch (level) {
    case CorrLevel::High: return "high";
    case CorrLevel::Medium: return "medium";
    case CorrLevel::Low: return "low";
  }
  return "unknown";
}

CorrLevel corr_level_from_string(const std::string& name) {
  if (name == "high") return CorrLevel::High;
  if (name == "medium") return CorrLevel::Medium;
  if (name == "low") return CorrLevel::Low;
  throw ValidationError("unknown correlation level '" + name + "' (expected high, medium, low)");
}

void SimConfig::validate() const {
  if (N <= 0 || I <= 0 || D <= 0) throw ValidationError("population dimensions must be positive");
  if (D > N) throw ValidationError("cannot have more domains than persons");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0))
    throw ValidationError("missing_rate must lie in [0, 1)");
  if (!(f_d > 0.0 && f_d <= 1.0 && f_n > 0.0 && f_n <= 1.0))
    throw ValidationError("sampling fractions must lie in (0, 1]");
  if (L < 2) throw TooFewImputations(L);
  if (R < 1) throw ValidationError("need at least one replicate");
}

namespace {

// Population model constants. The person auxiliaries carry a modest share of
// the ability variance; domain effects beyond what the area auxiliaries
// explain are kept small so the area model fits tightly. The two area
// auxiliaries share the target correlation with the domain means but carry
// negatively correlated noise, which keeps their joint information high.
constexpr double kAuxLoading = 0.158;   // each of the two person auxiliaries
constexpr double kDomainSd = 0.015;     // extra domain effect, latent scale
constexpr double kAreaNoiseCorr = -0.7;  // between the two area-auxiliary noises
constexpr double kCorrHigh = 0.90;
constexpr double kCorrMedium = 0.70;
constexpr double kCorrLow = 0.40;

// Substream tags; keep key spaces disjoint.
constexpr std::uint64_t kTagSynth = 1ULL << 56;
constexpr std::uint64_t kTagMask = 2ULL << 56;
constexpr std::uint64_t kTagPv = 3ULL << 56;
constexpr std::uint64_t kTagDomainPerm = 4ULL << 56;
constexpr std::uint64_t kTagPersonPerm = 5ULL << 56;

double corr_target(CorrLevel level) {
  switch (level) {
    case CorrLevel::High: return kCorrHigh;
    case CorrLevel::Medium: return kCorrMedium;
    case CorrLevel::Low: return kCorrLow;
  }
  return kCorrHigh;
}

bool corr_in_band(CorrLevel level, double corr) {
  double a = std::abs(corr);
  switch (level) {
    case CorrLevel::High: return a > 0.80;
    case CorrLevel::Medium: return a >= 0.60 && a <= 0.80;
    case CorrLevel::Low: return a < 0.60;
  }
  return false;
}

double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double mx = x.mean(), my = y.mean();
  Eigen::ArrayXd cx = x.array() - mx, cy = y.array() - my;
  return (cx * cy).sum() / std::sqrt(cx.square().sum() * cy.square().sum());
}

std::vector<int> permutation(int n, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(idx[i], idx[pick(rng)]);
  }
  return idx;
}

}  // namespace

Population synth_population(const SimConfig& config, std::mt19937_64& rng) {
  config.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Population pop;
  pop.domain_size.assign(config.D, config.N / config.D);
  for (int d = 0; d < config.N % config.D; ++d) ++pop.domain_size[d];

  pop.items.items.resize(config.I);
  for (int i = 0; i < config.I; ++i) {
    ItemParams& item = pop.items.items[i];
    item.a = 0.5 + 1.5 * unif(rng);
    item.b = -2.5 + 5.0 * unif(rng);
    item.c = 0.0;
    item.scale = 1.7;
  }

  const double resid_sd =
      std::sqrt(1.0 - 2.0 * kAuxLoading * kAuxLoading - kDomainSd * kDomainSd);
  pop.person_cov.resize(config.N, 3);
  pop.person_cov.col(0).setOnes();
  pop.theta.resize(config.N);
  pop.responses.values.resize(config.N, config.I);
  pop.responses.domain_of.resize(config.N);
  pop.gamma_true = Eigen::VectorXd::Zero(config.D);
  pop.domain_aux_means = Eigen::MatrixXd::Zero(config.D, 2);

  int person = 0;
  for (int d = 0; d < config.D; ++d) {
    double u_d = kDomainSd * normal(rng);
    for (int k = 0; k < pop.domain_size[d]; ++k, ++person) {
      double x1 = normal(rng), x2 = normal(rng);
      pop.person_cov(person, 1) = x1;
      pop.person_cov(person, 2) = x2;
      double theta = kAuxLoading * (x1 + x2) + u_d + resid_sd * normal(rng);
      pop.theta[person] = theta;
      pop.responses.domain_of[person] = d;
      for (int i = 0; i < config.I; ++i)
        pop.responses.values(person, i) = unif(rng) < irf(theta, pop.items.items[i]) ? 1 : 0;
      pop.gamma_true[d] += theta;
      pop.domain_aux_means(d, 0) += x1;
      pop.domain_aux_means(d, 1) += x2;
    }
    pop.gamma_true[d] = kReportMean + kReportSd * pop.gamma_true[d] / pop.domain_size[d];
    pop.domain_aux_means.row(d) /= pop.domain_size[d];
  }

  // Area auxiliaries: a rho-mix of the standardized true domain means and
  // fresh noise, regenerated until the realized correlations land in the
  // requested band.
  double mean = pop.gamma_true.mean();
  double sd = std::sqrt((pop.gamma_true.array() - mean).square().sum() / (config.D - 1.0));
  Eigen::VectorXd z = (pop.gamma_true.array() - mean) / sd;
  const double rho = corr_target(config.corr_level);
  pop.area_cov.resize(config.D, 3);
  pop.area_cov.col(0).setOnes();
  bool ok = false;
  for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
    const double cross = kAreaNoiseCorr;
    for (int d = 0; d < config.D; ++d) {
      double e1 = normal(rng);
      double e2 = cross * e1 + std::sqrt(1.0 - cross * cross) * normal(rng);
      pop.area_cov(d, 1) = rho * z[d] + std::sqrt(1.0 - rho * rho) * e1;
      pop.area_cov(d, 2) = rho * z[d] + std::sqrt(1.0 - rho * rho) * e2;
    }
    ok = corr_in_band(config.corr_level, correlation(pop.area_cov.col(1), pop.gamma_true)) &&
         corr_in_band(config.corr_level, correlation(pop.area_cov.col(2), pop.gamma_true));
  }
  if (!ok)
    throw CorrelationMiss("could not achieve the requested auxiliary correlation band in 20 attempts");
  return pop;
}

ResponseMatrix apply_mcar_mask(const ResponseMatrix& responses, double rate,
                               std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("mask rate must lie in [0, 1)");
  ResponseMatrix out = responses;
  if (rate == 0.0) return out;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 0; j < out.persons(); ++j)
    for (int i = 0; i < out.items(); ++i)
      if (out.values(j, i) != ResponseMatrix::kMissing && unif(rng) < rate)
        out.values(j, i) = ResponseMatrix::kMissing;
  return out;
}

PreparedPopulation prepare_population(const SimConfig& config) {
  config.validate();
  PreparedPopulation prepared;
  {
    auto rng = substream(config.seed, kTagSynth);
    prepared.population = synth_population(config, rng);
  }
  {
    auto rng = substream(config.seed, kTagMask);
    prepared.masked = apply_mcar_mask(prepared.population.responses, config.missing_rate, rng);
  }
  EmConfig em;
  em.tol = 1e-4;
  em.max_iter = 300;
  prepared.calibration = calibrate_em(prepared.masked, prepared.population.person_cov, em);
  prepared.pvs = draw_plausible_values(prepared.masked, prepared.calibration.bank,
                                       prepared.calibration.latreg,
                                       prepared.population.person_cov, config.L,
                                       splitmix64(config.seed ^ kTagPv));
  prepared.pv_report = (prepared.pvs.draws.array() * kReportSd + kReportMean).matrix();
  prepared.pv_person_mean = prepared.pv_report.rowwise().mean();
  return prepared;
}

ReplicateMetrics run_replicate(const SimConfig& config, const PreparedPopulation& prepared,
                               int replicate) {
  const Population& pop = prepared.population;
  const int D = config.D;
  const int m = std::max(1, static_cast<int>(std::lround(config.f_d * D)));
  const int n_tot = std::max(2, static_cast<int>(std::lround(config.f_n * config.N)));
  // Equal allocation of the population sampling fraction over the selected
  // domains; per-domain size shrinks as more domains enter the sample.
  const double n_bar_design = static_cast<double>(n_tot) / D;

  std::vector<int> domain_order;
  {
    auto rng = substream(config.seed, kTagDomainPerm + static_cast<std::uint64_t>(replicate));
    domain_order = permutation(D, rng);
  }

  // Person index offsets per domain (domains are contiguous by construction).
  std::vector<int> offset(D + 1, 0);
  for (int d = 0; d < D; ++d) offset[d + 1] = offset[d] + pop.domain_size[d];

  struct DomainSample {
    int domain;
    SampleDomain sample;
    AreaEstimate direct;
  };
  std::vector<DomainSample> samples;
  samples.reserve(m);

  ReplicateMetrics metrics;
  for (int k = 0; k < m; ++k) {
    int d = domain_order[k];
    int N_d = pop.domain_size[d];
    int n_d = std::min(N_d, std::max(2, static_cast<int>(std::lround(
                                            static_cast<double>(n_tot) / m))));
    auto rng = substream(config.seed, kTagPersonPerm +
                                          (static_cast<std::uint64_t>(replicate) << 20) +
                                          static_cast<std::uint64_t>(d));
    std::vector<int> order = permutation(N_d, rng);

    DomainSample ds;
    ds.domain = d;
    ds.sample.domain = d;
    ds.sample.N_d = N_d;
    ds.sample.values.resize(n_d);
    ds.sample.weights = Eigen::VectorXd::Constant(n_d, static_cast<double>(N_d) / n_d);
    ds.sample.aux_sample.resize(n_d, 2);
    ds.sample.aux_pop_means = pop.domain_aux_means.row(d).transpose();

    double f = static_cast<double>(n_d) / N_d;
    std::vector<std::pair<double, double>> per_imputation;
    per_imputation.reserve(config.L);
    Eigen::VectorXd pv_ell(n_d);
    for (int ell = 0; ell < config.L; ++ell) {
      for (int s = 0; s < n_d; ++s)
        pv_ell[s] = prepared.pv_report(offset[d] + order[s], ell);
      per_imputation.push_back(
          weighted_mean_variance(pv_ell, ds.sample.weights, srs_variance(f), d));
    }
    ds.direct = rubin_combine(per_imputation, d, n_d);

    for (int s = 0; s < n_d; ++s) {
      int j = offset[d] + order[s];
      ds.sample.values[s] = prepared.pv_person_mean[j];
      ds.sample.aux_sample(s, 0) = pop.person_cov(j, 1);
      ds.sample.aux_sample(s, 1) = pop.person_cov(j, 2);
    }
    samples.push_back(std::move(ds));
  }

  // Synthetic reference for the composite: OLS of the direct means on the
  // area auxiliaries across the sampled domains.
  Eigen::MatrixXd Xs(m, 3);
  Eigen::VectorXd dir_mean(m);
  for (int k = 0; k < m; ++k) {
    Xs.row(k) = pop.area_cov.row(samples[k].domain);
    dir_mean[k] = samples[k].direct.gamma_hat;
  }
  Eigen::VectorXd beta_ols = Xs.colPivHouseholderQr().solve(dir_mean);

  // Area-level fit over the sampled domains.
  AreaDesign design;
  design.X = Xs;
  design.gamma_hat = dir_mean;
  design.sigma2.resize(m);
  for (int k = 0; k < m; ++k) design.sigma2[k] = samples[k].direct.sigma2_d;
  FHFit fh;
  bool fh_ok = true;
  try {
    fh = fit_fh(design, VarianceMethod::REML);
  } catch (const std::exception&) {
    fh_ok = false;
  }

  auto accumulate = [](double& sbp, double& eerp, double truth, double est, double mse) {
    sbp += (truth - est) / est * 100.0;
    eerp += std::sqrt(std::max(0.0, mse)) / truth * 100.0;
  };

  int used = 0;
  for (int k = 0; k < m; ++k) {
    const DomainSample& ds = samples[k];
    double truth = pop.gamma_true[ds.domain];
    try {
      // The direct estimator of this pipeline is the combined plausible-value
      // mean with its total (imputation-aware) variance; the composite blends
      // that same direct estimate toward the regression-synthetic reference.
      EstimateVar dir{ds.direct.gamma_hat, ds.direct.sigma2_d};
      EstimateVar cal = greg_mean(ds.sample);
      double synthetic = pop.area_cov.row(ds.domain).dot(beta_ols);
      EstimateVar comp = composite_of(dir, ds.sample.n_d(), synthetic, n_bar_design);
      if (!fh_ok) throw NumericalError("area model fit failed");
      accumulate(metrics.sbp_dir, metrics.eerp_dir, truth, dir.estimate, dir.variance);
      accumulate(metrics.sbp_cal, metrics.eerp_cal, truth, cal.estimate, cal.variance);
      accumulate(metrics.sbp_comp, metrics.eerp_comp, truth, comp.estimate, comp.variance);
      accumulate(metrics.sbp_prop, metrics.eerp_prop, truth, fh.eblup[k], fh.mse[k]);
      ++used;
    } catch (const std::exception&) {
      ++metrics.domains_skipped;
    }
  }
  if (used > 0) {
    for (double* v : {&metrics.sbp_dir, &metrics.sbp_cal, &metrics.sbp_comp, &metrics.sbp_prop,
                      &metrics.eerp_dir, &metrics.eerp_cal, &metrics.eerp_comp,
                      &metrics.eerp_prop})
      *v /= used;
  }
  metrics.domains_used = used;
  return metrics;
}

CellSummary aggregate(const SimConfig& config, const std::vector<ReplicateMetrics>& metrics) {
  if (metrics.empty()) throw ValidationError("need at least one replicate to aggregate");
  CellSummary cell;
  cell.missing_rate = config.missing_rate;
  cell.corr_level = config.corr_level;
  cell.f_d = config.f_d;
  cell.f_n = config.f_n;
  for (const auto& m : metrics) {
    cell.eerp_dir += m.eerp_dir;
    cell.eerp_cal += m.eerp_cal;
    cell.eerp_comp += m.eerp_comp;
    cell.eerp_prop += m.eerp_prop;
    cell.sbr_dir += m.sbp_dir;
    cell.sbr_cal += m.sbp_cal;
    cell.sbr_comp += m.sbp_comp;
    cell.sbr_prop += m.sbp_prop;
    cell.domains_skipped += m.domains_skipped;
  }
  const double R = static_cast<double>(metrics.size());
  for (double* v : {&cell.eerp_dir, &cell.eerp_cal, &cell.eerp_comp, &cell.eerp_prop,
                    &cell.sbr_dir, &cell.sbr_cal, &cell.sbr_comp, &cell.sbr_prop})
    *v /= R;
  cell.replicates = static_cast<int>(metrics.size());
  return cell;
}

CellSummary run_cell(const SimConfig& config, const PreparedPopulation& prepared,
                     std::vector<ReplicateMetrics>* per_replicate) {
  std::vector<ReplicateMetrics> metrics;
  metrics.reserve(config.R);
  int dropped = 0;
  for (int r = 0; r < config.R; ++r) {
    ReplicateMetrics m = run_replicate(config, prepared, r);
    if (m.domains_used == 0) {
      ++dropped;
      continue;
    }
    metrics.push_back(m);
  }
  if (metrics.empty())
    throw NumericalError("every replicate failed; the cell has too few usable domains");
  if (per_replicate) *per_replicate = metrics;
  CellSummary cell = aggregate(config, metrics);
  cell.domains_skipped += dropped;
  return cell;
}

std::vector<CellSummary> run_grid(const SimGrid& grid, std::vector<LongRow>* long_rows) {
  std::vector<CellSummary> cells;
  for (double missing : grid.missing_rates) {
    for (CorrLevel corr : grid.corr_levels) {
      SimConfig scenario = grid.base;
      scenario.missing_rate = missing;
      scenario.corr_level = corr;
      PreparedPopulation prepared = prepare_population(scenario);
      for (double f_d : grid.f_d_values) {
        for (double f_n : grid.f_n_values) {
          SimConfig cell_cfg = scenario;
          cell_cfg.f_d = f_d;
          cell_cfg.f_n = f_n;
          std::vector<ReplicateMetrics> per_replicate;
          CellSummary cell = run_cell(cell_cfg, prepared, &per_replicate);
          cells.push_back(cell);
          if (long_rows) {
            for (std::size_t r = 0; r < per_replicate.size(); ++r) {
              const auto& m = per_replicate[r];
              long_rows->push_back({missing, corr, f_d, f_n, static_cast<int>(r), "dir",
                                    m.sbp_dir, m.eerp_dir});
              long_rows->push_back({missing, corr, f_d, f_n, static_cast<int>(r), "cal",
                                    m.sbp_cal, m.eerp_cal});
              long_rows->push_back({missing, corr, f_d, f_n, static_cast<int>(r), "comp",
                                    m.sbp_comp, m.eerp_comp});
              long_rows->push_back({missing, corr, f_d, f_n, static_cast<int>(r), "prop",
                                    m.sbp_prop, m.eerp_prop});
            }
          }
        }
      }
    }
  }
  return cells;
}

}  // namespace sae
