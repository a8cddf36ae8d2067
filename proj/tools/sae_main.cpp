// Command-line front end: calibration, plausible values, combining,
// area-level fitting, design-based estimates, the simulation study and the
// benchmark replay. Exit codes: 0 success, 1 validation/usage error,
// 2 numerical failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "sae/combine.hpp"
#include "sae/csv.hpp"
#include "sae/em.hpp"
#include "sae/errors.hpp"
#include "sae/fay_herriot.hpp"
#include "sae/io.hpp"
#include "sae/pisa.hpp"
#include "sae/plausible_values.hpp"
#include "sae/simulation.hpp"
#include "sae/survey.hpp"

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SAE_SEED")) return std::strtoull(env, nullptr, 10);
  return 2015;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sae::ValidationError("cannot write file: " + path);
  out << content;
}

// Sidecar manifest next to an output file; <out>.manifest.json records the
// seed and a hash of the effective configuration.
void emit_manifest(const std::string& out_path, std::uint64_t seed,
                   const std::string& canonical_config) {
  sae::write_manifest(out_path + ".manifest.json", sae::make_manifest(seed, canonical_config));
}

Eigen::MatrixXd load_covariates(const std::string& path, int persons) {
  if (path.empty()) return Eigen::MatrixXd();
  sae::CsvTable table = sae::read_csv(path);
  if (static_cast<int>(table.rows.size()) != persons)
    throw sae::ValidationError("covariate rows do not match the response file");
  std::vector<int> cols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c] != "person_id") cols.push_back(static_cast<int>(c));
  Eigen::MatrixXd W(persons, cols.size() + 1);
  W.col(0).setOnes();
  for (int j = 0; j < persons; ++j)
    for (std::size_t k = 0; k < cols.size(); ++k)
      W(j, k + 1) = sae::parse_double(table.rows[j][cols[k]], j + 1, table.header[cols[k]]);
  return W;
}

// Markdown rendering of a CSV (used by `report --format md`).
std::string csv_to_markdown(const std::string& csv_text) {
  sae::CsvTable table = sae::parse_csv(csv_text);
  std::ostringstream out;
  auto emit_row = [&](const std::vector<std::string>& fields) {
    out << '|';
    for (const auto& f : fields) out << ' ' << f << " |";
    out << '\n';
  };
  emit_row(table.header);
  out << '|';
  for (std::size_t i = 0; i < table.header.size(); ++i) out << " --- |";
  out << '\n';
  for (const auto& row : table.rows) emit_row(row);
  return out.str();
}

int run(int argc, char** argv) {
  CLI::App app{"small-area ability estimation toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = default_seed();
  app.add_option("--seed", seed, "seed for all random draws (env SAE_SEED overrides default)");

  auto* c_cal = app.add_subcommand("calibrate", "fit item parameters and the conditioning model");
  std::string cal_in, cal_cov, cal_items = "items.csv", cal_latreg = "latent_regression.csv";
  bool cal_guessing = false;
  double cal_scale = 1.7;
  c_cal->add_option("--in", cal_in, "response CSV (person_id,domain_id,item_*)")->required();
  c_cal->add_option("--covariates", cal_cov, "person covariate CSV (person_id + numeric columns)");
  c_cal->add_option("--out-items", cal_items, "item bank CSV to write");
  c_cal->add_option("--out-latreg", cal_latreg, "conditioning model CSV to write");
  c_cal->add_flag("--estimate-guessing", cal_guessing, "free the guessing parameter (penalized)");
  c_cal->add_option("--scale", cal_scale, "logistic scale constant");

  auto* c_pv = app.add_subcommand("pv", "draw plausible values");
  std::string pv_in, pv_items, pv_latreg, pv_cov, pv_out = "plausible_values.csv";
  int pv_L = 5;
  c_pv->add_option("--in", pv_in, "response CSV")->required();
  c_pv->add_option("--items", pv_items, "item bank CSV")->required();
  c_pv->add_option("--latreg", pv_latreg, "conditioning model CSV")->required();
  c_pv->add_option("--covariates", pv_cov, "person covariate CSV");
  c_pv->add_option("--L", pv_L, "number of plausible values");
  c_pv->add_option("--out", pv_out, "plausible value CSV to write");

  auto* c_comb = app.add_subcommand("combine", "pool plausible values into direct estimates");
  std::string comb_in, comb_sizes, comb_out = "areas.csv";
  c_comb->add_option("--in", comb_in, "plausible value CSV")->required();
  c_comb->add_option("--domain-sizes", comb_sizes,
                     "optional domain_id,N_d CSV for finite-population corrections");
  c_comb->add_option("--out", comb_out, "area estimate CSV to write");

  auto* c_fit = app.add_subcommand("fit-fh", "fit the area-level model");
  std::string fit_in, fit_out = "fh_fit.csv", fit_method = "reml";
  c_fit->add_option("--in", fit_in, "area design CSV (domain_id,gamma_hat,sigma2_d,x_*)")
      ->required();
  c_fit->add_option("--method", fit_method, "prasad-rao, ml or reml");
  c_fit->add_option("--out", fit_out, "fit CSV to write");

  auto* c_est = app.add_subcommand("estimate", "design-based comparison estimators");
  std::string est_in, est_aux, est_out = "estimates.csv";
  c_est->add_option("--in", est_in, "person CSV (person_id,domain_id,value[,weight,aux_*])")
      ->required();
  c_est->add_option("--domain-aux", est_aux, "domain CSV (domain_id,N_d,aux_*)")->required();
  c_est->add_option("--out", est_out, "per-domain estimate CSV to write");

  auto* c_sim = app.add_subcommand("simulate", "run the sampling study grid");
  std::string sim_config, sim_out = "results.csv";
  bool sim_plots = false;
  c_sim->add_option("--config", sim_config, "key = value configuration file")->required();
  c_sim->add_option("--out", sim_out, "cell summary CSV to write");
  c_sim->add_flag("--emit-plots", sim_plots, "also write a long-format per-replicate CSV");

  auto* c_replay = app.add_subcommand("replay-pisa", "recompute the bundled benchmark");
  std::string replay_fixture, replay_out, replay_format = "text";
  c_replay->add_option("--fixture", replay_fixture, "fixture CSV (defaults to the bundled table)");
  c_replay->add_option("--out", replay_out, "write the side-by-side CSV here");
  c_replay->add_option("--format", replay_format, "stdout format: text or csv");

  auto* c_report = app.add_subcommand("report", "render a result CSV");
  std::string report_in, report_out, report_format = "md";
  c_report->add_option("--in", report_in, "CSV produced by another subcommand")->required();
  c_report->add_option("--format", report_format, "md or csv");
  c_report->add_option("--out", report_out, "write here instead of stdout");

  // global options like --seed may appear after the subcommand name
  for (auto* sub : {c_cal, c_pv, c_comb, c_fit, c_est, c_sim, c_replay, c_report})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems exit 1; --help exits 0
  }

  if (c_cal->parsed()) {
    sae::ResponseData data = sae::read_response_csv(cal_in);
    Eigen::MatrixXd W = load_covariates(cal_cov, data.matrix.persons());
    sae::EmConfig config;
    config.estimate_guessing = cal_guessing;
    config.item_scale = cal_scale;
    sae::EmResult result = sae::calibrate_em(data.matrix, W, config);
    if (!result.converged_items)
      std::cerr << "warning: item calibration hit the iteration cap; best iterate written\n";
    result.bank.ids = data.item_ids;
    sae::write_item_bank_csv(cal_items, result.bank);
    sae::write_latent_regression_csv(cal_latreg, result.latreg);
    emit_manifest(cal_items, seed, "calibrate\nin=" + cal_in + "\n");
    std::cout << "calibrated " << result.bank.size() << " items over "
              << data.matrix.persons() << " persons\n";
  } else if (c_pv->parsed()) {
    sae::ResponseData data = sae::read_response_csv(pv_in);
    sae::ItemBank bank = sae::read_item_bank_csv(pv_items);
    sae::LatentRegression reg = sae::read_latent_regression_csv(pv_latreg);
    Eigen::MatrixXd W = load_covariates(pv_cov, data.matrix.persons());
    sae::PlausibleValueSet pvs =
        sae::draw_plausible_values(data.matrix, bank, reg, W, pv_L, seed);
    sae::write_pv_csv(pv_out, pvs, data.matrix.person_ids, data.domain_ids);
    emit_manifest(pv_out, seed, "pv\nin=" + pv_in + "\nL=" + std::to_string(pv_L) + "\n");
    std::cout << "wrote " << pv_L << " plausible values for " << pvs.persons() << " persons\n";
  } else if (c_comb->parsed()) {
    sae::PvData data = sae::read_pv_csv(comb_in);
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(data.pvs.persons());
    std::vector<double> domain_N(data.domain_ids.size(), 0.0);
    if (!comb_sizes.empty()) {
      sae::CsvTable sizes = sae::read_csv(comb_sizes);
      int cdom = sizes.require_column("domain_id");
      int cN = sizes.require_column("N_d");
      for (std::size_t r = 0; r < sizes.rows.size(); ++r)
        for (std::size_t d = 0; d < data.domain_ids.size(); ++d)
          if (sizes.rows[r][cdom] == data.domain_ids[d])
            domain_N[d] = sae::parse_double(sizes.rows[r][cN], r + 1, "N_d");
    }
    std::vector<sae::AreaEstimate> estimates;
    for (int d = 0; d < data.pvs.domains(); ++d) {
      int n_d = 0;
      for (int j = 0; j < data.pvs.persons(); ++j)
        if (data.pvs.domain_of[j] == d) ++n_d;
      double f = domain_N[d] > 0.0 ? n_d / domain_N[d] : 0.0;
      std::vector<std::pair<double, double>> per_imputation;
      for (int ell = 0; ell < data.pvs.imputations(); ++ell)
        per_imputation.push_back(
            sae::domain_pv_mean(data.pvs, weights, d, ell, sae::srs_variance(f)));
      estimates.push_back(sae::rubin_combine(per_imputation, d, n_d));
    }
    sae::write_area_csv(comb_out, estimates, data.domain_ids);
    emit_manifest(comb_out, seed, "combine\nin=" + comb_in + "\n");
    std::cout << "combined " << estimates.size() << " domains\n";
  } else if (c_fit->parsed()) {
    sae::AreaDesignData data = sae::read_area_design_csv(fit_in);
    sae::VarianceMethod method = sae::variance_method_from_string(fit_method);
    sae::FHFit fit = sae::fit_fh(data.design, method);
    sae::write_fh_fit_csv(fit_out, fit, data.design, data.domain_ids);
    emit_manifest(fit_out, seed, "fit-fh\nin=" + fit_in + "\nmethod=" + fit_method + "\n");
    std::cout << "fitted " << data.design.D() << " domains; sigma2_u = "
              << sae::format_double(fit.sigma2_u) << "\n";
  } else if (c_est->parsed()) {
    sae::PersonData persons = sae::read_person_data_csv(est_in);
    sae::DomainAuxData aux = sae::read_domain_aux_csv(est_aux);
    std::ostringstream out;
    out << "domain_id,ht,ht_var,cal,cal_var,comp,comp_var\n";

    const int D = static_cast<int>(persons.domain_ids.size());
    std::vector<sae::SampleDomain> domains(D);
    double n_bar = 0.0;
    for (int d = 0; d < D; ++d) {
      const auto& members = persons.members[d];
      sae::SampleDomain& dom = domains[d];
      dom.domain = d;
      dom.values.resize(members.size());
      dom.weights.resize(members.size());
      dom.aux_sample.resize(members.size(), persons.aux.cols());
      for (std::size_t i = 0; i < members.size(); ++i) {
        dom.values[i] = persons.values[members[i]];
        dom.weights[i] = persons.weights[members[i]];
        dom.aux_sample.row(i) = persons.aux.row(members[i]);
      }
      for (std::size_t a = 0; a < aux.domain_ids.size(); ++a)
        if (aux.domain_ids[a] == persons.domain_ids[d]) {
          dom.N_d = aux.N_d[a];
          dom.aux_pop_means = aux.aux_means.row(a).transpose();
        }
      n_bar += dom.n_d();
    }
    n_bar /= D;

    // Synthetic reference: OLS of the HT means on the known domain auxiliaries.
    Eigen::MatrixXd X(D, aux.aux_means.cols() + 1);
    Eigen::VectorXd ht(D);
    for (int d = 0; d < D; ++d) {
      X(d, 0) = 1.0;
      X.row(d).tail(aux.aux_means.cols()) = domains[d].aux_pop_means.transpose();
      ht[d] = sae::ht_mean(domains[d]).estimate;
    }
    Eigen::VectorXd beta_ols = X.colPivHouseholderQr().solve(ht);

    for (int d = 0; d < D; ++d) {
      sae::EstimateVar htv = sae::ht_mean(domains[d]);
      sae::EstimateVar cal = sae::greg_mean(domains[d]);
      double synthetic = X.row(d).dot(beta_ols);
      sae::EstimateVar comp = sae::composite_of(htv, domains[d].n_d(), synthetic, n_bar);
      out << persons.domain_ids[d] << ',' << sae::format_double(htv.estimate) << ','
          << sae::format_double(htv.variance) << ',' << sae::format_double(cal.estimate) << ','
          << sae::format_double(cal.variance) << ',' << sae::format_double(comp.estimate) << ','
          << sae::format_double(comp.variance) << '\n';
    }
    write_text(est_out, out.str());
    emit_manifest(est_out, seed, "estimate\nin=" + est_in + "\n");
    std::cout << "estimated " << D << " domains\n";
  } else if (c_sim->parsed()) {
    sae::KeyValueConfig config = sae::read_key_value_config(sim_config);
    for (const auto& [key, value] : config.values) {
      static const std::set<std::string> known = {"N",    "I",   "D",   "L",          "R",
                                                  "seed", "f_d", "f_n", "missing_rate",
                                                  "corr_level"};
      if (!known.count(key))
        throw sae::ValidationError("unknown configuration key '" + key + "'");
    }
    sae::SimGrid grid;
    grid.base.N = config.get_int("N", grid.base.N);
    grid.base.I = config.get_int("I", grid.base.I);
    grid.base.D = config.get_int("D", grid.base.D);
    grid.base.L = config.get_int("L", grid.base.L);
    grid.base.R = config.get_int("R", grid.base.R);
    grid.base.seed = config.has("seed")
                         ? static_cast<std::uint64_t>(config.get_double("seed", 0))
                         : seed;
    grid.missing_rates = config.get_double_list("missing_rate", grid.missing_rates);
    grid.f_d_values = config.get_double_list("f_d", grid.f_d_values);
    grid.f_n_values = config.get_double_list("f_n", grid.f_n_values);
    grid.corr_levels.clear();
    for (const auto& name : config.get_string_list("corr_level", {"high"}))
      grid.corr_levels.push_back(sae::corr_level_from_string(name));

    std::vector<sae::LongRow> long_rows;
    std::vector<sae::CellSummary> cells =
        sae::run_grid(grid, sim_plots ? &long_rows : nullptr);
    sae::write_sim_results_csv(sim_out, cells);
    emit_manifest(sim_out, grid.base.seed, config.canonical);
    if (sim_plots) {
      std::string long_path = sim_out;
      auto dot = long_path.rfind('.');
      long_path = (dot == std::string::npos ? long_path : long_path.substr(0, dot)) +
                  "_long.csv";
      sae::write_sim_long_csv(long_path, long_rows);
      std::cout << "wrote " << long_rows.size() << " long-format rows to " << long_path << "\n";
    }
    std::cout << "wrote " << cells.size() << " grid cells to " << sim_out << "\n";
  } else if (c_replay->parsed()) {
    sae::PisaReplayReport report;
    if (replay_fixture.empty()) {
      report = sae::replay_pisa_fixture();
    } else {
      std::ifstream in(replay_fixture);
      if (!in) throw sae::ValidationError("cannot open file: " + replay_fixture);
      std::ostringstream buf;
      buf << in.rdbuf();
      report = sae::replay_pisa_fixture(sae::parse_fixture_csv(buf.str()));
    }
    std::cout << (replay_format == "csv" ? sae::render_replay_csv(report)
                                         : sae::render_replay_text(report));
    if (!replay_out.empty()) {
      write_text(replay_out, sae::render_replay_csv(report));
      emit_manifest(replay_out, seed, "replay-pisa\n");
    }
  } else if (c_report->parsed()) {
    std::ifstream in(report_in);
    if (!in) throw sae::ValidationError("cannot open file: " + report_in);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string rendered =
        report_format == "csv" ? buf.str() : csv_to_markdown(buf.str());
    if (report_out.empty())
      std::cout << rendered;
    else
      write_text(report_out, rendered);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sae::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const sae::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
