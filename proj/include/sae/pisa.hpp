#pragma once

#include <string>
#include <vector>

namespace sae {

// One country of the bundled PISA 2015 mathematics benchmark: the published
// direct estimate, its sampling variance, the synthetic regression part and
// the published shrinkage results, all at the precision they were printed.
struct PisaRow {
  std::string country;
  double sigma2_d;     // published sampling variance of the direct estimate
  double B;            // published shrinkage factor (2 decimals)
  double xb;           // synthetic part x_d' beta_hat
  double gamma_hat;    // published direct estimate
  double gamma_p;      // published shrinkage estimate
  double g1, g2, g3;   // published MSE components
  double mse;          // published total MSE
  double cve_pct;      // published coefficient of variation of the direct
  double eer_pct;      // published relative error of the shrinkage estimate
  double dif_rel_pct;  // published relative variance reduction
};

// The fixture replays against sigma2_u = 986.58 (the published random-effect
// variance for this benchmark).
double pisa_sigma2_u();

const std::vector<PisaRow>& pisa_fixture();

// Recomputed columns next to their published counterparts. g2 requires the
// raw country covariates, which were never published, so the fixture's g2
// feeds the recomputed MSE unchanged.
struct PisaReplayRow {
  std::string country;
  double B, gamma_p, g1, g3, mse, eer_pct, dif_rel_pct;  // recomputed
  PisaRow printed;
};

struct PisaReplayReport {
  double sigma2_u = 0.0;
  double var_sigma2_u = 0.0;  // REML-form variance over the 55 domains
  std::vector<PisaReplayRow> rows;
};

PisaReplayReport replay_pisa_fixture();
PisaReplayReport replay_pisa_fixture(const std::vector<PisaRow>& fixture);

std::string render_replay_text(const PisaReplayReport& report);
std::string render_replay_csv(const PisaReplayReport& report);
std::string render_fixture_csv();

// Fixture rows parsed back from the CSV schema written by render_fixture_csv.
std::vector<PisaRow> parse_fixture_csv(const std::string& text);

}  // namespace sae
