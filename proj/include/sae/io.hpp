#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sae/combine.hpp"
#include "sae/fay_herriot.hpp"
#include "sae/item_model.hpp"
#include "sae/latent_regression.hpp"
#include "sae/plausible_values.hpp"
#include "sae/response_data.hpp"
#include "sae/simulation.hpp"

namespace sae {

// ---- response data: person_id,domain_id,item_1..item_I with 0|1|NA cells ----
struct ResponseData {
  ResponseMatrix matrix;
  std::vector<std::string> domain_ids;  // index -> original label
  std::vector<std::string> item_ids;
};

ResponseData read_response_csv(const std::string& path);
void write_response_csv(const std::string& path, const ResponseData& data);

// ---- item bank: item_id,a,b,c ----
ItemBank read_item_bank_csv(const std::string& path, double scale = 1.7);
void write_item_bank_csv(const std::string& path, const ItemBank& bank);

// ---- latent regression: term,value rows ----
LatentRegression read_latent_regression_csv(const std::string& path);
void write_latent_regression_csv(const std::string& path, const LatentRegression& reg);

// ---- plausible values: person_id,domain_id,pv_1..pv_L ----
struct PvData {
  PlausibleValueSet pvs;
  std::vector<std::string> person_ids;
  std::vector<std::string> domain_ids;
};

PvData read_pv_csv(const std::string& path);
void write_pv_csv(const std::string& path, const PlausibleValueSet& pvs,
                  const std::vector<std::string>& person_ids,
                  const std::vector<std::string>& domain_ids);

// ---- combined direct estimates: domain_id,gamma_hat,sigma2_d,within,between,L,n_d ----
void write_area_csv(const std::string& path, const std::vector<AreaEstimate>& estimates,
                    const std::vector<std::string>& domain_ids);

// ---- area-model input: domain_id,gamma_hat,sigma2_d,x_1..x_p ----
struct AreaDesignData {
  AreaDesign design;
  std::vector<std::string> domain_ids;
};

AreaDesignData read_area_design_csv(const std::string& path);
void write_area_design_csv(const std::string& path, const AreaDesignData& data);

// ---- fit output: header block plus domain_id,eblup,B,g1,g2,g3,mse,eer_pct,dif_rel_pct ----
void write_fh_fit_csv(const std::string& path, const FHFit& fit, const AreaDesign& design,
                      const std::vector<std::string>& domain_ids);

// ---- design-based estimates: domain_id,ht,ht_var,cal,cal_var,comp,comp_var ----
struct PersonData {
  std::vector<std::string> domain_ids;       // index -> label
  std::vector<std::vector<int>> members;     // domain -> person rows
  Eigen::VectorXd values, weights;
  Eigen::MatrixXd aux;                       // persons x k (may be 0 columns)
};

PersonData read_person_data_csv(const std::string& path);

struct DomainAuxData {
  std::vector<std::string> domain_ids;
  Eigen::VectorXd N_d;
  Eigen::MatrixXd aux_means;  // domains x k
};

DomainAuxData read_domain_aux_csv(const std::string& path);

// ---- simulation results ----
void write_sim_results_csv(const std::string& path, const std::vector<CellSummary>& cells);
void write_sim_long_csv(const std::string& path, const std::vector<LongRow>& rows);

// ---- key = value configuration ----
struct KeyValueConfig {
  std::map<std::string, std::string> values;
  std::string canonical;  // normalized text, hashed into the run manifest

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<std::string> get_string_list(const std::string& key,
                                           const std::vector<std::string>& fallback) const;
};

KeyValueConfig read_key_value_config(const std::string& path);
KeyValueConfig parse_key_value_config(const std::string& text);

// ---- run manifest ----
std::uint64_t fnv1a64(const std::string& text);

struct RunManifest {
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string config_hash;  // hex fnv1a64 of the canonical config text
  std::string created_utc;  // excluded from determinism guarantees
};

RunManifest make_manifest(std::uint64_t seed, const std::string& canonical_config);
void write_manifest(const std::string& path, const RunManifest& manifest);

std::string version_string();

}  // namespace sae
