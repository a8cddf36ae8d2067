#include "sae/io.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sae/csv.hpp"
#include "sae/errors.hpp"

namespace sae {

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
}

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  auto end = s.find_last_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return s.substr(begin, end - begin + 1);
}

// Index of labels in first-appearance order.
int intern(std::vector<std::string>& labels, const std::string& label) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  labels.push_back(label);
  return static_cast<int>(labels.size() - 1);
}

}  // namespace

ResponseData read_response_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  table.require_column("person_id");
  table.require_column("domain_id");
  std::vector<int> item_cols;
  ResponseData data;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].rfind("item_", 0) == 0) {
      item_cols.push_back(static_cast<int>(c));
      data.item_ids.push_back(table.header[c]);
    }
  }
  if (item_cols.empty()) throw SchemaError("no item_* columns found");

  const int N = static_cast<int>(table.rows.size());
  const int I = static_cast<int>(item_cols.size());
  data.matrix.values.resize(N, I);
  data.matrix.domain_of.resize(N);
  data.matrix.person_ids.resize(N);
  for (int rix = 0; rix < N; ++rix) {
    const auto& row = table.rows[rix];
    data.matrix.person_ids[rix] = row[table.column("person_id")];
    data.matrix.domain_of[rix] = intern(data.domain_ids, row[table.column("domain_id")]);
    for (int i = 0; i < I; ++i) {
      const std::string& cell = row[item_cols[i]];
      if (cell == "NA" || cell == "") {
        data.matrix.values(rix, i) = ResponseMatrix::kMissing;
      } else if (cell == "0") {
        data.matrix.values(rix, i) = 0;
      } else if (cell == "1") {
        data.matrix.values(rix, i) = 1;
      } else {
        throw ValueError("response cell must be 0, 1 or NA, got '" + cell + "'", rix + 1,
                         data.item_ids[i]);
      }
    }
  }
  data.matrix.validate();
  return data;
}

void write_response_csv(const std::string& path, const ResponseData& data) {
  std::ostringstream out;
  out << "person_id,domain_id";
  for (const auto& id : data.item_ids) out << ',' << id;
  out << '\n';
  for (int j = 0; j < data.matrix.persons(); ++j) {
    out << data.matrix.person_ids[j] << ',' << data.domain_ids[data.matrix.domain_of[j]];
    for (int i = 0; i < data.matrix.items(); ++i) {
      int cell = data.matrix.values(j, i);
      out << ',' << (cell == ResponseMatrix::kMissing ? "NA" : cell == 1 ? "1" : "0");
    }
    out << '\n';
  }
  write_file(path, out.str());
}

ItemBank read_item_bank_csv(const std::string& path, double scale) {
  CsvTable table = read_csv(path);
  int cid = table.require_column("item_id");
  int ca = table.require_column("a");
  int cb = table.require_column("b");
  int cc = table.require_column("c");
  ItemBank bank;
  long rownum = 1;
  for (const auto& row : table.rows) {
    ItemParams p;
    p.a = parse_double(row[ca], rownum, "a");
    p.b = parse_double(row[cb], rownum, "b");
    p.c = parse_double(row[cc], rownum, "c");
    p.scale = scale;
    bank.ids.push_back(row[cid]);
    bank.items.push_back(p);
    ++rownum;
  }
  bank.validate();
  return bank;
}

void write_item_bank_csv(const std::string& path, const ItemBank& bank) {
  std::ostringstream out;
  out << "item_id,a,b,c\n";
  for (int i = 0; i < bank.size(); ++i) {
    std::string id = bank.ids.empty() ? "item_" + std::to_string(i + 1) : bank.ids[i];
    out << id << ',' << format_double(bank.items[i].a) << ',' << format_double(bank.items[i].b)
        << ',' << format_double(bank.items[i].c) << '\n';
  }
  write_file(path, out.str());
}

LatentRegression read_latent_regression_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  int cterm = table.require_column("term");
  int cvalue = table.require_column("value");
  LatentRegression reg;
  std::vector<double> gamma;
  long rownum = 1;
  for (const auto& row : table.rows) {
    double v = parse_double(row[cvalue], rownum, "value");
    if (row[cterm] == "sigma2")
      reg.sigma2 = v;
    else
      gamma.push_back(v);
    ++rownum;
  }
  reg.gamma = Eigen::Map<Eigen::VectorXd>(gamma.data(), gamma.size());
  reg.validate();
  return reg;
}

void write_latent_regression_csv(const std::string& path, const LatentRegression& reg) {
  std::ostringstream out;
  out << "term,value\n";
  for (Eigen::Index k = 0; k < reg.gamma.size(); ++k)
    out << "gamma_" << k << ',' << format_double(reg.gamma[k]) << '\n';
  out << "sigma2," << format_double(reg.sigma2) << '\n';
  write_file(path, out.str());
}

PvData read_pv_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  table.require_column("person_id");
  table.require_column("domain_id");
  std::vector<int> pv_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c].rfind("pv_", 0) == 0) pv_cols.push_back(static_cast<int>(c));
  if (pv_cols.size() < 2) throw SchemaError("need at least two pv_* columns");

  PvData data;
  const int N = static_cast<int>(table.rows.size());
  data.pvs.draws.resize(N, static_cast<int>(pv_cols.size()));
  data.pvs.domain_of.resize(N);
  data.person_ids.resize(N);
  for (int rix = 0; rix < N; ++rix) {
    const auto& row = table.rows[rix];
    data.person_ids[rix] = row[table.column("person_id")];
    data.pvs.domain_of[rix] = intern(data.domain_ids, row[table.column("domain_id")]);
    for (std::size_t k = 0; k < pv_cols.size(); ++k)
      data.pvs.draws(rix, static_cast<int>(k)) =
          parse_double(row[pv_cols[k]], rix + 1, table.header[pv_cols[k]]);
  }
  data.pvs.validate();
  return data;
}

void write_pv_csv(const std::string& path, const PlausibleValueSet& pvs,
                  const std::vector<std::string>& person_ids,
                  const std::vector<std::string>& domain_ids) {
  std::ostringstream out;
  out << "person_id,domain_id";
  for (int ell = 1; ell <= pvs.imputations(); ++ell) out << ",pv_" << ell;
  out << '\n';
  for (int j = 0; j < pvs.persons(); ++j) {
    out << (person_ids.empty() ? "p" + std::to_string(j + 1) : person_ids[j]) << ','
        << (domain_ids.empty() ? std::to_string(pvs.domain_of[j] + 1)
                               : domain_ids[pvs.domain_of[j]]);
    for (int ell = 0; ell < pvs.imputations(); ++ell)
      out << ',' << format_double(pvs.draws(j, ell));
    out << '\n';
  }
  write_file(path, out.str());
}

void write_area_csv(const std::string& path, const std::vector<AreaEstimate>& estimates,
                    const std::vector<std::string>& domain_ids) {
  std::ostringstream out;
  out << "domain_id,gamma_hat,sigma2_d,within,between,L,n_d\n";
  for (const auto& est : estimates) {
    out << (domain_ids.empty() ? std::to_string(est.domain + 1) : domain_ids[est.domain]) << ','
        << format_double(est.gamma_hat) << ',' << format_double(est.sigma2_d) << ','
        << format_double(est.within) << ',' << format_double(est.between) << ',' << est.L << ','
        << est.n_d << '\n';
  }
  write_file(path, out.str());
}

AreaDesignData read_area_design_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  int cdom = table.require_column("domain_id");
  int cgamma = table.require_column("gamma_hat");
  int csigma = table.require_column("sigma2_d");
  std::vector<int> xcols;
  std::vector<std::string> xnames;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c].rfind("x_", 0) == 0) {
      xcols.push_back(static_cast<int>(c));
      xnames.push_back(table.header[c]);
    }
  if (xcols.empty()) throw SchemaError("no x_* covariate columns found");

  AreaDesignData data;
  const int D = static_cast<int>(table.rows.size());
  data.design.X.resize(D, static_cast<int>(xcols.size()));
  data.design.gamma_hat.resize(D);
  data.design.sigma2.resize(D);
  for (int d = 0; d < D; ++d) {
    const auto& row = table.rows[d];
    data.domain_ids.push_back(row[cdom]);
    double gamma = parse_double(row[cgamma], d + 1, "gamma_hat");
    double sigma2 = parse_double(row[csigma], d + 1, "sigma2_d");
    if (!std::isfinite(gamma)) throw ValueError("non-finite value", d + 1, "gamma_hat");
    if (!std::isfinite(sigma2) || sigma2 <= 0.0)
      throw ValueError("sampling variance must be finite and > 0", d + 1, "sigma2_d");
    data.design.gamma_hat[d] = gamma;
    data.design.sigma2[d] = sigma2;
    for (std::size_t k = 0; k < xcols.size(); ++k) {
      double x = parse_double(row[xcols[k]], d + 1, xnames[k]);
      if (!std::isfinite(x)) throw ValueError("non-finite value", d + 1, xnames[k]);
      data.design.X(d, static_cast<int>(k)) = x;
    }
  }
  data.design.validate();
  return data;
}

void write_area_design_csv(const std::string& path, const AreaDesignData& data) {
  std::ostringstream out;
  out << "domain_id,gamma_hat,sigma2_d";
  for (Eigen::Index k = 0; k < data.design.p(); ++k) out << ",x_" << (k + 1);
  out << '\n';
  for (Eigen::Index d = 0; d < data.design.D(); ++d) {
    out << data.domain_ids[d] << ',' << format_double(data.design.gamma_hat[d]) << ','
        << format_double(data.design.sigma2[d]);
    for (Eigen::Index k = 0; k < data.design.p(); ++k)
      out << ',' << format_double(data.design.X(d, k));
    out << '\n';
  }
  write_file(path, out.str());
}

void write_fh_fit_csv(const std::string& path, const FHFit& fit, const AreaDesign& design,
                      const std::vector<std::string>& domain_ids) {
  QualityMeasures quality = quality_measures(fit, design);
  std::ostringstream out;
  out << "# method = " << to_string(fit.method) << '\n';
  out << "# sigma2_u = " << format_double(fit.sigma2_u) << '\n';
  out << "# var_sigma2_u = " << format_double(fit.var_sigma2_u) << '\n';
  out << "# beta =";
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) out << ' ' << format_double(fit.beta[k]);
  out << '\n';
  out << "domain_id,eblup,B,g1,g2,g3,mse,eer_pct,dif_rel_pct\n";
  for (Eigen::Index d = 0; d < design.D(); ++d) {
    out << (domain_ids.empty() ? std::to_string(d + 1) : domain_ids[d]) << ','
        << format_double(fit.eblup[d]) << ',' << format_double(fit.B[d]) << ','
        << format_double(fit.g1[d]) << ',' << format_double(fit.g2[d]) << ','
        << format_double(fit.g3[d]) << ',' << format_double(fit.mse[d]) << ','
        << format_double(quality.eer_pct[d]) << ',' << format_double(quality.dif_rel_pct[d])
        << '\n';
  }
  write_file(path, out.str());
}

PersonData read_person_data_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  table.require_column("person_id");
  int cdom = table.require_column("domain_id");
  int cval = table.require_column("value");
  int cw = table.column("weight");
  std::vector<int> auxcols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c].rfind("aux_", 0) == 0) auxcols.push_back(static_cast<int>(c));

  PersonData data;
  const int N = static_cast<int>(table.rows.size());
  data.values.resize(N);
  data.weights.resize(N);
  data.aux.resize(N, static_cast<int>(auxcols.size()));
  for (int j = 0; j < N; ++j) {
    const auto& row = table.rows[j];
    int d = intern(data.domain_ids, row[cdom]);
    if (d >= static_cast<int>(data.members.size())) data.members.resize(d + 1);
    data.members[d].push_back(j);
    data.values[j] = parse_double(row[cval], j + 1, "value");
    data.weights[j] = cw < 0 ? 1.0 : parse_double(row[cw], j + 1, "weight");
    for (std::size_t k = 0; k < auxcols.size(); ++k)
      data.aux(j, static_cast<int>(k)) =
          parse_double(row[auxcols[k]], j + 1, table.header[auxcols[k]]);
  }
  return data;
}

DomainAuxData read_domain_aux_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  int cdom = table.require_column("domain_id");
  int cN = table.require_column("N_d");
  std::vector<int> auxcols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c].rfind("aux_", 0) == 0) auxcols.push_back(static_cast<int>(c));

  DomainAuxData data;
  const int D = static_cast<int>(table.rows.size());
  data.N_d.resize(D);
  data.aux_means.resize(D, static_cast<int>(auxcols.size()));
  for (int d = 0; d < D; ++d) {
    const auto& row = table.rows[d];
    data.domain_ids.push_back(row[cdom]);
    data.N_d[d] = parse_double(row[cN], d + 1, "N_d");
    for (std::size_t k = 0; k < auxcols.size(); ++k)
      data.aux_means(d, static_cast<int>(k)) =
          parse_double(row[auxcols[k]], d + 1, table.header[auxcols[k]]);
  }
  return data;
}

void write_sim_results_csv(const std::string& path, const std::vector<CellSummary>& cells) {
  std::ostringstream out;
  out << "missing_rate,corr_level,f_d,f_n,eerp_dir,eerp_cal,eerp_comp,eerp_prop,sbr_prop,"
         "replicates,domains_skipped\n";
  for (const auto& cell : cells) {
    out << format_double(cell.missing_rate) << ',' << to_string(cell.corr_level) << ','
        << format_double(cell.f_d) << ',' << format_double(cell.f_n) << ','
        << format_double(cell.eerp_dir) << ',' << format_double(cell.eerp_cal) << ','
        << format_double(cell.eerp_comp) << ',' << format_double(cell.eerp_prop) << ','
        << format_double(cell.sbr_prop) << ',' << cell.replicates << ','
        << cell.domains_skipped << '\n';
  }
  write_file(path, out.str());
}

void write_sim_long_csv(const std::string& path, const std::vector<LongRow>& rows) {
  std::ostringstream out;
  out << "missing_rate,corr_level,f_d,f_n,replicate,estimator,sbp,eerp\n";
  for (const auto& r : rows) {
    out << format_double(r.missing_rate) << ',' << to_string(r.corr_level) << ','
        << format_double(r.f_d) << ',' << format_double(r.f_n) << ',' << r.replicate << ','
        << r.estimator << ',' << format_double(r.sbp) << ',' << format_double(r.eerp) << '\n';
  }
  write_file(path, out.str());
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : parse_double(it->second, 0, key);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  return static_cast<int>(get_double(key, fallback));
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string token;
  while (std::getline(in, token, ',')) out.push_back(parse_double(trim(token), 0, key));
  return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<std::string> out;
  std::istringstream in(it->second);
  std::string token;
  while (std::getline(in, token, ',')) out.push_back(trim(token));
  return out;
}

KeyValueConfig parse_key_value_config(const std::string& text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  std::ostringstream canonical;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw SchemaError("empty key in configuration");
    config.values[key] = value;
  }
  for (const auto& [key, value] : config.values) canonical << key << '=' << value << '\n';
  config.canonical = canonical.str();
  return config;
}

KeyValueConfig read_key_value_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_value_config(buf.str());
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

RunManifest make_manifest(std::uint64_t seed, const std::string& canonical_config) {
  RunManifest manifest;
  manifest.seed = seed;
  manifest.tool_version = version_string();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config)));
  manifest.config_hash = hex;
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  manifest.created_utc = stamp;
  return manifest;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j;
  j["seed"] = manifest.seed;
  j["tool_version"] = manifest.tool_version;
  j["config_hash"] = manifest.config_hash;
  j["created_utc"] = manifest.created_utc;
  write_file(path, j.dump(2) + "\n");
}

std::string version_string() { return "0.1.0"; }

}  // namespace sae
