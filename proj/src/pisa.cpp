#include "sae/pisa.hpp"

#include <cmath>
#include <sstream>

#include "sae/csv.hpp"
#include "sae/errors.hpp"

namespace sae {

double pisa_sigma2_u() { return 986.58; }

const std::vector<PisaRow>& pisa_fixture() {
  // Published values at printed precision; order as in the source tables.
  //               country              sigma2   B     xb      g^    g^P     g1       g2      g3      mse      cve     eer     difrel
  static const std::vector<PisaRow> rows = {
      {"Albania", 11.90, 0.01, 430.00, 413.00, 413.00, 11.7606, 0.0149, 0.0051, 11.7810, 0.8354, 0.8308, 0.9810},
      {"Germany", 8.35, 0.01, 510.00, 506.00, 506.00, 8.2820, 0.0038, 0.0025, 8.2880, 0.5711, 0.5690, 0.7332},
      {"Australia", 2.59, 0.00, 476.00, 494.00, 494.00, 2.5853, 0.0006, 0.0002, 2.5860, 0.3259, 0.3256, 0.2202},
      {"Austria", 8.18, 0.01, 519.00, 497.00, 497.00, 8.1123, 0.0048, 0.0024, 8.1200, 0.5755, 0.5732, 0.7043},
      {"Belgium", 5.52, 0.01, 496.00, 507.00, 507.00, 5.4918, 0.0011, 0.0011, 5.4940, 0.4635, 0.4624, 0.4953},
      {"Brazil", 8.18, 0.01, 417.00, 377.00, 377.00, 8.1123, 0.0096, 0.0024, 8.1240, 0.7586, 0.7555, 0.6457},
      {"Bulgaria", 15.60, 0.02, 458.00, 441.00, 441.00, 15.3596, 0.0167, 0.0087, 15.3850, 0.8957, 0.8891, 1.3383},
      {"Canada", 5.34, 0.01, 502.00, 516.00, 516.00, 5.3074, 0.0013, 0.0010, 5.3100, 0.4477, 0.4467, 0.4747},
      {"Qatar", 1.61, 0.00, 472.00, 402.00, 402.00, 1.6103, 0.0004, 0.0001, 1.6110, 0.3159, 0.3156, 0.1256},
      {"Chile", 6.45, 0.01, 464.00, 423.00, 423.00, 6.4097, 0.0031, 0.0015, 6.4140, 0.6005, 0.5984, 0.5547},
      {"Colombia", 5.24, 0.01, 359.00, 390.00, 390.00, 5.2164, 0.0145, 0.0010, 5.2320, 0.5872, 0.5868, 0.2132},
      {"Korea", 13.76, 0.01, 529.00, 524.00, 524.00, 13.5747, 0.0281, 0.0068, 13.6100, 0.7080, 0.7041, 1.0728},
      {"Costa Rica", 6.10, 0.01, 416.00, 400.00, 400.00, 6.0634, 0.0045, 0.0014, 6.0690, 0.6175, 0.6158, 0.4957},
      {"Croatia", 7.67, 0.01, 465.00, 464.00, 464.00, 7.6137, 0.0050, 0.0022, 7.6210, 0.5970, 0.5950, 0.6502},
      {"Denmark", 4.71, 0.00, 513.00, 511.00, 511.00, 4.6865, 0.0013, 0.0008, 4.6890, 0.4247, 0.4238, 0.4118},
      {"Arab Emirates", 5.81, 0.01, 461.00, 427.00, 427.00, 5.7741, 0.0016, 0.0012, 5.7770, 0.5644, 0.5627, 0.5146},
      {"Slovakia", 7.08, 0.01, 478.00, 475.00, 475.00, 7.0252, 0.0020, 0.0018, 7.0290, 0.5600, 0.5582, 0.6316},
      {"Slovenia", 1.59, 0.00, 495.00, 510.00, 510.00, 1.5850, 0.0001, 0.0001, 1.5850, 0.2471, 0.2469, 0.1436},
      {"Spain", 4.62, 0.00, 458.00, 486.00, 486.00, 4.6009, 0.0040, 0.0008, 4.6060, 0.4424, 0.4417, 0.3465},
      {"United States", 10.05, 0.01, 505.00, 470.00, 470.00, 9.9476, 0.0050, 0.0037, 9.9560, 0.6745, 0.6710, 0.8854},
      {"Estonia", 4.16, 0.00, 497.00, 520.00, 520.00, 4.1441, 0.0007, 0.0006, 4.1450, 0.3923, 0.3916, 0.3724},
      {"Russian Federation", 9.67, 0.01, 456.00, 494.00, 494.00, 9.5782, 0.0077, 0.0034, 9.5890, 0.6296, 0.6274, 0.8207},
      {"Finland", 5.34, 0.01, 507.00, 511.00, 511.00, 5.3074, 0.0018, 0.0010, 5.3100, 0.4521, 0.4510, 0.4652},
      {"France", 4.41, 0.00, 470.00, 493.00, 493.00, 4.3904, 0.0021, 0.0007, 4.3930, 0.4260, 0.4253, 0.3645},
      {"Greece", 14.06, 0.01, 447.00, 454.00, 454.00, 13.8649, 0.0496, 0.0071, 13.9220, 0.8260, 0.8222, 0.9518},
      {"Hong Kong-China", 8.88, 0.01, 505.00, 548.00, 548.00, 8.8012, 0.0101, 0.0029, 8.8140, 0.5438, 0.5422, 0.7138},
      {"Hungary", 6.40, 0.01, 487.00, 477.00, 477.00, 6.3596, 0.0013, 0.0015, 6.3620, 0.5304, 0.5288, 0.5770},
      {"Indonesia", 9.49, 0.01, 420.00, 386.00, 386.00, 9.3961, 0.0079, 0.0033, 9.4070, 0.7979, 0.7941, 0.7996},
      {"Ireland", 4.20, 0.00, 453.00, 504.00, 504.00, 4.1847, 0.0010, 0.0007, 4.1860, 0.4067, 0.4062, 0.3698},
      {"Iceland", 3.96, 0.00, 542.00, 488.00, 488.00, 3.9443, 0.0045, 0.0006, 3.9490, 0.4078, 0.4071, 0.2573},
      {"Israel", 13.18, 0.01, 512.00, 470.00, 471.00, 13.0032, 0.0311, 0.0062, 13.0410, 0.7723, 0.7676, 0.9874},
      {"Italy", 8.12, 0.01, 469.00, 490.00, 490.00, 8.0562, 0.0024, 0.0024, 8.0610, 0.5816, 0.5797, 0.7283},
      {"Japan", 9.00, 0.01, 519.00, 532.00, 532.00, 8.9186, 0.0063, 0.0029, 8.9280, 0.5639, 0.5619, 0.7682},
      {"Jordan", 7.02, 0.01, 420.00, 380.00, 380.00, 6.9729, 0.0048, 0.0018, 6.9790, 0.6974, 0.6948, 0.5869},
      {"Latvia", 3.50, 0.00, 461.00, 482.00, 482.00, 3.4845, 0.0005, 0.0005, 3.4850, 0.3880, 0.3874, 0.3140},
      {"Lithuania", 5.43, 0.01, 454.00, 478.00, 478.00, 5.3992, 0.0023, 0.0011, 5.4030, 0.4874, 0.4864, 0.4650},
      {"Luxembourg", 1.61, 0.00, 477.00, 486.00, 486.00, 1.6103, 0.0001, 0.0001, 1.6100, 0.2613, 0.2611, 0.1439},
      {"Macao-China", 1.23, 0.00, 491.00, 544.00, 544.00, 1.2306, 0.0002, 0.0001, 1.2310, 0.2040, 0.2040, 0.0966},
      {"Mexico", 5.02, 0.01, 398.00, 408.00, 408.00, 4.9922, 0.0048, 0.0009, 4.9980, 0.5490, 0.5481, 0.3736},
      {"Montenegro", 2.13, 0.00, 437.00, 418.00, 418.00, 2.1270, 0.0005, 0.0002, 2.1280, 0.3493, 0.3489, 0.1740},
      {"Norway", 4.97, 0.01, 482.00, 502.00, 502.00, 4.9480, 0.0020, 0.0009, 4.9510, 0.4442, 0.4434, 0.4253},
      {"New Zealand", 5.15, 0.01, 470.00, 495.00, 495.00, 5.1261, 0.0025, 0.0010, 5.1300, 0.4586, 0.4577, 0.4341},
      {"Netherlands", 4.88, 0.00, 504.00, 512.00, 512.00, 4.8600, 0.0010, 0.0009, 4.8620, 0.4316, 0.4307, 0.4370},
      {"Peru", 7.34, 0.01, 424.00, 387.00, 387.00, 7.2898, 0.0083, 0.0020, 7.3000, 0.7003, 0.6978, 0.5727},
      {"Poland", 5.71, 0.01, 480.00, 504.00, 504.00, 5.6792, 0.0011, 0.0012, 5.6820, 0.4742, 0.4731, 0.5140},
      {"Portugal", 6.20, 0.01, 482.00, 492.00, 492.00, 6.1614, 0.0021, 0.0014, 6.1650, 0.5061, 0.5048, 0.5459},
      {"Czech Republic", 5.76, 0.01, 513.00, 492.00, 492.00, 5.7266, 0.0023, 0.0012, 5.7300, 0.4878, 0.4865, 0.4978},
      {"Romania", 14.36, 0.01, 457.00, 444.00, 444.00, 14.1580, 0.0259, 0.0074, 14.1910, 0.8536, 0.8483, 1.1518},
      {"Singapore", 2.16, 0.00, 511.00, 564.00, 564.00, 2.1562, 0.0002, 0.0002, 2.1570, 0.2606, 0.2604, 0.1922},
      {"Sweden", 10.05, 0.01, 491.00, 494.00, 494.00, 9.9476, 0.0123, 0.0037, 9.9640, 0.6417, 0.6391, 0.8131},
      {"Switzerland", 8.53, 0.01, 519.00, 521.00, 521.00, 8.4533, 0.0058, 0.0026, 8.4620, 0.5605, 0.5584, 0.7269},
      {"Thailand", 9.18, 0.01, 456.00, 415.00, 415.00, 9.0963, 0.0093, 0.0031, 9.1090, 0.7301, 0.7267, 0.7536},
      {"Tunisia", 8.70, 0.01, 355.00, 367.00, 367.00, 8.6264, 0.0234, 0.0028, 8.6530, 0.8038, 0.8019, 0.5419},
      {"Turkey", 17.06, 0.02, 473.00, 420.00, 421.00, 16.7670, 0.0109, 0.0103, 16.7880, 0.9833, 0.9738, 1.5146},
      {"Vietnam", 19.89, 0.02, 439.00, 495.00, 494.00, 19.4985, 0.1504, 0.0139, 19.6630, 0.9010, 0.8981, 1.0803},
  };
  return rows;
}

PisaReplayReport replay_pisa_fixture() { return replay_pisa_fixture(pisa_fixture()); }

PisaReplayReport replay_pisa_fixture(const std::vector<PisaRow>& fixture) {
  if (fixture.empty()) throw ValidationError("fixture is empty");
  PisaReplayReport report;
  report.sigma2_u = pisa_sigma2_u();

  double inv_sq_sum = 0.0;
  for (const auto& row : fixture) {
    double v = report.sigma2_u + row.sigma2_d;
    inv_sq_sum += 1.0 / (v * v);
  }
  report.var_sigma2_u = 2.0 / inv_sq_sum;

  report.rows.reserve(fixture.size());
  for (const auto& row : fixture) {
    double v = report.sigma2_u + row.sigma2_d;
    PisaReplayRow out;
    out.country = row.country;
    out.printed = row;
    out.B = row.sigma2_d / v;
    out.gamma_p = (1.0 - out.B) * row.gamma_hat + out.B * row.xb;
    out.g1 = row.sigma2_d * (1.0 - out.B);
    out.g3 = std::pow(row.sigma2_d, 2) / std::pow(v, 3) * report.var_sigma2_u;
    out.mse = out.g1 + row.g2 + 2.0 * out.g3;
    out.eer_pct = std::sqrt(out.mse) / out.gamma_p * 100.0;
    out.dif_rel_pct = (row.sigma2_d - out.mse) / row.sigma2_d * 100.0;
    report.rows.push_back(out);
  }
  return report;
}

std::string render_replay_text(const PisaReplayReport& report) {
  std::ostringstream out;
  out << "shrinkage replay against published values (sigma2_u = "
      << format_double(report.sigma2_u) << ", Var(sigma2_u) = "
      << format_fixed(report.var_sigma2_u, 2) << ")\n\n";
  auto pad = [](const std::string& s, std::size_t width) {
    return s.size() >= width ? s + "  " : s + std::string(width - s.size(), ' ');
  };
  auto cell = [&](double value, int decimals, double printed, int printed_decimals,
                  std::size_t width) {
    return pad(format_fixed(value, decimals) + " (" + format_fixed(printed, printed_decimals) +
                   ")",
               width);
  };
  out << pad("country", 20) << pad("gamma_p (pub)", 16) << pad("B (pub)", 16)
      << pad("g1 (pub)", 19) << pad("mse (pub)", 19) << pad("eer% (pub)", 18)
      << pad("difrel% (pub)", 18) << '\n';
  for (const auto& r : report.rows) {
    out << pad(r.country, 20) << cell(r.gamma_p, 1, r.printed.gamma_p, 0, 16)
        << cell(r.B, 4, r.printed.B, 2, 16) << cell(r.g1, 4, r.printed.g1, 4, 19)
        << cell(r.mse, 4, r.printed.mse, 4, 19) << cell(r.eer_pct, 4, r.printed.eer_pct, 4, 18)
        << cell(r.dif_rel_pct, 4, r.printed.dif_rel_pct, 4, 18) << '\n';
  }
  return out.str();
}

std::string render_replay_csv(const PisaReplayReport& report) {
  std::ostringstream out;
  out << "# sigma2_u = " << format_double(report.sigma2_u) << "\n";
  out << "# var_sigma2_u = " << format_double(report.var_sigma2_u) << "\n";
  out << "country,B,gamma_p,g1,g3,mse,eer_pct,dif_rel_pct,"
         "B_pub,gamma_p_pub,g1_pub,mse_pub,eer_pct_pub,dif_rel_pct_pub\n";
  for (const auto& r : report.rows) {
    out << r.country << ',' << format_double(r.B) << ',' << format_double(r.gamma_p) << ','
        << format_double(r.g1) << ',' << format_double(r.g3) << ',' << format_double(r.mse)
        << ',' << format_double(r.eer_pct) << ',' << format_double(r.dif_rel_pct) << ','
        << format_double(r.printed.B) << ',' << format_double(r.printed.gamma_p) << ','
        << format_double(r.printed.g1) << ',' << format_double(r.printed.mse) << ','
        << format_double(r.printed.eer_pct) << ',' << format_double(r.printed.dif_rel_pct)
        << '\n';
  }
  return out.str();
}

std::string render_fixture_csv() {
  std::ostringstream out;
  out << "country,sigma2_d,B,xb,gamma_hat,gamma_p,g1,g2,g3,mse,cve_pct,eer_pct,dif_rel_pct\n";
  for (const auto& r : pisa_fixture()) {
    out << r.country << ',' << format_fixed(r.sigma2_d, 2) << ',' << format_fixed(r.B, 2) << ','
        << format_fixed(r.xb, 2) << ',' << format_fixed(r.gamma_hat, 2) << ','
        << format_fixed(r.gamma_p, 2) << ',' << format_fixed(r.g1, 4) << ','
        << format_fixed(r.g2, 4) << ',' << format_fixed(r.g3, 4) << ','
        << format_fixed(r.mse, 4) << ',' << format_fixed(r.cve_pct, 4) << ','
        << format_fixed(r.eer_pct, 4) << ',' << format_fixed(r.dif_rel_pct, 4) << '\n';
  }
  return out.str();
}

std::vector<PisaRow> parse_fixture_csv(const std::string& text) {
  CsvTable table = parse_csv(text);
  const char* names[] = {"country", "sigma2_d", "B", "xb", "gamma_hat", "gamma_p",
                         "g1", "g2", "g3", "mse", "cve_pct", "eer_pct", "dif_rel_pct"};
  for (const char* name : names) table.require_column(name);
  std::vector<PisaRow> rows;
  rows.reserve(table.rows.size());
  long rownum = 1;
  for (const auto& fields : table.rows) {
    auto get = [&](const char* name) {
      return parse_double(fields[table.column(name)], rownum, name);
    };
    PisaRow r;
    r.country = fields[table.column("country")];
    r.sigma2_d = get("sigma2_d");
    r.B = get("B");
    r.xb = get("xb");
    r.gamma_hat = get("gamma_hat");
    r.gamma_p = get("gamma_p");
    r.g1 = get("g1");
    r.g2 = get("g2");
    r.g3 = get("g3");
    r.mse = get("mse");
    r.cve_pct = get("cve_pct");
    r.eer_pct = get("eer_pct");
    r.dif_rel_pct = get("dif_rel_pct");
    rows.push_back(r);
    ++rownum;
  }
  return rows;
}

}  // namespace sae
