#include "sae/fay_herriot.hpp"

#include <algorithm>
#include <cmath>

namespace sae {

std::string to_string(VarianceMethod method) {
  switch (method) {
    case VarianceMethod::PrasadRao: return "prasad-rao";
    case VarianceMethod::ML: return "ml";
    case VarianceMethod::REML: return "reml";
  }
  return "unknown";
}

VarianceMethod variance_method_from_string(const std::string& name) {
  if (name == "prasad-rao" || name == "pr") return VarianceMethod::PrasadRao;
  if (name == "ml") return VarianceMethod::ML;
  if (name == "reml") return VarianceMethod::REML;
  throw ValidationError("unknown variance method '" + name + "' (expected prasad-rao, ml, reml)");
}

void AreaDesign::validate() const {
  if (gamma_hat.size() != D() || sigma2.size() != D())
    throw ValidationError("design vectors must have one entry per domain");
  if (D() <= p()) throw ValidationError("need more domains than regression coefficients");
  if (!X.allFinite() || !gamma_hat.allFinite() || !sigma2.allFinite())
    throw ValidationError("design contains non-finite values");
  if ((sigma2.array() <= 0.0).any())
    throw ValidationError("sampling variances must be > 0");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p()) throw RankError("area covariate matrix is rank deficient");
}

namespace {

Eigen::VectorXd total_variance(const AreaDesign& design, double sigma2_u) {
  return design.sigma2.array() + sigma2_u;
}

// Solves the weighted normal equations; throws SingularDesign when X'WX is
// numerically singular.
Eigen::VectorXd weighted_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w) {
  Eigen::MatrixXd Xw = w.cwiseSqrt().asDiagonal() * X;
  Eigen::VectorXd yw = w.cwiseSqrt().asDiagonal() * y;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  if (qr.rank() < X.cols()) throw SingularDesign("weighted design matrix is rank deficient");
  return qr.solve(yw);
}

// Var(sigma2_u_hat) under the moment estimator:
//   (2/D) [ s^4 + (2 s^2 / D) sum sigma_d^2 + (1/D) sum sigma_d^4 ].
double var_sigma2_u_moment(const AreaDesign& design, double sigma2_u) {
  const double D = static_cast<double>(design.D());
  double sum2 = design.sigma2.sum();
  double sum4 = design.sigma2.array().square().sum();
  return (2.0 / D) *
         (sigma2_u * sigma2_u + (2.0 * sigma2_u / D) * sum2 + sum4 / D);
}

// Var(sigma2_u_hat) under ML/REML: 2 [ sum (sigma2_u + sigma_d^2)^{-2} ]^{-1}.
double var_sigma2_u_likelihood(const AreaDesign& design, double sigma2_u) {
  double s = (design.sigma2.array() + sigma2_u).square().inverse().sum();
  return 2.0 / s;
}

double prasad_rao_point(const AreaDesign& design) {
  const auto D = design.D();
  const auto p = design.p();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
  if (qr.rank() < p) throw SingularDesign("covariate matrix is rank deficient");
  Eigen::VectorXd beta_ols = qr.solve(design.gamma_hat);
  Eigen::VectorXd resid = design.gamma_hat - design.X * beta_ols;

  // E[sum e_d^2] = sigma2_u (D - p) + sum sigma_d^2 (1 - h_dd)
  Eigen::MatrixXd XtX_inv = (design.X.transpose() * design.X).inverse();
  double adjust = 0.0;
  for (Eigen::Index d = 0; d < D; ++d) {
    double h = design.X.row(d) * XtX_inv * design.X.row(d).transpose();
    adjust += design.sigma2[d] * (1.0 - h);
  }
  double est = (resid.squaredNorm() - adjust) / static_cast<double>(D - p);
  return std::max(0.0, est);
}

struct ScoreInfo {
  double score = 0.0;
  double info = 0.0;
};

ScoreInfo ml_score_info(const AreaDesign& design, double sigma2_u) {
  Eigen::VectorXd v = total_variance(design, sigma2_u);
  Eigen::VectorXd w = v.cwiseInverse();
  Eigen::VectorXd beta = weighted_ls(design.X, design.gamma_hat, w);
  Eigen::VectorXd r = design.gamma_hat - design.X * beta;
  ScoreInfo out;
  out.score = -0.5 * w.sum() + 0.5 * (r.array().square() * w.array().square()).sum();
  out.info = 0.5 * w.array().square().sum();
  return out;
}

ScoreInfo reml_score_info(const AreaDesign& design, double sigma2_u) {
  Eigen::VectorXd v = total_variance(design, sigma2_u);
  Eigen::VectorXd w = v.cwiseInverse();
  Eigen::MatrixXd XtWX = design.X.transpose() * w.asDiagonal() * design.X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(XtWX);
  if (ldlt.info() != Eigen::Success)
    throw SingularDesign("X' V^-1 X is singular in the REML score");
  // P = W - W X (X'WX)^{-1} X' W, applied without forming the D x D matrix.
  Eigen::MatrixXd WX = w.asDiagonal() * design.X;                 // D x p
  Eigen::MatrixXd S = ldlt.solve(WX.transpose());                 // p x D
  Eigen::VectorXd Py = w.asDiagonal() * design.gamma_hat - WX * (S * design.gamma_hat);
  Eigen::MatrixXd SWX = S * WX;  // p x p
  double trP = w.sum() - SWX.trace();
  // tr(P^2) = tr(W^2) - 2 tr(S W WX) + tr((S WX)^2), all through p x p products.
  double trP2 = w.array().square().sum() - 2.0 * (S * (w.asDiagonal() * WX)).trace() +
                (SWX * SWX).trace();
  ScoreInfo out;
  out.score = -0.5 * trP + 0.5 * Py.squaredNorm();
  out.info = 0.5 * trP2;
  return out;
}

}  // namespace

Eigen::VectorXd gls_beta(const AreaDesign& design, double sigma2_u) {
  design.validate();
  if (sigma2_u < 0.0) throw ValidationError("sigma2_u must be >= 0");
  Eigen::VectorXd w = total_variance(design, sigma2_u).cwiseInverse();
  return weighted_ls(design.X, design.gamma_hat, w);
}

Sigma2uEstimate estimate_sigma2_u(const AreaDesign& design, VarianceMethod method, double tol,
                                  int max_iter) {
  design.validate();
  if (design.D() < design.p() + 2)
    throw ValidationError("variance component needs at least p + 2 domains");

  Sigma2uEstimate out;
  if (method == VarianceMethod::PrasadRao) {
    out.sigma2_u = prasad_rao_point(design);
    out.var_sigma2_u = var_sigma2_u_moment(design, out.sigma2_u);
    return out;
  }

  // Fisher scoring from the moment estimate; the boundary at zero is handled
  // by clamping and stopping once the score points outward.
  double sigma2_u = std::max(prasad_rao_point(design), 0.0);
  bool converged = false;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    ScoreInfo si = method == VarianceMethod::ML ? ml_score_info(design, sigma2_u)
                                                : reml_score_info(design, sigma2_u);
    if (sigma2_u == 0.0 && si.score <= 0.0) {
      converged = true;
      break;
    }
    double step = si.score / si.info;
    double next = std::max(0.0, sigma2_u + step);
    double delta = std::abs(next - sigma2_u);
    sigma2_u = next;
    if (delta < tol * (1.0 + sigma2_u)) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) throw NonConvergence("Fisher scoring did not converge in " +
                                       std::to_string(max_iter) + " iterations");
  out.sigma2_u = sigma2_u;
  out.var_sigma2_u = var_sigma2_u_likelihood(design, sigma2_u);
  out.iterations = iter;
  return out;
}

BlupResult eblup(const AreaDesign& design, const Eigen::VectorXd& beta, double sigma2_u) {
  if (beta.size() != design.p()) throw ValidationError("beta has wrong dimension");
  if (sigma2_u < 0.0) throw ValidationError("sigma2_u must be >= 0");
  BlupResult out;
  Eigen::VectorXd synthetic = design.X * beta;
  out.B = design.sigma2.array() / (design.sigma2.array() + sigma2_u);
  out.eblup =
      (1.0 - out.B.array()) * design.gamma_hat.array() + out.B.array() * synthetic.array();
  out.u_hat = (1.0 - out.B.array()) * (design.gamma_hat - synthetic).array();
  return out;
}

MseComponents mse_components(const AreaDesign& design, double sigma2_u, double var_sigma2_u) {
  Eigen::VectorXd v = total_variance(design, sigma2_u);
  MseComponents out;
  out.g1 = sigma2_u * design.sigma2.array() / v.array();

  // F = sum_d x_d x_d' / (sigma2_u + sigma_d^2)
  Eigen::MatrixXd F = design.X.transpose() * v.cwiseInverse().asDiagonal() * design.X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(F);
  if (ldlt.info() != Eigen::Success) throw SingularDesign("information matrix F is singular");
  out.g2.resize(design.D());
  out.g3.resize(design.D());
  for (Eigen::Index d = 0; d < design.D(); ++d) {
    double B = design.sigma2[d] / v[d];
    Eigen::VectorXd x = design.X.row(d).transpose();
    double a = x.dot(ldlt.solve(x));
    out.g2[d] = B * B * a;
    out.g3[d] = std::pow(design.sigma2[d], 2) / std::pow(v[d], 3) * var_sigma2_u;
  }
  return out;
}

double ml_bias_b(const AreaDesign& design, double sigma2_u) {
  Eigen::VectorXd v = total_variance(design, sigma2_u);
  Eigen::VectorXd w1 = v.cwiseInverse();
  Eigen::VectorXd w2 = w1.array().square();
  Eigen::MatrixXd F1 = design.X.transpose() * w1.asDiagonal() * design.X;
  Eigen::MatrixXd F2 = design.X.transpose() * w2.asDiagonal() * design.X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(F1);
  if (ldlt.info() != Eigen::Success) throw SingularDesign("information matrix is singular");
  double trace = ldlt.solve(F2).trace();
  return -trace / w2.sum();
}

Eigen::VectorXd mse_total(const MseComponents& components, VarianceMethod method,
                          const AreaDesign& design, const FHFit& state) {
  if (method != state.method)
    throw MethodMismatch("MSE components were computed under " + to_string(state.method) +
                         ", requested " + to_string(method));
  Eigen::VectorXd mse = components.g1 + components.g2 + 2.0 * components.g3;
  if (method == VarianceMethod::ML) {
    Eigen::VectorXd v = total_variance(design, state.sigma2_u);
    Eigen::VectorXd grad_g1 = design.sigma2.array().square() / v.array().square();
    mse -= ml_bias_b(design, state.sigma2_u) * grad_g1;
  }
  return mse;
}

QualityMeasures quality_measures(const FHFit& fit, const AreaDesign& design) {
  QualityMeasures out;
  out.eer_pct.resize(fit.eblup.size());
  out.dif_rel_pct.resize(fit.eblup.size());
  for (Eigen::Index d = 0; d < fit.eblup.size(); ++d) {
    if (fit.eblup[d] == 0.0)
      throw ZeroEstimate("EBLUP is zero in domain " + std::to_string(d) +
                         "; relative error undefined");
    out.eer_pct[d] = std::sqrt(fit.mse[d]) / fit.eblup[d] * 100.0;
    out.dif_rel_pct[d] = (design.sigma2[d] - fit.mse[d]) / design.sigma2[d] * 100.0;
  }
  return out;
}

namespace {

FHFit assemble_fit(const AreaDesign& design, VarianceMethod method, double sigma2_u,
                   double var_sigma2_u, int iterations) {
  FHFit fit;
  fit.method = method;
  fit.sigma2_u = sigma2_u;
  fit.var_sigma2_u = var_sigma2_u;
  fit.iterations = iterations;
  fit.beta = gls_beta(design, sigma2_u);
  fit.synthetic = design.X * fit.beta;
  BlupResult blup = eblup(design, fit.beta, sigma2_u);
  fit.eblup = blup.eblup;
  fit.B = blup.B;
  fit.u_hat = blup.u_hat;
  MseComponents comp = mse_components(design, sigma2_u, var_sigma2_u);
  fit.g1 = comp.g1;
  fit.g2 = comp.g2;
  fit.g3 = comp.g3;
  fit.mse = mse_total(comp, method, design, fit);
  return fit;
}

}  // namespace

FHFit fit_fh(const AreaDesign& design, VarianceMethod method) {
  Sigma2uEstimate est = estimate_sigma2_u(design, method);
  return assemble_fit(design, method, est.sigma2_u, est.var_sigma2_u, est.iterations);
}

FHFit fit_fh_fixed_sigma2_u(const AreaDesign& design, VarianceMethod method, double sigma2_u) {
  design.validate();
  if (sigma2_u < 0.0) throw ValidationError("sigma2_u must be >= 0");
  double var = method == VarianceMethod::PrasadRao ? var_sigma2_u_moment(design, sigma2_u)
                                                   : var_sigma2_u_likelihood(design, sigma2_u);
  return assemble_fit(design, method, sigma2_u, var, 0);
}

double ml_loglik(const AreaDesign& design, double sigma2_u) {
  Eigen::VectorXd v = total_variance(design, sigma2_u);
  Eigen::VectorXd w = v.cwiseInverse();
  Eigen::VectorXd beta = weighted_ls(design.X, design.gamma_hat, w);
  Eigen::VectorXd r = design.gamma_hat - design.X * beta;
  return -0.5 * (v.array().log().sum() + (r.array().square() * w.array()).sum());
}

double reml_loglik(const AreaDesign& design, double sigma2_u) {
  Eigen::VectorXd v = total_variance(design, sigma2_u);
  Eigen::VectorXd w = v.cwiseInverse();
  Eigen::MatrixXd XtWX = design.X.transpose() * w.asDiagonal() * design.X;
  Eigen::VectorXd beta = weighted_ls(design.X, design.gamma_hat, w);
  Eigen::VectorXd r = design.gamma_hat - design.X * beta;
  double logdet = std::log(XtWX.determinant());
  return -0.5 * (v.array().log().sum() + logdet + (r.array().square() * w.array()).sum());
}

Eigen::VectorXd g3_reml_closed_form(const AreaDesign& design, double sigma2_u) {
  Eigen::VectorXd v = total_variance(design, sigma2_u);
  double denom = v.array().square().inverse().sum();
  Eigen::VectorXd B = design.sigma2.array() / v.array();
  return (2.0 * B.array().square()) / (v.array() * denom);
}

}  // namespace sae
