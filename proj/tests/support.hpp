#pragma once

// Shared helpers and independent oracles for the test suites. Oracles are
// deliberately coded through different algebra than the library paths they
// check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "sae/fay_herriot.hpp"
#include "sae/item_model.hpp"
#include "sae/response_data.hpp"

namespace sae::test {

// One-pass Rubin pooling, kept independent of combine.cpp.
struct RubinOracle {
  double point = 0.0;
  double total_variance = 0.0;
};

inline RubinOracle oracle_rubin(const std::vector<std::pair<double, double>>& per_imputation) {
  const double L = static_cast<double>(per_imputation.size());
  double sum = 0.0, sumsq = 0.0, wbar = 0.0;
  for (const auto& [q, u] : per_imputation) {
    sum += q;
    sumsq += q * q;
    wbar += u;
  }
  RubinOracle out;
  out.point = sum / L;
  wbar /= L;
  double between = (sumsq - L * out.point * out.point) / (L - 1.0);
  out.total_variance = wbar + (1.0 + 1.0 / L) * between;
  return out;
}

// GLS through explicitly inverted normal equations (library uses QR).
inline Eigen::VectorXd oracle_gls(const sae::AreaDesign& design, double sigma2_u) {
  Eigen::MatrixXd V = (design.sigma2.array() + sigma2_u).matrix().asDiagonal();
  Eigen::MatrixXd Vinv = V.inverse();
  Eigen::MatrixXd G = (design.X.transpose() * Vinv * design.X).inverse();
  return G * design.X.transpose() * Vinv * design.gamma_hat;
}

// Henderson mixed-model equations with Z = I, G = sigma2_u I, R = diag(sigma2):
//   [X'R^-1X   X'R^-1 ] [beta]   [X'R^-1 y]
//   [R^-1X     R^-1+G^-1] [u  ] = [R^-1 y  ]
// A different route to the same (beta, u); requires sigma2_u > 0.
struct MmeSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd u;
};

inline MmeSolution oracle_henderson(const sae::AreaDesign& design, double sigma2_u) {
  const auto D = design.D();
  const auto p = design.p();
  Eigen::MatrixXd Rinv = design.sigma2.cwiseInverse().asDiagonal();
  Eigen::MatrixXd lhs(p + D, p + D);
  lhs.topLeftCorner(p, p) = design.X.transpose() * Rinv * design.X;
  lhs.topRightCorner(p, D) = design.X.transpose() * Rinv;
  lhs.bottomLeftCorner(D, p) = Rinv * design.X;
  lhs.bottomRightCorner(D, D) =
      Rinv + Eigen::MatrixXd::Identity(D, D) / sigma2_u;
  Eigen::VectorXd rhs(p + D);
  rhs.head(p) = design.X.transpose() * Rinv * design.gamma_hat;
  rhs.tail(D) = Rinv * design.gamma_hat;
  Eigen::VectorXd sol = lhs.fullPivLu().solve(rhs);
  return {sol.head(p), sol.tail(D)};
}

// Textbook GREG oracle with explicit matrix inverses.
struct GregOracle {
  double estimate = 0.0;
  double variance = 0.0;
};

inline GregOracle oracle_greg(const Eigen::VectorXd& y, const Eigen::MatrixXd& aux,
                              const Eigen::VectorXd& w, const Eigen::VectorXd& aux_pop_means,
                              double f) {
  const auto n = y.size();
  const auto k = aux.cols();
  Eigen::MatrixXd Z(n, k + 1);
  Z.col(0).setOnes();
  Z.rightCols(k) = aux;
  Eigen::MatrixXd ZtWZ = Z.transpose() * w.asDiagonal() * Z;
  Eigen::VectorXd b = ZtWZ.inverse() * (Z.transpose() * w.asDiagonal() * y);
  double ybar = w.dot(y) / w.sum();
  Eigen::VectorXd xbar = (aux.transpose() * w) / w.sum();
  GregOracle out;
  out.estimate = ybar + (aux_pop_means - xbar).dot(b.tail(k));
  Eigen::VectorXd e = y - Z * b;
  double ebar = w.dot(e) / w.sum();
  double s2 = (w.array() * (e.array() - ebar).square()).sum() / w.sum();
  out.variance = (1.0 - f) * s2 / static_cast<double>(n);
  return out;
}

// Dense posterior of one person's ability on a uniform grid; the quadrature
// oracle for the Metropolis sampler.
struct GridPosterior {
  Eigen::VectorXd theta;
  Eigen::VectorXd density;  // normalized, trapezoid rule
  double mean = 0.0;

  double cdf(double x) const {
    if (x <= theta[0]) return 0.0;
    double total = 0.0;
    for (Eigen::Index k = 1; k < theta.size(); ++k) {
      double lo = theta[k - 1], hi = theta[k];
      double seg = 0.5 * (density[k - 1] + density[k]) * (hi - lo);
      if (x >= hi) {
        total += seg;
      } else {
        double t = (x - lo) / (hi - lo);
        double dx = density[k - 1] + t * (density[k] - density[k - 1]);
        total += 0.5 * (density[k - 1] + dx) * (x - lo);
        break;
      }
    }
    return std::min(1.0, total);
  }
};

inline GridPosterior grid_posterior(const std::function<double(double)>& loglik, double mu,
                                    double sigma2, double lo = -6.0, double hi = 6.0,
                                    int points = 2001) {
  GridPosterior post;
  post.theta.resize(points);
  post.density.resize(points);
  Eigen::VectorXd logf(points);
  for (int k = 0; k < points; ++k) {
    double t = lo + (hi - lo) * k / (points - 1.0);
    post.theta[k] = t;
    double z = (t - mu);
    logf[k] = loglik(t) - 0.5 * z * z / sigma2;
  }
  double m = logf.maxCoeff();
  post.density = (logf.array() - m).exp();
  double norm = 0.0, mean = 0.0;
  for (int k = 1; k < points; ++k) {
    double dx = post.theta[k] - post.theta[k - 1];
    norm += 0.5 * (post.density[k] + post.density[k - 1]) * dx;
    mean += 0.5 * (post.density[k] * post.theta[k] + post.density[k - 1] * post.theta[k - 1]) * dx;
  }
  post.density /= norm;
  post.mean = mean / norm;
  return post;
}

inline double ks_distance(std::vector<double> draws, const GridPosterior& post) {
  std::sort(draws.begin(), draws.end());
  double dmax = 0.0;
  const double n = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    double F = post.cdf(draws[i]);
    dmax = std::max(dmax, std::abs(F - (i + 1) / n));
    dmax = std::max(dmax, std::abs(F - i / n));
  }
  return dmax;
}

// Bernoulli responses from known abilities and items.
inline sae::ResponseMatrix simulate_responses(const Eigen::VectorXd& theta,
                                              const sae::ItemBank& bank, std::mt19937_64& rng) {
  sae::ResponseMatrix out;
  const int N = static_cast<int>(theta.size());
  const int I = bank.size();
  out.values.resize(N, I);
  out.domain_of.assign(N, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < I; ++i)
      out.values(j, i) = unif(rng) < sae::irf(theta[j], bank.items[i]) ? 1 : 0;
  return out;
}

inline sae::ItemBank random_bank(int I, std::mt19937_64& rng, double scale = 1.7) {
  std::uniform_real_distribution<double> ua(0.5, 2.0), ub(-2.0, 2.0);
  sae::ItemBank bank;
  bank.items.resize(I);
  for (int i = 0; i < I; ++i) {
    bank.items[i].a = ua(rng);
    bank.items[i].b = ub(rng);
    bank.items[i].c = 0.0;
    bank.items[i].scale = scale;
  }
  return bank;
}

inline sae::AreaDesign random_design(int D, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uvar(0.5, 2.0);
  sae::AreaDesign design;
  design.X.resize(D, p);
  design.X.col(0).setOnes();
  for (int d = 0; d < D; ++d)
    for (int k = 1; k < p; ++k) design.X(d, k) = normal(rng);
  design.gamma_hat.resize(D);
  design.sigma2.resize(D);
  for (int d = 0; d < D; ++d) {
    design.sigma2[d] = uvar(rng);
    design.gamma_hat[d] = 5.0 + 2.0 * normal(rng);
  }
  return design;
}

}  // namespace sae::test
