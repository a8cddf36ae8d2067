#include "sae/em.hpp"

#include <cmath>
#include <limits>

#include "sae/errors.hpp"

namespace sae {

GaussHermite GaussHermite::standard_normal(int points) {
  // Golub-Welsch on the Hermite Jacobi matrix: off-diagonal sqrt(k/2).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    double off = std::sqrt(k / 2.0);
    J(k, k - 1) = off;
    J(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(J);
  GaussHermite rule;
  // Physicists' nodes z_k scale to sqrt(2) z_k for the N(0,1) kernel; the
  // first eigenvector component squared carries the weight.
  rule.nodes = std::sqrt(2.0) * solver.eigenvalues();
  rule.weights.resize(points);
  for (int k = 0; k < points; ++k) {
    double q0 = solver.eigenvectors()(0, k);
    rule.weights[k] = q0 * q0;  // mu0 = sqrt(pi) cancels against 1/sqrt(pi)
  }
  return rule;
}

namespace {

struct ItemWorking {
  double A;  // scale * a
  double B;  // -scale * a * b
  double c;
};

double item_prob(const ItemWorking& w, double theta) {
  return w.c + (1.0 - w.c) * logistic(w.A * theta + w.B);
}

// Expected-counts objective for one item over the grid, with the optional
// Beta-style penalty on the guessing parameter.
double item_objective(const ItemWorking& w, const Eigen::VectorXd& nodes,
                      const Eigen::VectorXd& r, const Eigen::VectorXd& n,
                      const EmConfig& config) {
  double q = 0.0;
  for (Eigen::Index k = 0; k < nodes.size(); ++k) {
    if (n[k] <= 0.0) continue;
    double p = item_prob(w, nodes[k]);
    p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
    q += r[k] * std::log(p) + (n[k] - r[k]) * std::log1p(-p);
  }
  if (config.estimate_guessing)
    q += (config.guessing_penalty_alpha - 1.0) * std::log(w.c) +
         (config.guessing_penalty_beta - 1.0) * std::log1p(-w.c);
  return q;
}

// One M-step for an item: Newton in (A, B) when c is fixed, Fisher scoring in
// (A, B, c) otherwise, with step halving so the objective never decreases.
void maximize_item(ItemWorking& w, const Eigen::VectorXd& nodes, const Eigen::VectorXd& r,
                   const Eigen::VectorXd& n, const EmConfig& config) {
  const int dim = config.estimate_guessing ? 3 : 2;
  for (int inner = 0; inner < 50; ++inner) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index k = 0; k < nodes.size(); ++k) {
      if (n[k] <= 0.0) continue;
      double s = logistic(w.A * nodes[k] + w.B);
      double p = w.c + (1.0 - w.c) * s;
      p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
      Eigen::VectorXd dp(dim);
      double ds = s * (1.0 - s);
      dp[0] = (1.0 - w.c) * ds * nodes[k];
      dp[1] = (1.0 - w.c) * ds;
      if (dim == 3) dp[2] = 1.0 - s;
      double resid = r[k] - n[k] * p;
      grad += dp * (resid / (p * (1.0 - p)));
      info += dp * dp.transpose() * (n[k] / (p * (1.0 - p)));
    }
    if (dim == 3) {
      grad[2] += (config.guessing_penalty_alpha - 1.0) / w.c -
                 (config.guessing_penalty_beta - 1.0) / (1.0 - w.c);
      info(2, 2) += (config.guessing_penalty_alpha - 1.0) / (w.c * w.c) +
                    (config.guessing_penalty_beta - 1.0) / ((1.0 - w.c) * (1.0 - w.c));
    }
    Eigen::VectorXd step = info.ldlt().solve(grad);
    if (!step.allFinite()) break;

    double q0 = item_objective(w, nodes, r, n, config);
    double scale = 1.0;
    ItemWorking trial = w;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      trial.A = std::clamp(w.A + scale * step[0], 1e-3, 50.0);
      trial.B = std::clamp(w.B + scale * step[1], -60.0, 60.0);
      if (dim == 3) trial.c = std::clamp(w.c + scale * step[2], 1e-4, 0.45);
      if (item_objective(trial, nodes, r, n, config) >= q0) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
    double move = std::abs(trial.A - w.A) + std::abs(trial.B - w.B) + std::abs(trial.c - w.c);
    w = trial;
    if (move < 1e-10) break;
  }
}

}  // namespace

EmResult calibrate_em(const ResponseMatrix& responses, const Eigen::MatrixXd& covariates,
                      const EmConfig& config) {
  responses.validate();
  const int N = responses.persons();
  const int I = responses.items();
  Eigen::MatrixXd W = covariates.size() == 0 ? intercept_only(N) : covariates;
  if (W.rows() != N) throw ValidationError("covariate rows do not match the response matrix");

  // Every item needs variation among its observed cells.
  for (int i = 0; i < I; ++i) {
    int zeros = 0, ones = 0;
    for (int j = 0; j < N; ++j) {
      int cell = responses.values(j, i);
      if (cell == 0) ++zeros;
      if (cell == 1) ++ones;
    }
    if (zeros == 0 || ones == 0) throw DegenerateItem(i);
  }

  const GaussHermite grid = GaussHermite::standard_normal(config.quadrature_points);
  const int K = config.quadrature_points;
  const Eigen::VectorXd log_prior0 = grid.weights.array().log();

  // Start values: unit slopes, difficulties from observed proportions.
  std::vector<ItemWorking> items(I);
  for (int i = 0; i < I; ++i) {
    double correct = 0.0, observed = 0.0;
    for (int j = 0; j < N; ++j) {
      int cell = responses.values(j, i);
      if (cell == ResponseMatrix::kMissing) continue;
      observed += 1.0;
      correct += cell;
    }
    double phat = std::clamp(correct / observed, 0.01, 0.99);
    items[i].A = config.item_scale;
    items[i].B = std::log(phat / (1.0 - phat));
    items[i].c = config.estimate_guessing ? 0.2 : 0.0;
  }

  EmResult result;

  // --- Item sweep: EM against the standard normal prior ------------------
  Eigen::MatrixXd logp(K, I), logq(K, I);
  Eigen::MatrixXd r(K, I), n(K, I);
  Eigen::VectorXd acc(K);
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < config.max_iter; ++iter) {
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k) {
        double p = item_prob(items[i], grid.nodes[k]);
        p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
        logp(k, i) = std::log(p);
        logq(k, i) = std::log1p(-p);
      }

    r.setZero();
    n.setZero();
    double loglik = 0.0;
    for (int j = 0; j < N; ++j) {
      acc = log_prior0;
      for (int i = 0; i < I; ++i) {
        int cell = responses.values(j, i);
        if (cell == ResponseMatrix::kMissing) continue;
        acc += cell == 1 ? logp.col(i) : logq.col(i);
      }
      double m = acc.maxCoeff();
      Eigen::VectorXd wpost = (acc.array() - m).exp();
      double total = wpost.sum();
      loglik += m + std::log(total);
      wpost /= total;
      for (int i = 0; i < I; ++i) {
        int cell = responses.values(j, i);
        if (cell == ResponseMatrix::kMissing) continue;
        n.col(i) += wpost;
        if (cell == 1) r.col(i) += wpost;
      }
    }
    result.loglik_items.push_back(loglik);
    if (std::abs(loglik - prev) < config.tol) {
      result.converged_items = true;
      break;
    }
    prev = loglik;

    for (int i = 0; i < I; ++i) maximize_item(items[i], grid.nodes, r.col(i), n.col(i), config);
  }

  result.bank.items.resize(I);
  for (int i = 0; i < I; ++i) {
    ItemParams& p = result.bank.items[i];
    p.scale = config.item_scale;
    p.a = items[i].A / config.item_scale;
    p.b = -items[i].B / items[i].A;
    p.c = items[i].c;
  }

  // --- Conditioning sweep: (gamma, sigma2) with items fixed ---------------
  // Person likelihood rows over the grid no longer change, so cache them.
  Eigen::MatrixXd ll(N, K);
  for (int j = 0; j < N; ++j) {
    acc.setZero();
    for (int i = 0; i < I; ++i) {
      int cell = responses.values(j, i);
      if (cell == ResponseMatrix::kMissing) continue;
      acc += cell == 1 ? logp.col(i) : logq.col(i);
    }
    ll.row(j) = acc.transpose();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> wqr(W);
  if (wqr.rank() < W.cols()) throw RankError("person covariate matrix is rank deficient");

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(W.cols());
  double sigma2 = 1.0;
  Eigen::VectorXd theta_bar(N), theta_sq(N);
  prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < config.latreg_max_iter; ++iter) {
    Eigen::VectorXd mu = W * gamma;
    double loglik = 0.0;
    for (int j = 0; j < N; ++j) {
      // log prior mass on the grid: the N(mu_j, sigma2) density re-expressed
      // against the N(0,1) quadrature kernel.
      for (int k = 0; k < K; ++k) {
        double z = grid.nodes[k] - mu[j];
        acc[k] = log_prior0[k] - 0.5 * std::log(sigma2) - 0.5 * z * z / sigma2 +
                 0.5 * grid.nodes[k] * grid.nodes[k] + ll(j, k);
      }
      double m = acc.maxCoeff();
      Eigen::VectorXd wpost = (acc.array() - m).exp();
      double total = wpost.sum();
      loglik += m + std::log(total);
      wpost /= total;
      theta_bar[j] = wpost.dot(grid.nodes);
      theta_sq[j] = wpost.dot(grid.nodes.cwiseProduct(grid.nodes));
    }
    result.loglik_latreg.push_back(loglik);
    if (std::abs(loglik - prev) < config.latreg_tol) {
      result.converged_latreg = true;
      break;
    }
    prev = loglik;

    gamma = wqr.solve(theta_bar);
    Eigen::VectorXd mu_new = W * gamma;
    sigma2 = (theta_sq.sum() - 2.0 * mu_new.dot(theta_bar) + mu_new.squaredNorm()) / N;
    sigma2 = std::max(sigma2, 1e-8);
  }

  result.latreg.gamma = gamma;
  result.latreg.sigma2 = sigma2;
  return result;
}

}  // namespace sae
