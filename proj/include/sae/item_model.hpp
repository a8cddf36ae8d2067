#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sae/errors.hpp"

namespace sae {

// Three-parameter logistic item. The 2PL case is c = 0; the conventional
// logistic scale constant is 1.7.
struct ItemParams {
  double a = 1.0;      // discrimination, > 0
  double b = 0.0;      // difficulty
  double c = 0.0;      // lower asymptote (guessing), in [0, 1)
  double scale = 1.7;  // logistic scale constant, > 0

  void validate() const {
    if (!(a > 0.0)) throw ValidationError("item discrimination must be > 0");
    if (!(c >= 0.0 && c < 1.0)) throw ValidationError("guessing parameter must lie in [0, 1)");
    if (!(scale > 0.0)) throw ValidationError("logistic scale must be > 0");
  }
};

inline double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double z = std::exp(x);
  return z / (1.0 + z);
}

// P(correct | theta) = c + (1 - c) * logistic(scale * a * (theta - b)).
inline double irf(double theta, const ItemParams& item) {
  return item.c + (1.0 - item.c) * logistic(item.scale * item.a * (theta - item.b));
}

// log P and log(1 - P) without cancellation for extreme theta.
inline double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double log_irf(double theta, const ItemParams& item) {
  double eta = item.scale * item.a * (theta - item.b);
  if (item.c == 0.0) return -log1p_exp(-eta);
  return std::log(irf(theta, item));
}

inline double log_irf_complement(double theta, const ItemParams& item) {
  double eta = item.scale * item.a * (theta - item.b);
  // 1 - P = (1 - c) * (1 - logistic(eta))
  return std::log1p(-item.c) - log1p_exp(eta);
}

struct ItemBank {
  std::vector<std::string> ids;  // empty or one id per item
  std::vector<ItemParams> items;

  int size() const { return static_cast<int>(items.size()); }

  void validate() const {
    for (const auto& item : items) item.validate();
    if (!ids.empty() && ids.size() != items.size())
      throw ValidationError("item id count does not match item parameter count");
  }
};

}  // namespace sae
