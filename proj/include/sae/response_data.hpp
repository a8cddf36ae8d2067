#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sae/errors.hpp"

namespace sae {

// Dichotomous responses with planned missingness. Cells are 0, 1 or
// kMissing; a missing cell means the item was never administered, which is
// distinct from an incorrect answer.
struct ResponseMatrix {
  static constexpr int kMissing = -1;

  Eigen::MatrixXi values;            // persons x items
  std::vector<int> domain_of;        // person -> 0-based domain index
  std::vector<std::string> person_ids;  // optional, one per person

  int persons() const { return static_cast<int>(values.rows()); }
  int items() const { return static_cast<int>(values.cols()); }

  int domains() const {
    int d = 0;
    for (int v : domain_of) d = std::max(d, v + 1);
    return d;
  }

  bool observed(int person, int item) const { return values(person, item) != kMissing; }

  void validate() const {
    if (static_cast<int>(domain_of.size()) != persons())
      throw ValidationError("every person needs exactly one domain assignment");
    if (!person_ids.empty() && static_cast<int>(person_ids.size()) != persons())
      throw ValidationError("person id count does not match response rows");
    for (int v : domain_of)
      if (v < 0) throw ValidationError("domain indices must be non-negative");
    for (int j = 0; j < persons(); ++j)
      for (int i = 0; i < items(); ++i) {
        int cell = values(j, i);
        if (cell != 0 && cell != 1 && cell != kMissing)
          throw ValidationError("response cells must be 0, 1 or missing");
      }
  }
};

}  // namespace sae
