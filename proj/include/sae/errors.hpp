#pragma once

#include <stdexcept>
#include <string>

namespace sae {

// Two error families, matching the CLI exit-code contract:
// validation problems (bad inputs, schema violations) exit with 1,
// numerical failures (singular systems, non-convergence) exit with 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : ValidationError {
  using ValidationError::ValidationError;
};

struct ValueError : ValidationError {
  ValueError(const std::string& msg, long row, const std::string& column)
      : ValidationError(msg + " (row " + std::to_string(row) + ", column '" + column + "')"),
        row(row),
        column(column) {}
  long row;
  std::string column;
};

struct RankError : ValidationError {
  using ValidationError::ValidationError;
};

struct DegenerateItem : ValidationError {
  explicit DegenerateItem(int item)
      : ValidationError("item " + std::to_string(item) +
                        " has no response variation among observed cells"),
        item(item) {}
  int item;
};

struct EmptyDomain : ValidationError {
  explicit EmptyDomain(int domain)
      : ValidationError("domain " + std::to_string(domain) + " has no sampled persons"),
        domain(domain) {}
  int domain;
};

struct SingletonDomain : ValidationError {
  explicit SingletonDomain(int domain)
      : ValidationError("domain " + std::to_string(domain) +
                        " has a single sampled person; variance undefined"),
        domain(domain) {}
  int domain;
};

struct TooFewImputations : ValidationError {
  explicit TooFewImputations(int L)
      : ValidationError("need at least 2 imputations, got " + std::to_string(L)), L(L) {}
  int L;
};

struct MethodMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct ZeroEstimate : ValidationError {
  using ValidationError::ValidationError;
};

struct SingularDesign : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularAux : NumericalError {
  using NumericalError::NumericalError;
};

struct NonConvergence : NumericalError {
  using NumericalError::NumericalError;
};

struct CorrelationMiss : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace sae
