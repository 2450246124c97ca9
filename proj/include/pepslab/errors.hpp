#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pepslab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidShapeError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

// Iterative method ran out of iterations. history holds whatever the caller
// tracked (residuals, fidelities).
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double best, std::vector<double> hist = {})
      : Error(what), best_residual(best), history(std::move(hist)) {}
  double best_residual;
  std::vector<double> history;
};

struct DegenerateError : Error {
  using Error::Error;
};

struct IllConditionedGaugeError : Error {
  using Error::Error;
};

// Invalid experiment config; `diagnostics` names every offending key.
struct SchemaError : Error {
  SchemaError(const std::string& what, std::vector<std::string> diags) : Error(what), diagnostics(std::move(diags)) {}
  std::vector<std::string> diagnostics;
};

struct BudgetExceededError : Error {
  BudgetExceededError(const std::string& what, double cnt) : Error(what), count(cnt) {}
  double count;
};

}  // namespace pepslab
