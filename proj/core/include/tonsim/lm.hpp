#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace tonsim::fitting {

/// One data point: up to two abscissae, the observed value and a weight.
struct Observation {
  std::array<double, 2> x{};
  double y = 0.0;
  double weight = 1.0;
};

using Model = std::function<double(const std::array<double, 2>& x, std::span<const double> params)>;

/// Box constraints. Empty vectors mean unbounded; otherwise one entry per parameter.
struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct LmOptions {
  int max_iterations = 200;
  /// Stop when an accepted step lowers the cost by less than this fraction.
  double tol = 1e-10;
};

struct LmResult {
  std::vector<double> params;
  /// Coefficient of determination 1 - SS_res / SS_tot on unweighted
  /// residuals; 1 when SS_res == 0, 0 when SS_tot == 0 < SS_res.
  double goodness = 0.0;
  /// Half the weighted sum of squared residuals.
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt with multiplicative damping (x10 / /10) on
/// diag(J^T J), central-difference Jacobian with step 1e-6 * max(1, |p|),
/// and projection onto the bounds after every step.
///
/// Throws RankDeficiency when there are fewer observations than parameters or
/// the Jacobian at the starting point is rank deficient. Non-convergence is
/// reported through `converged`, with the best parameters found.
LmResult lm_fit(const Model& model, std::span<const Observation> data,
                std::span<const double> init, const Bounds& bounds = {},
                const LmOptions& options = {});

/// R^2 of the model at the given parameters (same convention as LmResult).
double r_squared(const Model& model, std::span<const Observation> data,
                 std::span<const double> params);

}  // namespace tonsim::fitting
