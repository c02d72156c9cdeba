#include "tonsim/lm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "tonsim/error.hpp"

namespace tonsim::fitting {
namespace {

struct Problem {
  const Model& model;
  std::span<const Observation> data;
  const Bounds& bounds;

  double lower(std::size_t j) const {
    return bounds.lower.empty() ? -std::numeric_limits<double>::infinity() : bounds.lower[j];
  }
  double upper(std::size_t j) const {
    return bounds.upper.empty() ? std::numeric_limits<double>::infinity() : bounds.upper[j];
  }

  void project(Eigen::VectorXd& p) const {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      p[j] = std::clamp(p[j], lower(static_cast<std::size_t>(j)), upper(static_cast<std::size_t>(j)));
    }
  }

  // Weighted residuals sqrt(w) * (y - f).
  Eigen::VectorXd residuals(const Eigen::VectorXd& p) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
    const std::span<const double> params(p.data(), static_cast<std::size_t>(p.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] =
          std::sqrt(data[i].weight) * (data[i].y - model(data[i].x, params));
    }
    return r;
  }

  // d(residual)/d(param), central differences, one-sided at an active bound.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const {
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd jac(n, p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(p[j]));
      Eigen::VectorXd plus = p;
      Eigen::VectorXd minus = p;
      plus[j] = std::min(p[j] + h, upper(static_cast<std::size_t>(j)));
      minus[j] = std::max(p[j] - h, lower(static_cast<std::size_t>(j)));
      const double span = plus[j] - minus[j];
      if (span <= 0.0) {
        jac.col(j).setZero();
        continue;
      }
      jac.col(j) = (residuals(plus) - residuals(minus)) / span;
    }
    return jac;
  }
};

double half_norm2(const Eigen::VectorXd& r) { return 0.5 * r.squaredNorm(); }

}  // namespace

double r_squared(const Model& model, std::span<const Observation> data,
                 std::span<const double> params) {
  double mean = 0.0;
  for (const auto& o : data) mean += o.y;
  mean /= static_cast<double>(data.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& o : data) {
    const double e = o.y - model(o.x, params);
    ss_res += e * e;
    ss_tot += (o.y - mean) * (o.y - mean);
  }
  if (ss_res == 0.0) return 1.0;
  if (ss_tot == 0.0) return 0.0;
  return 1.0 - ss_res / ss_tot;
}

LmResult lm_fit(const Model& model, std::span<const Observation> data,
                std::span<const double> init, const Bounds& bounds, const LmOptions& options) {
  const std::size_t np = init.size();
  if (np == 0) throw InvalidParameter("lm_fit: no parameters");
  if (data.size() < np) {
    throw RankDeficiency("lm_fit: " + std::to_string(data.size()) + " observations for " +
                         std::to_string(np) + " parameters");
  }
  if ((!bounds.lower.empty() && bounds.lower.size() != np) ||
      (!bounds.upper.empty() && bounds.upper.size() != np)) {
    throw InvalidParameter("lm_fit: bounds size mismatch");
  }

  const Problem problem{model, data, bounds};
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(np));
  problem.project(p);

  Eigen::VectorXd r = problem.residuals(p);
  if (!r.allFinite()) throw DomainError("lm_fit: model is not finite at the starting point");
  double cost = half_norm2(r);
  Eigen::MatrixXd jac = problem.jacobian(p);
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(np)) {
      throw RankDeficiency("lm_fit: Jacobian has rank " + std::to_string(qr.rank()) + " < " +
                           std::to_string(np));
    }
  }

  LmResult out;
  double lambda = 1e-3;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (cost == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    Eigen::MatrixXd damped = jtj;
    for (Eigen::Index j = 0; j < damped.rows(); ++j) {
      damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(-grad);

    Eigen::VectorXd candidate = p + step;
    problem.project(candidate);
    const Eigen::VectorXd r_new = problem.residuals(candidate);
    const double cost_new = r_new.allFinite() ? half_norm2(r_new)
                                              : std::numeric_limits<double>::infinity();

    if (step.allFinite() && cost_new < cost) {
      const double decrease = (cost - cost_new) / cost;
      p = candidate;
      r = r_new;
      cost = cost_new;
      lambda = std::max(lambda / 10.0, 1e-12);
      if (decrease < options.tol) {
        out.converged = true;
        ++it;
        break;
      }
      jac = problem.jacobian(p);
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No downhill step exists at any damping: a stationary point.
        out.converged = true;
        ++it;
        break;
      }
    }
  }

  out.params.assign(p.data(), p.data() + p.size());
  out.cost = cost;
  out.iterations = it;
  out.goodness = r_squared(model, data, out.params);
  return out;
}

}  // namespace tonsim::fitting
