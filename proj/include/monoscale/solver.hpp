#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "monoscale/errors.hpp"
#include "monoscale/factor_graph.hpp"

namespace monoscale {

struct SolverOptions {
  int max_iterations = 100;
  /// Stop once an accepted step lowers the cost by less than this fraction.
  double relative_tolerance = 1e-8;
  /// Stop once the gradient infinity-norm falls below this fraction of its
  /// value at the initial estimate.
  double gradient_tolerance = 1e-10;
  double initial_lambda = 1e-4;
  double max_lambda = 1e8;
};

struct SolveReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Cost after each accepted step.
  std::vector<double> step_costs;
  /// One of: zero_cost, gradient, relative_decrease, no_decrease, max_iterations.
  std::string termination;
  double final_scale = 1.0;

  bool operator==(const SolveReport&) const = default;
};

/// Dense Gauss-Newton system H dx = -g at the current estimate.
struct NormalEquations {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  double cost = 0.0;
};

namespace detail {

inline Eigen::Index pose_offset(std::size_t i) { return static_cast<Eigen::Index>(6 * i); }

}  // namespace detail

/// Linearizes every factor in index order and accumulates J^T W J and J^T W r.
inline NormalEquations build_normal_equations(const FactorGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.dimension());
  const Eigen::Index s_idx = n - 1;
  NormalEquations ne;
  ne.hessian = Eigen::MatrixXd::Zero(n, n);
  ne.gradient = Eigen::VectorXd::Zero(n);
  const auto& poses = g.poses();
  auto& H = ne.hessian;
  auto& b = ne.gradient;

  {
    const auto& p = g.prior();
    const auto lin = linearize(poses[0], g.scale(), p);
    Vector7d w;
    w << p.pose_information, p.scale_information;
    const Eigen::Matrix<double, 7, 6> wj = w.asDiagonal() * lin.d_pose;
    const Vector7d ws = w.asDiagonal() * lin.d_log_scale;
    H.block<6, 6>(0, 0) += lin.d_pose.transpose() * wj;
    H.block<6, 1>(0, s_idx) += lin.d_pose.transpose() * ws;
    H.block<1, 6>(s_idx, 0) += ws.transpose() * lin.d_pose;
    H(s_idx, s_idx) += lin.d_log_scale.dot(ws);
    b.segment<6>(0) += wj.transpose() * lin.residual;
    b[s_idx] += ws.dot(lin.residual);
    ne.cost += diagonal_cost<7>(lin.residual, w);
  }

  for (std::size_t k = 0; k < g.keyframe_count(); ++k) {
    const auto& mc = g.mc_factors()[k];
    const std::size_t i = mc.index;
    const Eigen::Index a = detail::pose_offset(i - 1);
    const Eigen::Index c = detail::pose_offset(i);
    {
      const auto lin = linearize(poses[i - 1], poses[i], g.scale(), mc);
      const Vector6d& w = mc.information;
      const Matrix6d wp = w.asDiagonal() * lin.d_prev;
      const Matrix6d wc = w.asDiagonal() * lin.d_curr;
      const Vector6d ws = w.asDiagonal() * lin.d_log_scale;
      H.block<6, 6>(a, a) += lin.d_prev.transpose() * wp;
      H.block<6, 6>(a, c) += lin.d_prev.transpose() * wc;
      H.block<6, 6>(c, a) += lin.d_curr.transpose() * wp;
      H.block<6, 6>(c, c) += lin.d_curr.transpose() * wc;
      H.block<6, 1>(a, s_idx) += lin.d_prev.transpose() * ws;
      H.block<6, 1>(c, s_idx) += lin.d_curr.transpose() * ws;
      H.block<1, 6>(s_idx, a) += ws.transpose() * lin.d_prev;
      H.block<1, 6>(s_idx, c) += ws.transpose() * lin.d_curr;
      H(s_idx, s_idx) += lin.d_log_scale.dot(ws);
      b.segment<6>(a) += wp.transpose() * lin.residual;
      b.segment<6>(c) += wc.transpose() * lin.residual;
      b[s_idx] += ws.dot(lin.residual);
      ne.cost += diagonal_cost<6>(lin.residual, w);
    }
    {
      const auto& fk = g.fk_factors()[k];
      const auto lin = linearize(poses[i - 1], poses[i], fk);
      const Vector6d& w = fk.information;
      const Matrix6d wp = w.asDiagonal() * lin.d_prev;
      const Matrix6d wc = w.asDiagonal() * lin.d_curr;
      H.block<6, 6>(a, a) += lin.d_prev.transpose() * wp;
      H.block<6, 6>(a, c) += lin.d_prev.transpose() * wc;
      H.block<6, 6>(c, a) += lin.d_curr.transpose() * wp;
      H.block<6, 6>(c, c) += lin.d_curr.transpose() * wc;
      b.segment<6>(a) += wp.transpose() * lin.residual;
      b.segment<6>(c) += wc.transpose() * lin.residual;
      ne.cost += diagonal_cost<6>(lin.residual, w);
    }
  }
  return ne;
}

namespace detail {

/// Solves A x = rhs for symmetric positive-definite A after symmetric Jacobi
/// scaling. Returns false if A is not numerically positive definite.
inline bool solve_spd(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, Eigen::VectorXd& x) {
  const Eigen::VectorXd d = A.diagonal();
  if (!((d.array() > 0.0).all() && d.allFinite())) return false;
  const Eigen::VectorXd inv_sqrt = d.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * A * inv_sqrt.asDiagonal();
  const Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success) return false;
  x = inv_sqrt.asDiagonal() * llt.solve(inv_sqrt.asDiagonal() * rhs);
  return x.allFinite();
}

inline FactorGraph retract(const FactorGraph& g, const Eigen::VectorXd& dx) {
  FactorGraph out = g;
  for (std::size_t i = 0; i < g.pose_count(); ++i) {
    const Vector6d d = dx.segment<6>(pose_offset(i));
    out.set_pose(i, g.pose(i) * se3_exp(Twist(d)));
  }
  out.set_scale(ScaleVar::from_log(g.scale().log_value() + dx[dx.size() - 1]));
  return out;
}

}  // namespace detail

/// Levenberg-Marquardt on all poses and log s. Damping is lambda * diag(H),
/// multiplied by 10 after a rejected step and divided by 10 after an accepted
/// one. Accepted steps never raise the cost.
inline SolveReport optimize(FactorGraph& g, const SolverOptions& opts = {}) {
  g.validate();
  SolveReport report;
  double lambda = opts.initial_lambda;
  double initial_gradient = 0.0;
  report.termination = "max_iterations";

  NormalEquations ne = build_normal_equations(g);
  report.initial_cost = ne.cost;
  double cost = ne.cost;

  for (int iter = 0;; ++iter) {
    const double grad_norm = ne.gradient.lpNorm<Eigen::Infinity>();
    if (iter == 0) initial_gradient = grad_norm;
    if (cost == 0.0) {
      report.converged = true;
      report.termination = "zero_cost";
      break;
    }
    if (grad_norm == 0.0 || (iter > 0 && grad_norm <= opts.gradient_tolerance * initial_gradient)) {
      report.converged = true;
      report.termination = "gradient";
      break;
    }
    if (iter >= opts.max_iterations) break;

    bool accepted = false;
    bool stop = false;
    while (!accepted) {
      Eigen::MatrixXd damped = ne.hessian;
      damped.diagonal() += lambda * ne.hessian.diagonal();
      Eigen::VectorXd dx;
      if (!detail::solve_spd(damped, -ne.gradient, dx)) {
        lambda *= 10.0;
        if (lambda > opts.max_lambda) {
          throw SingularNormalEquations("damped normal equations are not positive definite");
        }
        continue;
      }
      FactorGraph candidate = detail::retract(g, dx);
      double new_cost;
      try {
        new_cost = total_cost(candidate);
      } catch (const CutLocusError&) {
        new_cost = std::numeric_limits<double>::infinity();
      }
      if (new_cost <= cost) {
        accepted = true;
        lambda = std::max(lambda / 10.0, 1e-16);
        const double decrease = (cost - new_cost) / cost;
        g = std::move(candidate);
        cost = new_cost;
        report.step_costs.push_back(cost);
        ++report.iterations;
        if (decrease < opts.relative_tolerance) {
          report.converged = true;
          report.termination = "relative_decrease";
          stop = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > opts.max_lambda) {
          // No step lowers the cost: the estimate is a minimum to working precision.
          report.converged = true;
          report.termination = "no_decrease";
          stop = true;
          break;
        }
      }
    }
    if (stop) break;
    ne = build_normal_equations(g);
  }

  report.final_cost = cost;
  report.final_scale = g.scale().value();
  return report;
}

/// Standard deviation of log s from the inverse Gauss-Newton Hessian at the
/// current estimate.
inline double marginal_scale_stddev(const FactorGraph& g) {
  const NormalEquations ne = build_normal_equations(g);
  const Eigen::Index n = ne.hessian.rows();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[n - 1] = 1.0;
  Eigen::VectorXd x;
  if (!detail::solve_spd(ne.hessian, e, x) || !(x[n - 1] > 0.0)) {
    throw SingularNormalEquations("Gauss-Newton Hessian is not positive definite");
  }
  return std::sqrt(x[n - 1]);
}

}  // namespace monoscale
