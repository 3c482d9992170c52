#pragma once

// Central-difference check of the analytic factor Jacobians. Variables are
// perturbed the same way the solver retracts them: T exp(d) and log s + d.

#include <algorithm>
#include <random>

#include "monoscale/factors.hpp"
#include "oracles.hpp"

namespace monoscale::testing {

inline constexpr double kFdStep = 1e-7;

template <typename Residual>
Eigen::MatrixXd fd_pose_jacobian(const Pose& p, Residual&& residual_at) {
  const Eigen::VectorXd r0 = residual_at(p);
  Eigen::MatrixXd J(r0.size(), 6);
  for (int k = 0; k < 6; ++k) {
    Vector6d d = Vector6d::Zero();
    d[k] = kFdStep;
    const Eigen::VectorXd plus = residual_at(p * se3_exp(Twist(d)));
    const Eigen::VectorXd minus = residual_at(p * se3_exp(Twist(Vector6d(-d))));
    J.col(k) = (plus - minus) / (2.0 * kFdStep);
  }
  return J;
}

template <typename Residual>
Eigen::VectorXd fd_scale_jacobian(const ScaleVar& s, Residual&& residual_at) {
  const Eigen::VectorXd plus = residual_at(ScaleVar::from_log(s.log_value() + kFdStep));
  const Eigen::VectorXd minus = residual_at(ScaleVar::from_log(s.log_value() - kFdStep));
  return (plus - minus) / (2.0 * kFdStep);
}

struct JacobianErrors {
  double fk = 0.0;
  double mc = 0.0;
  double mc_literal = 0.0;
  double prior = 0.0;
};

/// Draws one random linearization point for every factor type and returns
/// the largest absolute analytic-vs-numeric difference per type.
inline JacobianErrors worst_jacobian_error(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));
  const Pose prev = random_pose(rng, 3.0, 1.0);
  const Pose motion = random_pose(rng, 1.2, 0.5);
  const Pose curr = prev * motion;
  const ScaleVar s = ScaleVar::from_log(log_scale(rng));
  JacobianErrors e;

  FkFactor fk;
  fk.delta = motion * random_pose(rng, 1.0, 0.3);
  {
    const FkLinearization lin = linearize(prev, curr, fk);
    const auto jp = fd_pose_jacobian(prev, [&](const Pose& p) {
      return Eigen::VectorXd(fk_residual(p, curr, fk).vector());
    });
    const auto jc = fd_pose_jacobian(curr, [&](const Pose& p) {
      return Eigen::VectorXd(fk_residual(prev, p, fk).vector());
    });
    e.fk = std::max(max_abs_diff(lin.d_prev, jp), max_abs_diff(lin.d_curr, jc));
  }

  for (TransResidualForm form : {TransResidualForm::kWorldAligned, TransResidualForm::kLiteral}) {
    McFactor mc;
    mc.form = form;
    mc.delta_rot = (motion * random_pose(rng, 1.0, 0.3)).rotation;
    mc.delta_trans = random_pose(rng, 0.1, 1.0).translation;
    const McLinearization lin = linearize(prev, curr, s, mc);
    const auto jp = fd_pose_jacobian(prev, [&](const Pose& p) {
      return Eigen::VectorXd(mc_residual(p, curr, s, mc));
    });
    const auto jc = fd_pose_jacobian(curr, [&](const Pose& p) {
      return Eigen::VectorXd(mc_residual(prev, p, s, mc));
    });
    const auto js = fd_scale_jacobian(s, [&](const ScaleVar& v) {
      return Eigen::VectorXd(mc_residual(prev, curr, v, mc));
    });
    const double err = std::max({max_abs_diff(lin.d_prev, jp), max_abs_diff(lin.d_curr, jc),
                                 max_abs_diff(lin.d_log_scale, js)});
    (form == TransResidualForm::kWorldAligned ? e.mc : e.mc_literal) = err;
  }

  PriorFactor prior;
  prior.pose_prior = prev * random_pose(rng, 1.5, 0.5);
  prior.scale_prior = std::exp(log_scale(rng));
  {
    const PriorLinearization lin = linearize(prev, s, prior);
    const auto jp = fd_pose_jacobian(prev, [&](const Pose& p) {
      return Eigen::VectorXd(prior_residual(p, s, prior));
    });
    const auto js = fd_scale_jacobian(s, [&](const ScaleVar& v) {
      return Eigen::VectorXd(prior_residual(prev, v, prior));
    });
    e.prior = std::max(max_abs_diff(lin.d_pose, jp), max_abs_diff(lin.d_log_scale, js));
  }
  return e;
}

}  // namespace monoscale::testing
