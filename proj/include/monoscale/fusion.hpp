#pragma once

// Assembles the kinematics + monocular factor graph from sensor streams.

#include <string>
#include <vector>

#include "monoscale/errors.hpp"
#include "monoscale/factor_graph.hpp"
#include "monoscale/factors.hpp"
#include "monoscale/kinematics.hpp"

namespace monoscale {

/// Relative camera motion reported by monocular odometry. The translation is
/// expressed in the previous camera frame, in unscaled map units.
struct VoDelta {
  Rotation rotation;
  Vector3d translation = Vector3d::Zero();
};

struct FusionOptions {
  TransResidualForm form = TransResidualForm::kWorldAligned;
  Vector6d fk_information = uniform_information(kDefaultFkInformation);
  Vector6d mc_information = uniform_information(kDefaultMcInformation);
  double scale_prior = 1.0;
  double scale_prior_information = kDefaultScalePriorInformation;
  double pose_prior_information = kDefaultPosePriorInformation;
};

/// One keyframe per joint reading. The prior pins T_0 at the forward
/// kinematics of the first reading; keyframe i adds FK(i-1, i) and MC(i-1, i).
inline FactorGraph build_fusion_graph(const LimbModel& model,
                                      const std::vector<JointReading>& readings,
                                      const std::vector<VoDelta>& vo,
                                      const FusionOptions& opts = {}) {
  if (readings.size() < 2) throw InvalidGraph("need at least two joint readings");
  if (vo.size() + 1 != readings.size()) {
    throw InvalidGraph(std::to_string(readings.size()) + " joint readings need " +
                       std::to_string(readings.size() - 1) + " odometry deltas, got " +
                       std::to_string(vo.size()));
  }
  PriorFactor prior;
  prior.pose_prior = fk_pose(model, readings.front().angles);
  prior.pose_information = uniform_information(opts.pose_prior_information);
  prior.scale_prior = opts.scale_prior;
  prior.scale_information = opts.scale_prior_information;
  FactorGraph g(prior, ScaleVar::from_value(opts.scale_prior));
  for (std::size_t i = 1; i < readings.size(); ++i) {
    FkFactor fk;
    fk.index = i;
    fk.delta = fk_delta(model, readings[i - 1], readings[i]);
    fk.information = opts.fk_information;
    McFactor mc;
    mc.index = i;
    mc.delta_rot = vo[i - 1].rotation;
    mc.delta_trans = vo[i - 1].translation;
    mc.information = opts.mc_information;
    mc.form = opts.form;
    g.add_keyframe(fk, mc);
  }
  return g;
}

}  // namespace monoscale
