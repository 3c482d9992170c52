#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "monoscale/errors.hpp"
#include "monoscale/factors.hpp"
#include "monoscale/geometry.hpp"

namespace monoscale {

/// Poses T_0..T_n, one scale variable, a prior on (T_0, s) and one FK plus one
/// MC factor per keyframe. Factors for keyframe i connect poses i-1 and i.
class FactorGraph {
 public:
  /// Starts with a single pose initialized at the prior mean.
  explicit FactorGraph(PriorFactor prior, ScaleVar initial_scale = ScaleVar::from_value(1.0))
      : prior_(std::move(prior)), scale_(initial_scale) {
    check_information(prior_.pose_information, "pose prior");
    if (!(prior_.scale_information > 0.0)) throw Error("scale prior information must be positive");
    if (!(prior_.scale_prior > 0.0)) throw Error("scale prior mean must be positive");
    poses_.push_back(prior_.pose_prior);
  }

  /// Rebuilds a graph from stored parts (used by the graph file reader).
  static FactorGraph from_parts(PriorFactor prior, ScaleVar scale, std::vector<Pose> poses,
                                std::vector<FkFactor> fk, std::vector<McFactor> mc) {
    FactorGraph g(std::move(prior), scale);
    g.poses_ = std::move(poses);
    g.fk_ = std::move(fk);
    g.mc_ = std::move(mc);
    g.validate();
    return g;
  }

  /// Appends pose i = pose_count() initialized as T_{i-1} * fk.delta, plus both factors.
  void add_keyframe(FkFactor fk, McFactor mc) {
    const std::size_t next = poses_.size();
    if (fk.index != next || mc.index != next) {
      throw IndexMismatch("keyframe factors reference indices " + std::to_string(fk.index) + "/" +
                          std::to_string(mc.index) + " but the next keyframe is " +
                          std::to_string(next));
    }
    check_information(fk.information, "FK factor");
    check_information(mc.information, "MC factor");
    poses_.push_back(poses_.back() * fk.delta);
    fk_.push_back(std::move(fk));
    mc_.push_back(std::move(mc));
  }

  void validate() const {
    if (poses_.empty()) throw InvalidGraph("graph has no pose variables");
    if (fk_.size() != mc_.size() || fk_.size() + 1 != poses_.size()) {
      throw InvalidGraph("graph with " + std::to_string(poses_.size()) + " poses has " +
                         std::to_string(fk_.size()) + " FK and " + std::to_string(mc_.size()) +
                         " MC factors");
    }
    for (std::size_t k = 0; k < fk_.size(); ++k) {
      if (fk_[k].index != k + 1 || mc_[k].index != k + 1) {
        throw InvalidGraph("factor " + std::to_string(k) + " has an out-of-order keyframe index");
      }
      check_information(fk_[k].information, "FK factor");
      check_information(mc_[k].information, "MC factor");
    }
  }

  std::size_t pose_count() const { return poses_.size(); }
  std::size_t keyframe_count() const { return fk_.size(); }
  std::size_t factor_count() const { return 1 + fk_.size() + mc_.size(); }
  /// Number of scalar unknowns: 6 per pose plus log s.
  std::size_t dimension() const { return 6 * poses_.size() + 1; }

  const std::vector<Pose>& poses() const { return poses_; }
  const Pose& pose(std::size_t i) const { return poses_.at(i); }
  void set_pose(std::size_t i, const Pose& p) { poses_.at(i) = p; }
  const ScaleVar& scale() const { return scale_; }
  void set_scale(ScaleVar s) { scale_ = s; }

  const PriorFactor& prior() const { return prior_; }
  const std::vector<FkFactor>& fk_factors() const { return fk_; }
  const std::vector<McFactor>& mc_factors() const { return mc_; }
  std::vector<McFactor>& mutable_mc_factors() { return mc_; }

 private:
  PriorFactor prior_;
  ScaleVar scale_;
  std::vector<Pose> poses_;
  std::vector<FkFactor> fk_;
  std::vector<McFactor> mc_;
};

/// Sum of every factor's Mahalanobis cost at the current estimates.
inline double total_cost(const FactorGraph& g) {
  const auto& poses = g.poses();
  double cost = diagonal_cost<7>(
      prior_residual(poses[0], g.scale(), g.prior()),
      (Vector7d() << g.prior().pose_information, g.prior().scale_information).finished());
  for (const auto& f : g.mc_factors()) {
    cost += diagonal_cost<6>(mc_residual(poses[f.index - 1], poses[f.index], g.scale(), f),
                             f.information);
  }
  for (const auto& f : g.fk_factors()) {
    cost += diagonal_cost<6>(fk_residual(poses[f.index - 1], poses[f.index], f).vector(),
                             f.information);
  }
  return cost;
}

}  // namespace monoscale
