#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "plyds/policy_model.h"

namespace plyds {

enum class Integrator { kEuler, kRk4 };
std::string ToString(Integrator integrator);

struct RolloutConfig {
  double dt{1e-2};
  long max_steps{100000};
  /// Distance to the target that counts as converged.
  double convergence_radius{1e-2};
  /// Divergence box in world coordinates; empty disables the check.
  Eigen::VectorXd box_lo;
  Eigen::VectorXd box_hi;
  Integrator integrator{Integrator::kEuler};

  /// Throws InputError for dt <= 0, radius <= 0, max_steps < 1 or a box of
  /// the wrong size.
  void Validate(int n) const;
  nlohmann::json ToJson() const;
};

enum class TerminalStatus { kConverged, kStepLimit, kEscapedBox };
std::string ToString(TerminalStatus status);

struct Trajectory {
  /// Row k is the state at time k·dt.
  Eigen::MatrixXd states;
  double dt{0.0};
  TerminalStatus status{TerminalStatus::kStepLimit};

  /// Number of integration steps taken.
  long steps() const { return static_cast<long>(states.rows()) - 1; }
  Eigen::VectorXd final_state() const { return states.row(states.rows() - 1).transpose(); }
};

/// Steps x ← x + dt·f̂(x) (or RK4) until ‖x - target‖ <= radius, the step
/// limit, or a box escape. Throws NumericalError with the step index when the
/// field is non-finite.
Trajectory IntegrateRollout(const PolicyModel& policy, const Eigen::VectorXd& x0,
                            const RolloutConfig& config);

struct Perturbation {
  long step{0};
  Eigen::VectorXd offset;
};

/// As IntegrateRollout, with x ← x + offset applied at each listed step
/// before that step's update. The rollout is not declared converged while a
/// push is still pending.
Trajectory PerturbedRollout(const PolicyModel& policy, const Eigen::VectorXd& x0,
                            const RolloutConfig& config,
                            const std::vector<Perturbation>& perturbations);

struct StreamlineField {
  /// Grid seeds, row-major with the first coordinate varying fastest.
  std::vector<Eigen::VectorXd> seeds;
  std::vector<Trajectory> rollouts;
  /// Field samples at the seeds.
  std::vector<Eigen::VectorXd> velocities;
};

/// One rollout per point of a resolution × resolution grid over [lo, hi].
/// Throws UnsupportedDimensionError unless n = 2, InputError for
/// resolution < 2.
StreamlineField ComputeStreamlines(const PolicyModel& policy, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi, int resolution,
                                   const RolloutConfig& config);

/// Rollouts from explicit seeds; any dimension.
std::vector<Trajectory> RolloutsFrom(const PolicyModel& policy,
                                     const std::vector<Eigen::VectorXd>& seeds,
                                     const RolloutConfig& config);

/// CSV with header t,x1..xn. `provenance`, when non-null, is written as a
/// leading '#' comment line.
void WriteTrajectoryCsv(const Trajectory& traj, const std::string& path,
                        const nlohmann::json& provenance = nullptr);

/// Rollout bundle (seed,t,x1,x2) and field samples (x1,x2,v1,v2).
void WriteStreamlineCsv(const StreamlineField& field, const std::string& rollouts_path,
                        const std::string& field_path,
                        const nlohmann::json& provenance = nullptr);

}  // namespace plyds
