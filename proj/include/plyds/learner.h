#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "plyds/certificate.h"
#include "plyds/conic_problem.h"
#include "plyds/demonstration.h"
#include "plyds/lyapunov_model.h"
#include "plyds/matching_system.h"
#include "plyds/objective.h"
#include "plyds/policy_model.h"

namespace plyds {

struct LearnConfig {
  int alpha{3};
  int beta{1};
  double lambda1{1e-4};
  double lambda2{1e-4};
  /// Strict-decrease margin ε and the alternation stopping threshold.
  double tolerance{1e-6};
  int max_alternations{10};
  BasisMode basis{BasisMode::kElementwise};
  LpfMode lpf_mode{LpfMode::kVector};
  std::uint64_t seed{1};
  /// Trust-region refinement rounds after alternation; 0 disables it.
  int sqp_iterations{4};
  /// Retry in the full monomial basis when the element-wise problem is
  /// infeasible.
  bool escalate_basis{false};
  /// Learn in coordinates scaled by the largest target-relative coordinate.
  bool normalize_coordinates{true};
  /// Lower bound on λ_min(Q_i) inside the solver (learning coordinates).
  double lpf_floor{1e-3};
  /// Cone margin G ⪯ -κ·ε·I used by the policy step.
  double margin_factor{1.0};
  /// Positivity margin required by the final certificate check.
  double eps_pd{kDefaultEpsPd};
  int audit_points{1000};

  /// Throws InputError for α, β < 1, negative weights, or a tolerance
  /// outside [1e-9, 1e-4].
  void Validate() const;
  nlohmann::json ToJson() const;
  static LearnConfig FromJson(const nlohmann::json& j);
};

struct PolicyStepResult {
  Eigen::VectorXd params;
  /// Full derivative-basis blocks; top-degree rows and columns are zero.
  std::vector<Eigen::MatrixXd> g_blocks;
  double objective{0.0};
  /// Largest eigenvalue over the G blocks after repair.
  double g_max_eig{0.0};
  bool solver_converged{false};
  int iterations{0};
  AdmmState state;
};

struct LpfStepResult {
  /// Upper-triangle parameters per block.
  std::vector<Eigen::VectorXd> q_blocks;
  /// Largest s with b ᵀ G_i b = v̇_i + ε‖x‖², G_i ⪯ -s·I on the reduced face.
  double slack{0.0};
  /// slack >= 0: the policy admits a degree-β certificate with this Q.
  bool certifying{false};
  bool solver_converged{false};
  int iterations{0};
};

/// Convex policy step for fixed Q: minimizes the objective over P and G
/// subject to the matching rows, G ⪯ -κε·I on the reduced face, and
/// P_j[0,0] = 0. Works in the coordinates of `objective`.
/// Throws InfeasibleError when the equalities cannot hold.
PolicyStepResult SolvePolicyStep(const MatchingSystem& ms,
                                 const PolicyObjective& objective,
                                 const std::vector<Eigen::VectorXd>& q_blocks,
                                 double margin, const AdmmState* warm = nullptr);

/// Convex LPF step for fixed P: maximizes the decrease slack s subject to the
/// matching rows, Q_i ⪰ floor·I, G_i = -s·I - W_i with W_i ⪰ 0, and
/// Σ tr(Q_i) = blocks·L.
LpfStepResult SolveLpfStep(const MatchingSystem& ms, const Eigen::VectorXd& params,
                           double lpf_floor);

/// Convenience wrappers over target-shifted data in its own coordinates.
PolicyStepResult SolvePolicyStep(const DemonstrationSet& d, const LyapunovModel& lpf,
                                 const LearnConfig& config);
LpfStepResult SolveLpfStep(const PolicyModel& policy, const LearnConfig& config,
                           LpfMode lpf_mode);

struct LearnReport {
  std::vector<double> objective_history;
  int alternations{0};
  int sqp_accepted{0};
  int certified_iterates{0};
  double objective{0.0};
  double train_mse{0.0};
  double wall_seconds{0.0};
  double coordinate_scale{1.0};
  BasisMode basis_used{BasisMode::kElementwise};
  /// Target-relative box used by the certificate audit.
  Eigen::VectorXd audit_lo;
  Eigen::VectorXd audit_hi;
  std::vector<std::string> notes;

  nlohmann::json ToJson() const;
};

struct LearnResult {
  PolicyModel policy;
  LyapunovModel lpf;
  StabilityCertificate certificate;
  LearnReport report;
};

/// Alternates policy and LPF steps from Q = I, then refines with trust-region
/// linearizations of the bilinear rows. Every candidate is checked by
/// CheckCertificate in the data's coordinates; the best certified one wins.
/// Throws LearningFailure when no candidate certifies.
LearnResult LearnPolicy(const DemonstrationSet& d, const LearnConfig& config);

}  // namespace plyds
