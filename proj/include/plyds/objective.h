#pragma once

#include <Eigen/Core>

#include "plyds/basis.h"
#include "plyds/demonstration.h"
#include "plyds/policy_model.h"

namespace plyds {

/// Elastic-net regularized least squares over the stacked policy parameters
/// p (P_0 upper triangle, P_1 upper triangle, ...):
///
///   J(p) = 1/(2 N_t) Σ ‖f̂(x) - ẋ‖² + Σ l1_k |p_k| + Σ l2_k p_k²
///
/// Each row f̂_j(x) = φ(x)ᵀ p_j with φ_kl = w_kl b_k b_l (w_kk = 1, w_kl = 2),
/// so the data term is a convex quadratic. The regularizer counts every
/// matrix entry, so an off-diagonal parameter carries weight 2.
struct PolicyObjective {
  int n{0};
  BasisSpec basis;
  /// (1/N_t) Σ φ φᵀ; the same for every row j.
  Eigen::MatrixXd feature_gram;
  /// Column j holds (1/N_t) Σ φ ẋ_j.
  Eigen::MatrixXd feature_cross;
  /// (1/(2 N_t)) Σ ‖ẋ‖².
  double constant{0.0};
  Eigen::VectorXd l1_weights;
  Eigen::VectorXd l2_weights;

  int num_params() const { return static_cast<int>(l1_weights.size()); }
  int row_params() const { return static_cast<int>(feature_gram.rows()); }

  double DataTerm(const Eigen::VectorXd& p) const;
  double Regularizer(const Eigen::VectorXd& p) const;
  double Evaluate(const Eigen::VectorXd& p) const { return DataTerm(p) + Regularizer(p); }

  /// Hessian of the smooth part (data term plus l2).
  Eigen::MatrixXd Hessian() const;
  /// Gradient of the smooth part at p = 0.
  Eigen::VectorXd LinearTerm() const;
};

/// Builds the objective from target-relative coordinates x - target.
///
/// With coordinate_scale r != 1 the data are read as x̃ = (x - target)/r,
/// ẋ̃ = ẋ/r, and the regularizer weights are rescaled so that J equals the
/// raw-coordinate objective divided by r² once the parameters are mapped
/// back (P = r S⁻¹ P̃ S⁻¹ with S = diag(r^deg b_k)).
/// Throws InputError for an empty dataset.
PolicyObjective AssembleObjective(const DemonstrationSet& d, int alpha,
                                  BasisMode mode, double lambda1, double lambda2,
                                  double coordinate_scale = 1.0);

/// Direct (1/(2 N_t)) Σ ‖f̂(x) - ẋ‖² for a policy on a dataset.
double DataMse(const PolicyModel& policy, const DemonstrationSet& d);

}  // namespace plyds
