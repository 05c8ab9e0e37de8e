#pragma once

#include <vector>

#include <Eigen/Core>

#include "plyds/basis.h"
#include "plyds/gram_polynomial.h"

namespace plyds {

/// Polynomial dynamical-system policy ẋ = f̂(x): row i is
/// b_α(e)ᵀ P_i b_α(e) with e = x - target, over the DS basis (constant
/// included).
class PolicyModel {
 public:
  PolicyModel(int n, int alpha, BasisMode mode, Eigen::VectorXd target,
              std::vector<GramPolynomial> rows);

  /// All-zero policy.
  static PolicyModel Zero(int n, int alpha, BasisMode mode,
                          Eigen::VectorXd target);

  /// DS basis for the given configuration.
  static BasisSpec Basis(int n, int alpha, BasisMode mode) {
    return BasisSpec{n, alpha, true, mode};
  }

  int n() const { return n_; }
  int alpha() const { return alpha_; }
  BasisMode mode() const { return mode_; }
  BasisSpec basis() const { return Basis(n_, alpha_, mode_); }
  const Eigen::VectorXd& target() const { return target_; }
  const std::vector<GramPolynomial>& rows() const { return rows_; }
  const GramPolynomial& row(int i) const { return rows_[i]; }

  /// f̂ at a world-frame state.
  Eigen::VectorXd Velocity(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// f̂ at a state given relative to the target.
  Eigen::VectorXd FieldAt(const Eigen::Ref<const Eigen::VectorXd>& e) const;

  /// Row polynomials expanded in the target-relative coordinates.
  std::vector<MonomialPoly> ExpandRows() const;

 private:
  int n_;
  int alpha_;
  BasisMode mode_;
  Eigen::VectorXd target_;
  std::vector<GramPolynomial> rows_;
};

}  // namespace plyds
