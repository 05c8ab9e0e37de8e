#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "plyds/gram_polynomial.h"
#include "plyds/policy_model.h"

namespace plyds {

/// One Lyapunov candidate per state dimension, or a single aggregate one.
enum class LpfMode { kVector, kScalar };

std::string ToString(LpfMode mode);
LpfMode ParseLpfMode(const std::string& text);

/// Polynomial Lyapunov candidate v(e) with rows b_β(e)ᵀ Q_i b_β(e) over the
/// reduced basis (no constant entry), so v(0) = 0 structurally. Coordinates
/// are relative to the policy target.
class LyapunovModel {
 public:
  LyapunovModel(int n, int beta, BasisMode mode, LpfMode lpf_mode,
                std::vector<GramPolynomial> blocks);

  /// Q_i = identity for every block: the quadratic distance candidate.
  static LyapunovModel Identity(int n, int beta, BasisMode mode,
                                LpfMode lpf_mode);

  static BasisSpec Basis(int n, int beta, BasisMode mode) {
    return BasisSpec{n, beta, false, mode};
  }

  int n() const { return n_; }
  int beta() const { return beta_; }
  BasisMode mode() const { return mode_; }
  LpfMode lpf_mode() const { return lpf_mode_; }
  BasisSpec basis() const { return Basis(n_, beta_, mode_); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<GramPolynomial>& blocks() const { return blocks_; }
  const GramPolynomial& block(int i) const { return blocks_[i]; }

 private:
  int n_;
  int beta_;
  BasisMode mode_;
  LpfMode lpf_mode_;
  std::vector<GramPolynomial> blocks_;
};

/// v(e): length n in vector mode, 1 in scalar mode.
Eigen::VectorXd LpfValue(const LyapunovModel& lpf,
                         const Eigen::Ref<const Eigen::VectorXd>& e);

/// Symbolic v̇_i = Σ_j ∂v_i/∂x_j · f̂_j for every block.
std::vector<MonomialPoly> LpfTimeDerivativePolys(const LyapunovModel& lpf,
                                                 const PolicyModel& policy);

/// v̇(e) evaluated from the symbolic derivative.
Eigen::VectorXd LpfTimeDerivative(const LyapunovModel& lpf,
                                  const PolicyModel& policy,
                                  const Eigen::Ref<const Eigen::VectorXd>& e);

/// Scalar-mode model with Q̂ = Σ_i Q_i. Throws InputError for scalar input.
LyapunovModel AggregateLpf(const LyapunovModel& lpf);

}  // namespace plyds
