#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "plyds/basis.h"
#include "plyds/lyapunov_model.h"
#include "plyds/monomial_poly.h"
#include "plyds/policy_model.h"

namespace plyds {

/// coef · Q_i[q] · P[p], where q indexes the LPF block's upper triangle and
/// p indexes the stacked policy parameters (see MatchingSystem).
struct BilinearTerm {
  int q;
  int p;
  double coef;
};

/// One coefficient-matching equation for monomial m:
///
///   Σ_{(k,l) ∈ gram_pairs} w_kl G_i[k,l] = Σ_terms coef·Q_i[q]·P[p] + ε·eps_coef
///
/// with w_kk = 1 and w_kl = 2 for k < l. A row with no Gram pairs is a
/// residual monomial: its right-hand side must vanish.
struct MatchingRow {
  Monomial monomial;
  std::vector<std::pair<int, int>> gram_pairs;
  std::vector<BilinearTerm> terms;
  double eps_coef{0.0};

  bool is_residual() const { return gram_pairs.empty(); }
  /// Σ w_kl over the Gram pairs.
  double GramWeight() const;
};

/// The coefficient-matching map between (P, Q_i) and the derivative Gram
/// blocks G_i: v̇_i + ε‖x‖² = b_{α+β}ᵀ G_i b_{α+β} over the reduced
/// degree-(α+β) basis.
///
/// Every block shares the same rows; only Q_i changes. Policy parameters are
/// stacked as P_0 upper triangle, P_1 upper triangle, ... (row-major,
/// including the constant-constant entry).
class MatchingSystem {
 public:
  static MatchingSystem Build(int n, int alpha, int beta, BasisMode mode,
                              LpfMode lpf_mode, double eps_decrease);

  int n() const { return n_; }
  int alpha() const { return alpha_; }
  int beta() const { return beta_; }
  BasisMode mode() const { return mode_; }
  LpfMode lpf_mode() const { return lpf_mode_; }
  double eps_decrease() const { return eps_decrease_; }
  int num_blocks() const { return lpf_mode_ == LpfMode::kVector ? n_ : 1; }

  BasisSpec ds_basis() const { return PolicyModel::Basis(n_, alpha_, mode_); }
  BasisSpec lpf_basis() const { return LyapunovModel::Basis(n_, beta_, mode_); }
  BasisSpec derivative_basis() const {
    return BasisSpec{n_, alpha_ + beta_, false, mode_};
  }

  const std::vector<MatchingRow>& rows() const { return rows_; }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  /// Indices of rows with no Gram pairs.
  std::vector<int> ResidualRows() const;

  int num_policy_params() const { return n_ * ds_upper_; }
  int num_lpf_params() const { return lpf_upper_; }
  int ds_upper_size() const { return ds_upper_; }
  /// Stacked index of P_j[k, l], k <= l.
  int PolicyParamIndex(int j, int k, int l) const;

  Eigen::VectorXd PolicyParams(const PolicyModel& policy) const;
  PolicyModel PolicyFromParams(const Eigen::VectorXd& p,
                               const Eigen::VectorXd& target) const;
  static Eigen::VectorXd UpperVector(const Eigen::MatrixXd& s);
  static Eigen::MatrixXd FromUpperVector(const Eigen::VectorXd& upper, int m);

  /// Right-hand sides Σ coef·q·p + eps·eps_coef for every row.
  Eigen::VectorXd Rhs(const Eigen::VectorXd& p, const Eigen::VectorXd& q_block,
                      double eps) const;
  /// ∂Rhs/∂p for a fixed LPF block (rows × num_policy_params).
  Eigen::MatrixXd PolicyJacobian(const Eigen::VectorXd& q_block) const;
  /// ∂Rhs/∂q for fixed policy parameters (rows × num_lpf_params).
  Eigen::MatrixXd LpfJacobian(const Eigen::VectorXd& p) const;
  /// Σ w_kl G[k,l] per row.
  Eigen::VectorXd GramSide(const Eigen::MatrixXd& g) const;

  /// Largest |GramSide(G_i) - Rhs_i| over every row and block.
  double MaxResidual(const PolicyModel& policy, const LyapunovModel& lpf,
                     const std::vector<Eigen::MatrixXd>& g_blocks,
                     double eps) const;

  /// Least-change correction of `g` (Frobenius norm) so that every
  /// non-residual row holds with the given right-hand side. Rows partition
  /// the Gram entries, so each row is corrected independently by an equal
  /// shift of its entries.
  Eigen::MatrixXd ProjectGram(const Eigen::MatrixXd& g,
                              const Eigen::VectorXd& rhs) const;

 private:
  int n_{0};
  int alpha_{0};
  int beta_{0};
  BasisMode mode_{BasisMode::kElementwise};
  LpfMode lpf_mode_{LpfMode::kVector};
  double eps_decrease_{0.0};
  int ds_upper_{0};
  int lpf_upper_{0};
  std::vector<MatchingRow> rows_;
};

}  // namespace plyds
