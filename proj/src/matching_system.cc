#include "plyds/matching_system.h"

#include <cmath>
#include <map>

#include "plyds/errors.h"
#include "plyds/gram_polynomial.h"

namespace plyds {

double MatchingRow::GramWeight() const {
  double w = 0.0;
  for (const auto& [k, l] : gram_pairs) w += (k == l) ? 1.0 : 2.0;
  return w;
}

MatchingSystem MatchingSystem::Build(int n, int alpha, int beta,
                                     BasisMode mode, LpfMode lpf_mode,
                                     double eps_decrease) {
  if (n < 1) throw InputError("MatchingSystem: n must be >= 1");
  if (alpha < 1 || beta < 1) {
    throw InputError("MatchingSystem: alpha and beta must be >= 1");
  }
  MatchingSystem ms;
  ms.n_ = n;
  ms.alpha_ = alpha;
  ms.beta_ = beta;
  ms.mode_ = mode;
  ms.lpf_mode_ = lpf_mode;
  ms.eps_decrease_ = eps_decrease;

  const std::vector<Monomial> ds = ms.ds_basis().Entries();
  const std::vector<Monomial> lpf = ms.lpf_basis().Entries();
  const int lds = static_cast<int>(ds.size());
  const int llpf = static_cast<int>(lpf.size());
  ms.ds_upper_ = UpperTriangleSize(lds);
  ms.lpf_upper_ = UpperTriangleSize(llpf);

  // v_i = Σ_{a<=b} w_ab Q[a,b] c_a c_b and f_j = Σ_{k<=l} w_kl P_j[k,l] b_k b_l,
  // so v̇_i = Σ_j Σ w_ab w_kl Q[a,b] P_j[k,l] ∂_j(c_a c_b) b_k b_l.
  std::map<Monomial, std::map<std::pair<int, int>, double>> bilinear;
  for (int a = 0; a < llpf; ++a) {
    for (int b = a; b < llpf; ++b) {
      const Monomial vab = lpf[a] * lpf[b];
      const double wab = (a == b) ? 1.0 : 2.0;
      const int q = UpperTriangleIndex(llpf, a, b);
      for (int j = 0; j < n; ++j) {
        const int e = vab.power(j);
        if (e == 0) continue;
        std::vector<int> powers = vab.powers();
        powers[j] -= 1;
        const Monomial dv(std::move(powers));
        for (int k = 0; k < lds; ++k) {
          for (int l = k; l < lds; ++l) {
            const double wkl = (k == l) ? 1.0 : 2.0;
            const int p = ms.PolicyParamIndex(j, k, l);
            bilinear[dv * (ds[k] * ds[l])][{q, p}] += wab * wkl * e;
          }
        }
      }
    }
  }

  GramSupport support = ComputeGramSupport(ms.derivative_basis());
  std::map<Monomial, MatchingRow> rows;
  for (auto& [m, pairs] : support) {
    rows[m].monomial = m;
    rows[m].gram_pairs = std::move(pairs);
  }
  for (auto& [m, terms] : bilinear) {
    MatchingRow& row = rows[m];
    row.monomial = m;
    for (const auto& [qp, coef] : terms) {
      if (coef != 0.0) row.terms.push_back({qp.first, qp.second, coef});
    }
  }
  for (int k = 0; k < n; ++k) {
    rows[Monomial::Variable(n, k, 2)].eps_coef = 1.0;
  }
  for (auto& [m, row] : rows) {
    row.monomial = m;
    ms.rows_.push_back(std::move(row));
  }
  return ms;
}

std::vector<int> MatchingSystem::ResidualRows() const {
  std::vector<int> out;
  for (int r = 0; r < num_rows(); ++r) {
    if (rows_[r].is_residual()) out.push_back(r);
  }
  return out;
}

int MatchingSystem::PolicyParamIndex(int j, int k, int l) const {
  const int lds = ds_basis().size();
  if (k > l) std::swap(k, l);
  return j * ds_upper_ + UpperTriangleIndex(lds, k, l);
}

Eigen::VectorXd MatchingSystem::UpperVector(const Eigen::MatrixXd& s) {
  const std::vector<double> upper = FlattenUpper(s);
  return Eigen::Map<const Eigen::VectorXd>(upper.data(),
                                           static_cast<int>(upper.size()));
}

Eigen::MatrixXd MatchingSystem::FromUpperVector(const Eigen::VectorXd& upper,
                                                int m) {
  return UnflattenUpper(std::vector<double>(upper.data(), upper.data() + upper.size()),
                        m);
}

Eigen::VectorXd MatchingSystem::PolicyParams(const PolicyModel& policy) const {
  if (policy.n() != n_ || policy.alpha() != alpha_ || policy.mode() != mode_) {
    throw InputError("MatchingSystem: policy degree or dimension mismatch");
  }
  Eigen::VectorXd p(num_policy_params());
  for (int j = 0; j < n_; ++j) {
    p.segment(j * ds_upper_, ds_upper_) = UpperVector(policy.row(j).gram());
  }
  return p;
}

PolicyModel MatchingSystem::PolicyFromParams(
    const Eigen::VectorXd& p, const Eigen::VectorXd& target) const {
  if (p.size() != num_policy_params()) {
    throw InputError("MatchingSystem: policy parameter vector has wrong length");
  }
  const BasisSpec spec = ds_basis();
  std::vector<GramPolynomial> rows;
  for (int j = 0; j < n_; ++j) {
    rows.emplace_back(spec, FromUpperVector(p.segment(j * ds_upper_, ds_upper_),
                                            spec.size()));
  }
  return PolicyModel(n_, alpha_, mode_, target, std::move(rows));
}

Eigen::VectorXd MatchingSystem::Rhs(const Eigen::VectorXd& p,
                                    const Eigen::VectorXd& q_block,
                                    double eps) const {
  Eigen::VectorXd out(num_rows());
  for (int r = 0; r < num_rows(); ++r) {
    const MatchingRow& row = rows_[r];
    double value = eps * row.eps_coef;
    for (const auto& t : row.terms) value += t.coef * q_block[t.q] * p[t.p];
    out[r] = value;
  }
  return out;
}

Eigen::MatrixXd MatchingSystem::PolicyJacobian(
    const Eigen::VectorXd& q_block) const {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(num_rows(), num_policy_params());
  for (int r = 0; r < num_rows(); ++r) {
    for (const auto& t : rows_[r].terms) jac(r, t.p) += t.coef * q_block[t.q];
  }
  return jac;
}

Eigen::MatrixXd MatchingSystem::LpfJacobian(const Eigen::VectorXd& p) const {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(num_rows(), num_lpf_params());
  for (int r = 0; r < num_rows(); ++r) {
    for (const auto& t : rows_[r].terms) jac(r, t.q) += t.coef * p[t.p];
  }
  return jac;
}

Eigen::VectorXd MatchingSystem::GramSide(const Eigen::MatrixXd& g) const {
  Eigen::VectorXd out(num_rows());
  for (int r = 0; r < num_rows(); ++r) {
    double value = 0.0;
    for (const auto& [k, l] : rows_[r].gram_pairs) {
      value += (k == l ? 1.0 : 2.0) * g(k, l);
    }
    out[r] = value;
  }
  return out;
}

double MatchingSystem::MaxResidual(const PolicyModel& policy,
                                   const LyapunovModel& lpf,
                                   const std::vector<Eigen::MatrixXd>& g_blocks,
                                   double eps) const {
  if (lpf.num_blocks() != num_blocks() ||
      static_cast<int>(g_blocks.size()) != num_blocks()) {
    throw InputError("MatchingSystem::MaxResidual: block count mismatch");
  }
  const Eigen::VectorXd p = PolicyParams(policy);
  double worst = 0.0;
  for (int i = 0; i < num_blocks(); ++i) {
    const Eigen::VectorXd q = UpperVector(lpf.block(i).gram());
    const Eigen::VectorXd diff = GramSide(g_blocks[i]) - Rhs(p, q, eps);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::MatrixXd MatchingSystem::ProjectGram(const Eigen::MatrixXd& g,
                                            const Eigen::VectorXd& rhs) const {
  Eigen::MatrixXd out = 0.5 * (g + g.transpose());
  const Eigen::VectorXd side = GramSide(out);
  for (int r = 0; r < num_rows(); ++r) {
    const MatchingRow& row = rows_[r];
    if (row.is_residual()) continue;
    const double shift = (rhs[r] - side[r]) / row.GramWeight();
    for (const auto& [k, l] : row.gram_pairs) {
      out(k, l) += shift;
      if (k != l) out(l, k) += shift;
    }
  }
  return out;
}

}  // namespace plyds
