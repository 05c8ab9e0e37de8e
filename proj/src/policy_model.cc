#include "plyds/policy_model.h"

#include "plyds/errors.h"

namespace plyds {

PolicyModel::PolicyModel(int n, int alpha, BasisMode mode,
                         Eigen::VectorXd target,
                         std::vector<GramPolynomial> rows)
    : n_(n),
      alpha_(alpha),
      mode_(mode),
      target_(std::move(target)),
      rows_(std::move(rows)) {
  if (n_ < 1) throw InputError("PolicyModel: n must be >= 1");
  if (alpha_ < 1) throw InputError("PolicyModel: alpha must be >= 1");
  if (target_.size() != n_) throw InputError("PolicyModel: target has wrong dimension");
  if (static_cast<int>(rows_.size()) != n_) {
    throw InputError("PolicyModel: expected one Gram block per state dimension");
  }
  for (const auto& row : rows_) {
    if (!(row.spec() == basis())) {
      throw InputError("PolicyModel: Gram block basis does not match (n, alpha, mode)");
    }
  }
}

PolicyModel PolicyModel::Zero(int n, int alpha, BasisMode mode,
                              Eigen::VectorXd target) {
  std::vector<GramPolynomial> rows(n, GramPolynomial::Zero(Basis(n, alpha, mode)));
  return PolicyModel(n, alpha, mode, std::move(target), std::move(rows));
}

Eigen::VectorXd PolicyModel::Velocity(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != n_) throw InputError("PolicyModel::Velocity: dimension mismatch");
  return FieldAt(x - target_);
}

Eigen::VectorXd PolicyModel::FieldAt(
    const Eigen::Ref<const Eigen::VectorXd>& e) const {
  const Eigen::VectorXd b = BasisVector(e, basis());
  Eigen::VectorXd out(n_);
  for (int i = 0; i < n_; ++i) out[i] = b.dot(rows_[i].gram() * b);
  return out;
}

std::vector<MonomialPoly> PolicyModel::ExpandRows() const {
  std::vector<MonomialPoly> out;
  out.reserve(n_);
  for (const auto& row : rows_) out.push_back(row.Expand());
  return out;
}

}  // namespace plyds
