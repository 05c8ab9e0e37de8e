#include "plyds/objective.h"

#include <cmath>

#include "plyds/errors.h"

namespace plyds {

double PolicyObjective::DataTerm(const Eigen::VectorXd& p) const {
  const int t = row_params();
  double value = constant;
  for (int j = 0; j < n; ++j) {
    const auto pj = p.segment(j * t, t);
    value += 0.5 * pj.dot(feature_gram * pj) - pj.dot(feature_cross.col(j));
  }
  return value;
}

double PolicyObjective::Regularizer(const Eigen::VectorXd& p) const {
  return l1_weights.dot(p.cwiseAbs()) + l2_weights.dot(p.cwiseAbs2());
}

Eigen::MatrixXd PolicyObjective::Hessian() const {
  const int t = row_params();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(num_params(), num_params());
  for (int j = 0; j < n; ++j) h.block(j * t, j * t, t, t) = feature_gram;
  h.diagonal() += 2.0 * l2_weights;
  return h;
}

Eigen::VectorXd PolicyObjective::LinearTerm() const {
  const int t = row_params();
  Eigen::VectorXd g(num_params());
  for (int j = 0; j < n; ++j) g.segment(j * t, t) = -feature_cross.col(j);
  return g;
}

PolicyObjective AssembleObjective(const DemonstrationSet& d, int alpha,
                                  BasisMode mode, double lambda1, double lambda2,
                                  double coordinate_scale) {
  if (d.demos.empty() || d.num_samples() == 0) {
    throw InputError("AssembleObjective: empty dataset");
  }
  if (alpha < 1) throw InputError("AssembleObjective: alpha must be >= 1");
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw InputError("AssembleObjective: regularization weights must be >= 0");
  }
  if (!(coordinate_scale > 0.0)) {
    throw InputError("AssembleObjective: coordinate scale must be > 0");
  }
  const int n = d.n;
  const double r = coordinate_scale;
  PolicyObjective obj;
  obj.n = n;
  obj.basis = PolicyModel::Basis(n, alpha, mode);
  const std::vector<Monomial> entries = obj.basis.Entries();
  const int m = obj.basis.size();
  const int t = UpperTriangleSize(m);

  obj.feature_gram = Eigen::MatrixXd::Zero(t, t);
  obj.feature_cross = Eigen::MatrixXd::Zero(t, n);
  double sq = 0.0;
  Eigen::VectorXd phi(t);
  for (const auto& demo : d.demos) {
    for (int s = 0; s < demo.x.rows(); ++s) {
      const Eigen::VectorXd x = (demo.x.row(s).transpose() - d.target) / r;
      const Eigen::VectorXd v = demo.v.row(s).transpose() / r;
      const Eigen::VectorXd b = BasisVector(x, obj.basis);
      for (int k = 0; k < m; ++k) {
        for (int l = k; l < m; ++l) {
          phi[UpperTriangleIndex(m, k, l)] = (k == l ? 1.0 : 2.0) * b[k] * b[l];
        }
      }
      obj.feature_gram.selfadjointView<Eigen::Lower>().rankUpdate(phi);
      obj.feature_cross += phi * v.transpose();
      sq += v.squaredNorm();
    }
  }
  const double nt = static_cast<double>(d.num_records());
  obj.feature_gram = obj.feature_gram.selfadjointView<Eigen::Lower>();
  obj.feature_gram /= nt;
  obj.feature_cross /= nt;
  obj.constant = 0.5 * sq / nt;

  // Raw entry P_kl = r^(1 - d_k - d_l) P̃_kl; J_raw / r² gives the weights.
  obj.l1_weights.resize(n * t);
  obj.l2_weights.resize(n * t);
  for (int k = 0; k < m; ++k) {
    for (int l = k; l < m; ++l) {
      const int deg = entries[k].degree() + entries[l].degree();
      const double mult = k == l ? 1.0 : 2.0;
      const double w1 = lambda1 * mult * std::pow(r, -1.0 - deg);
      const double w2 = lambda2 * mult * std::pow(r, -2.0 * deg);
      for (int j = 0; j < n; ++j) {
        obj.l1_weights[j * t + UpperTriangleIndex(m, k, l)] = w1;
        obj.l2_weights[j * t + UpperTriangleIndex(m, k, l)] = w2;
      }
    }
  }
  return obj;
}

double DataMse(const PolicyModel& policy, const DemonstrationSet& d) {
  if (policy.n() != d.n) throw InputError("DataMse: dimension mismatch");
  if (d.num_records() == 0) throw InputError("DataMse: empty dataset");
  double sum = 0.0;
  for (const auto& demo : d.demos) {
    for (int s = 0; s < demo.x.rows(); ++s) {
      sum += (policy.Velocity(demo.x.row(s).transpose()) - demo.v.row(s).transpose())
                 .squaredNorm();
    }
  }
  return sum / (2.0 * d.num_records());
}

}  // namespace plyds
