#include "plyds/conic_problem.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "plyds/errors.h"

namespace plyds {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

int SvecSize(int side) { return side * (side + 1) / 2; }

// Offset of entry (k, l), k <= l, inside a packed block.
int SvecIndex(int side, int k, int l) {
  if (k > l) std::swap(k, l);
  return k * side - k * (k - 1) / 2 + (l - k);
}

}  // namespace

int ConicProblem::AddScalar(std::string name, double lo, double hi,
                            double l1_weight) {
  if (lo > hi) throw InputError("ConicProblem: scalar '" + name + "' has lo > hi");
  if (l1_weight < 0.0) throw InputError("ConicProblem: negative l1 weight");
  scalars_.push_back({std::move(name), dimension_, lo, hi, l1_weight});
  ++dimension_;
  return num_scalars() - 1;
}

int ConicProblem::AddMatrix(std::string name, int side, MatrixCone cone) {
  if (side < 1) throw InputError("ConicProblem: matrix side must be >= 1");
  matrices_.push_back({std::move(name), dimension_, side, cone});
  dimension_ += SvecSize(side);
  return num_matrices() - 1;
}

VarRef ConicProblem::Scalar(int id) const {
  if (id < 0 || id >= num_scalars()) throw InputError("ConicProblem: bad scalar id");
  return {scalars_[id].offset, 1.0};
}

VarRef ConicProblem::Entry(int block, int k, int l) const {
  if (block < 0 || block >= num_matrices()) {
    throw InputError("ConicProblem: bad matrix id");
  }
  const MatrixVar& m = matrices_[block];
  if (k < 0 || l < 0 || k >= m.side || l >= m.side) {
    throw InputError("ConicProblem: matrix entry out of range");
  }
  // Off-diagonals are stored as √2·M[k,l].
  return {m.offset + SvecIndex(m.side, k, l), k == l ? 1.0 : 1.0 / kSqrt2};
}

void ConicProblem::AddEquality(const std::vector<std::pair<VarRef, double>>& terms,
                               double rhs, std::string label) {
  Row row;
  row.rhs = rhs;
  row.label = std::move(label);
  for (const auto& [ref, coef] : terms) {
    if (coef == 0.0) continue;
    row.coefs.emplace_back(ref.index, coef * ref.scale);
  }
  rows_.push_back(std::move(row));
}

void ConicProblem::AddQuadratic(const std::vector<int>& scalar_ids,
                                const Eigen::MatrixXd& hessian,
                                const Eigen::VectorXd& gradient) {
  const int m = static_cast<int>(scalar_ids.size());
  if (hessian.rows() != m || hessian.cols() != m || gradient.size() != m) {
    throw InputError("ConicProblem::AddQuadratic: size mismatch");
  }
  for (int a = 0; a < m; ++a) {
    const int ia = Scalar(scalar_ids[a]).index;
    if (gradient[a] != 0.0) linear_.emplace_back(ia, gradient[a]);
    for (int b = 0; b < m; ++b) {
      if (hessian(a, b) == 0.0) continue;
      hessian_.push_back({{ia, Scalar(scalar_ids[b]).index}, hessian(a, b)});
    }
  }
}

void ConicProblem::AddLinear(VarRef ref, double coef) {
  if (coef != 0.0) linear_.emplace_back(ref.index, coef * ref.scale);
}

Eigen::MatrixXd ConicProblem::DenseHessian() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dimension_, dimension_);
  for (const auto& [ij, v] : hessian_) h(ij.first, ij.second) += v;
  return 0.5 * (h + h.transpose());
}

Eigen::VectorXd ConicProblem::DenseLinear() const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(dimension_);
  for (const auto& [i, v] : linear_) q[i] += v;
  return q;
}

Eigen::VectorXd ConicProblem::Pack(const Eigen::MatrixXd& m) {
  const int side = static_cast<int>(m.rows());
  Eigen::VectorXd v(SvecSize(side));
  for (int k = 0; k < side; ++k) {
    for (int l = k; l < side; ++l) {
      v[SvecIndex(side, k, l)] =
          k == l ? m(k, k) : kSqrt2 * 0.5 * (m(k, l) + m(l, k));
    }
  }
  return v;
}

Eigen::MatrixXd ConicProblem::Unpack(const Eigen::Ref<const Eigen::VectorXd>& v,
                                     int side) {
  Eigen::MatrixXd m(side, side);
  for (int k = 0; k < side; ++k) {
    for (int l = k; l < side; ++l) {
      const double x = v[SvecIndex(side, k, l)];
      m(k, l) = k == l ? x : x / kSqrt2;
      m(l, k) = m(k, l);
    }
  }
  return m;
}

double ConicSolution::ScalarValue(const ConicProblem& prob, int id,
                                  bool cone) const {
  return (cone ? x_cone : x_affine)[prob.Scalar(id).index];
}

Eigen::MatrixXd ConicSolution::MatrixValue(const ConicProblem& prob, int block,
                                           bool cone) const {
  const auto& m = prob.matrices().at(block);
  const Eigen::VectorXd& x = cone ? x_cone : x_affine;
  return ConicProblem::Unpack(x.segment(m.offset, SvecSize(m.side)), m.side);
}

double EvaluateObjective(const ConicProblem& problem, const Eigen::VectorXd& x) {
  double f = problem.constant();
  for (const auto& [ij, v] : problem.hessian_entries()) {
    f += 0.5 * v * x[ij.first] * x[ij.second];
  }
  for (const auto& [i, v] : problem.linear_entries()) f += v * x[i];
  for (const auto& s : problem.scalars()) f += s.l1_weight * std::abs(x[s.offset]);
  return f;
}

namespace {

// Proximal map of (1/ρ)·(l1 + indicator of bounds and cones).
void Prox(const ConicProblem& prob, double rho, Eigen::VectorXd& v) {
  for (const auto& s : prob.scalars()) {
    double& x = v[s.offset];
    if (s.l1_weight > 0.0) {
      const double t = s.l1_weight / rho;
      x = x > t ? x - t : (x < -t ? x + t : 0.0);
    }
    x = std::clamp(x, s.lo, s.hi);
  }
  for (const auto& m : prob.matrices()) {
    const int len = SvecSize(m.side);
    Eigen::MatrixXd mat = ConicProblem::Unpack(v.segment(m.offset, len), m.side);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mat);
    Eigen::VectorXd lam = eig.eigenvalues();
    bool changed = false;
    for (int k = 0; k < lam.size(); ++k) {
      const double clipped = m.cone.kind == MatrixCone::Kind::kLowerBound
                                 ? std::max(lam[k], m.cone.bound)
                                 : std::min(lam[k], m.cone.bound);
      if (clipped != lam[k]) changed = true;
      lam[k] = clipped;
    }
    if (!changed) continue;
    mat = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    v.segment(m.offset, len) = ConicProblem::Pack(mat);
  }
}

}  // namespace

ConicSolution SolveConic(const ConicProblem& problem, const AdmmSettings& settings,
                         const AdmmState* warm_start) {
  const int dim = problem.dimension();
  const int m = problem.num_equalities();
  if (dim == 0) throw InputError("SolveConic: problem has no variables");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, dim);
  Eigen::VectorXd b(m);
  for (int r = 0; r < m; ++r) {
    for (const auto& [i, c] : problem.rows()[r].coefs) a(r, i) += c;
    b[r] = problem.rows()[r].rhs;
  }

  // Null-space parametrization x = x0 + Z y of {A x = b}.
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd z_basis;
  if (m == 0) {
    z_basis = Eigen::MatrixXd::Identity(dim, dim);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = settings.rank_tolerance * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int rank = 0;
    while (rank < sv.size() && sv[rank] > tol) ++rank;
    const Eigen::MatrixXd& u = svd.matrixU();
    const Eigen::MatrixXd& v = svd.matrixV();
    for (int k = 0; k < rank; ++k) x0 += v.col(k) * (u.col(k).dot(b) / sv[k]);
    z_basis = v.rightCols(dim - rank);
    const Eigen::VectorXd res = a * x0 - b;
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (res.cwiseAbs().maxCoeff() > 1e-9 * scale) {
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int i, int j) {
        return std::abs(res[i]) > std::abs(res[j]);
      });
      std::vector<std::string> worst;
      for (int k = 0; k < std::min(m, 5); ++k) {
        if (std::abs(res[order[k]]) <= 1e-9 * scale) break;
        const std::string& label = problem.rows()[order[k]].label;
        worst.push_back(label.empty() ? "row " + std::to_string(order[k]) : label);
      }
      throw InfeasibleError("SolveConic: equality constraints are inconsistent",
                            std::move(worst));
    }
  }
  const int red = static_cast<int>(z_basis.cols());

  const Eigen::MatrixXd h = problem.DenseHessian();
  const Eigen::VectorXd q = problem.DenseLinear();
  const Eigen::MatrixXd hz = z_basis.transpose() * h * z_basis;
  const Eigen::VectorXd c0 = z_basis.transpose() * (h * x0 + q);

  ConicSolution sol;
  double rho = settings.rho;
  Eigen::VectorXd z = x0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dim);
  if (warm_start != nullptr && warm_start->z.size() == dim &&
      warm_start->u.size() == dim) {
    z = warm_start->z;
    u = warm_start->u;
    if (warm_start->rho > 0.0) rho = warm_start->rho;
  }

  Eigen::LLT<Eigen::MatrixXd> chol;
  auto factor = [&]() {
    chol.compute(hz + rho * Eigen::MatrixXd::Identity(red, red));
  };
  if (red > 0) factor();

  Eigen::VectorXd x = x0;
  Eigen::VectorXd z_prev = z;
  double r_prim = 0.0;
  double r_dual = 0.0;
  int iter = 0;
  for (iter = 1; iter <= settings.max_iterations; ++iter) {
    if (red > 0) {
      const Eigen::VectorXd rhs = -c0 + rho * (z_basis.transpose() * (z - u - x0));
      x = x0 + z_basis * chol.solve(rhs);
    }
    const Eigen::VectorXd xr =
        settings.relaxation * x + (1.0 - settings.relaxation) * z;
    z_prev = z;
    z = xr + u;
    Prox(problem, rho, z);
    u += xr - z;

    const bool check = iter % settings.check_interval == 0 ||
                       iter == settings.max_iterations;
    if (!check) continue;
    r_prim = (x - z).cwiseAbs().maxCoeff();
    const Eigen::VectorXd zt = z_basis.transpose() * (z - z_prev);
    r_dual = red > 0 ? rho * zt.cwiseAbs().maxCoeff() : 0.0;
    const double xnorm = std::max(x.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff());
    const double ynorm =
        red > 0 ? rho * (z_basis.transpose() * u).cwiseAbs().maxCoeff() : 0.0;
    const double eps_p = settings.eps_abs + settings.eps_rel * xnorm;
    const double eps_d = settings.eps_abs + settings.eps_rel * ynorm;
    if (!std::isfinite(r_prim) || !std::isfinite(r_dual)) {
      throw NumericalError("SolveConic: iterates became non-finite", iter);
    }
    if (r_prim <= eps_p && r_dual <= eps_d) {
      sol.status = SolveStatus::kSolved;
      break;
    }
    if (red > 0 && iter % settings.adapt_interval == 0) {
      const double pr = r_prim / std::max(xnorm, 1e-12);
      const double dr = r_dual / std::max(ynorm, 1e-12);
      double ratio = std::sqrt(pr / std::max(dr, 1e-300));
      if (ratio > 5.0 || ratio < 0.2) {
        const double next = std::clamp(rho * ratio, 1e-6, 1e6);
        ratio = next / rho;
        rho = next;
        u /= ratio;
        factor();
      }
    }
  }
  sol.iterations = std::min(iter, settings.max_iterations);
  sol.x_affine = x;
  sol.x_cone = z;
  sol.state = {z, u, rho};
  sol.primal_residual = r_prim;
  sol.dual_residual = r_dual;
  sol.objective = EvaluateObjective(problem, x);
  return sol;
}

}  // namespace plyds
