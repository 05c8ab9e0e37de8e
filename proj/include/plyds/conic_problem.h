#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace plyds {

/// Eigenvalue bound on a symmetric matrix variable: λ_min(M) >= bound for
/// kLowerBound (PSD when bound = 0), λ_max(M) <= bound for kUpperBound (NSD
/// when bound = 0).
struct MatrixCone {
  enum class Kind { kLowerBound, kUpperBound };
  Kind kind{Kind::kLowerBound};
  double bound{0.0};

  static MatrixCone Psd(double lo = 0.0) { return {Kind::kLowerBound, lo}; }
  static MatrixCone Nsd(double hi = 0.0) { return {Kind::kUpperBound, hi}; }
};

/// Reference to one scalar quantity of the problem: a scalar variable or a
/// single entry M[k,l] of a matrix variable.
struct VarRef {
  int index{-1};
  double scale{1.0};
};

/// Solver-facing normal form:
///
///   minimize   ½ sᵀ H s + qᵀ s + Σ w_i |s_i| + const
///   subject to affine equalities over scalars and matrix entries,
///              scalar bounds lo_i <= s_i <= hi_i,
///              eigenvalue bounds on every symmetric matrix variable.
///
/// H acts on scalar variables only. Matrix variables are stored internally
/// as scaled half-vectorizations so the Euclidean norm of the stacked vector
/// equals the Frobenius norm of each block.
class ConicProblem {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  int AddScalar(std::string name, double lo = -kInf, double hi = kInf,
                double l1_weight = 0.0);
  int AddMatrix(std::string name, int side, MatrixCone cone);

  VarRef Scalar(int id) const;
  VarRef Entry(int block, int k, int l) const;

  void AddEquality(const std::vector<std::pair<VarRef, double>>& terms,
                   double rhs, std::string label = {});

  /// Adds ½ vᵀ H v + gᵀ v where v are the given scalar variables.
  void AddQuadratic(const std::vector<int>& scalar_ids,
                    const Eigen::MatrixXd& hessian,
                    const Eigen::VectorXd& gradient);
  void AddLinear(VarRef ref, double coef);
  void AddConstant(double c) { constant_ += c; }

  int num_scalars() const { return static_cast<int>(scalars_.size()); }
  int num_matrices() const { return static_cast<int>(matrices_.size()); }
  int num_equalities() const { return static_cast<int>(rows_.size()); }
  int dimension() const { return dimension_; }

  struct ScalarVar {
    std::string name;
    int offset;
    double lo;
    double hi;
    double l1_weight;
  };
  struct MatrixVar {
    std::string name;
    int offset;
    int side;
    MatrixCone cone;
  };
  struct Row {
    std::vector<std::pair<int, double>> coefs;
    double rhs;
    std::string label;
  };

  const std::vector<ScalarVar>& scalars() const { return scalars_; }
  const std::vector<MatrixVar>& matrices() const { return matrices_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<std::pair<std::pair<int, int>, double>>& hessian_entries()
      const {
    return hessian_;
  }
  const std::vector<std::pair<int, double>>& linear_entries() const {
    return linear_;
  }
  double constant() const { return constant_; }

  /// Dense data in the internal coordinates.
  Eigen::MatrixXd DenseHessian() const;
  Eigen::VectorXd DenseLinear() const;

  /// Packs a symmetric matrix into the internal scaled half-vectorization.
  static Eigen::VectorXd Pack(const Eigen::MatrixXd& m);
  static Eigen::MatrixXd Unpack(const Eigen::Ref<const Eigen::VectorXd>& v,
                                int side);

 private:
  int dimension_{0};
  std::vector<ScalarVar> scalars_;
  std::vector<MatrixVar> matrices_;
  std::vector<Row> rows_;
  std::vector<std::pair<std::pair<int, int>, double>> hessian_;
  std::vector<std::pair<int, double>> linear_;
  double constant_{0.0};
};

struct AdmmSettings {
  double rho{1.0};
  double relaxation{1.6};
  double eps_abs{1e-9};
  double eps_rel{1e-8};
  int max_iterations{20000};
  int check_interval{10};
  int adapt_interval{100};
  /// Relative threshold on singular values when resolving the equalities.
  double rank_tolerance{1e-11};
};

enum class SolveStatus { kSolved, kMaxIterations };

/// ADMM iterate; reusable as a warm start for a problem of identical layout.
struct AdmmState {
  Eigen::VectorXd z;
  Eigen::VectorXd u;
  double rho{0.0};
};

struct ConicSolution {
  SolveStatus status{SolveStatus::kMaxIterations};
  /// Satisfies every equality to rounding; cones only approximately.
  Eigen::VectorXd x_affine;
  /// Satisfies bounds and cones exactly; equalities approximately.
  Eigen::VectorXd x_cone;
  AdmmState state;
  int iterations{0};
  double primal_residual{0.0};
  double dual_residual{0.0};
  /// Objective at x_affine, including the l1 terms and constant.
  double objective{0.0};

  bool solved() const { return status == SolveStatus::kSolved; }

  double ScalarValue(const ConicProblem& prob, int id, bool cone = false) const;
  Eigen::MatrixXd MatrixValue(const ConicProblem& prob, int block,
                              bool cone = true) const;
};

/// First-order augmented-Lagrangian (ADMM) solver. The affine constraints are
/// eliminated through a null-space parametrization, so x-updates reduce to a
/// single cached Cholesky solve; the z-update is the proximal map of the l1
/// terms, bounds, and eigenvalue cones.
///
/// Throws InfeasibleError when the equalities are inconsistent.
ConicSolution SolveConic(const ConicProblem& problem,
                         const AdmmSettings& settings = {},
                         const AdmmState* warm_start = nullptr);

/// Objective value at an internal-coordinate point.
double EvaluateObjective(const ConicProblem& problem, const Eigen::VectorXd& x);

}  // namespace plyds
