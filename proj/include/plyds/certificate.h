#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "plyds/gram_polynomial.h"
#include "plyds/lyapunov_model.h"
#include "plyds/policy_model.h"

namespace plyds {

/// Largest coefficient-matching violation a certificate may carry.
inline constexpr double kMatchingTolerance = 1e-8;
/// Default lower bound on λ_min(Q_i).
inline constexpr double kDefaultEpsPd = 1e-8;

/// Random-point audit of positivity and strict decrease.
struct AuditOptions {
  int num_points{1000};
  /// Box in target-relative coordinates. Empty means [-1, 1]^n.
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::uint64_t seed{20240601};
};

enum class Verdict { kCertified, kFailed };

/// Outcome of an independent certificate check.
struct CertificateReport {
  Verdict verdict{Verdict::kFailed};
  /// Empty when certified; otherwise "matching", "lpf_not_positive",
  /// "derivative_not_negative", "audit_positivity", "audit_decrease".
  std::vector<std::string> reasons;
  double matching_residual{0.0};
  std::vector<double> q_min_eig;
  std::vector<double> g_max_eig;
  double eps_decrease{0.0};
  double eps_pd{kDefaultEpsPd};
  int audit_points{0};
  int positivity_passes{0};
  int decrease_passes{0};
  /// max over audit points and blocks of v̇_i(x) + ε‖x‖²; should be <= ~0.
  double worst_shifted_decrease{0.0};

  bool certified() const { return verdict == Verdict::kCertified; }
  nlohmann::json ToJson() const;
};

/// Derivative Gram blocks and margins that witness global asymptotic
/// stability of a (policy, Lyapunov candidate) pair.
struct StabilityCertificate {
  std::vector<GramPolynomial> g_blocks;
  double eps_decrease{0.0};
  double eps_pd{kDefaultEpsPd};
  /// What the producer measured; CheckCertificate recomputes independently.
  CertificateReport report;
};

/// Reduced basis of degree α+β on which the derivative Gram blocks live.
BasisSpec DerivativeBasis(const PolicyModel& policy, const LyapunovModel& lpf);

/// λ_max of a symmetric matrix. Rows and columns that are exactly zero are
/// removed before the eigensolve; they contribute eigenvalue 0.
double MaxEigenvalue(const Eigen::MatrixXd& s);
double MinEigenvalue(const Eigen::MatrixXd& s);

/// Recomputes the matching residual by symbolic expansion, the eigenvalue
/// extremes, and audits v_i > 0 and v̇_i < 0 at random nonzero points.
/// Throws InputError when degrees or dimensions are inconsistent.
CertificateReport CheckCertificate(const PolicyModel& policy,
                                   const LyapunovModel& lpf,
                                   const StabilityCertificate& certificate,
                                   const AuditOptions& audit = {});

/// Coefficient-matching residual max |v̇_i + ε‖x‖² − b ᵀ G_i b| computed by
/// symbolic expansion.
double SymbolicMatchingResidual(const PolicyModel& policy,
                                const LyapunovModel& lpf,
                                const std::vector<GramPolynomial>& g_blocks,
                                double eps_decrease);

}  // namespace plyds
