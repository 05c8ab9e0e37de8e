#include "plyds/certificate.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "plyds/errors.h"

namespace plyds {

nlohmann::json CertificateReport::ToJson() const {
  nlohmann::json j;
  j["verdict"] = certified() ? "certified" : "failed";
  j["reasons"] = reasons;
  j["matching_residual"] = matching_residual;
  j["q_min_eig"] = q_min_eig;
  j["g_max_eig"] = g_max_eig;
  j["eps_decrease"] = eps_decrease;
  j["eps_pd"] = eps_pd;
  j["audit"] = {{"points", audit_points},
                {"positivity_passes", positivity_passes},
                {"decrease_passes", decrease_passes},
                {"worst_shifted_decrease", worst_shifted_decrease}};
  return j;
}

BasisSpec DerivativeBasis(const PolicyModel& policy, const LyapunovModel& lpf) {
  return BasisSpec{policy.n(), policy.alpha() + lpf.beta(), false, policy.mode()};
}

namespace {

Eigen::MatrixXd DropZeroRows(const Eigen::MatrixXd& s, bool* dropped) {
  std::vector<int> keep;
  for (int k = 0; k < s.rows(); ++k) {
    if ((s.row(k).array() != 0.0).any()) keep.push_back(k);
  }
  *dropped = static_cast<int>(keep.size()) < s.rows();
  Eigen::MatrixXd out(keep.size(), keep.size());
  for (size_t a = 0; a < keep.size(); ++a) {
    for (size_t b = 0; b < keep.size(); ++b) out(a, b) = s(keep[a], keep[b]);
  }
  return out;
}

}  // namespace

double MaxEigenvalue(const Eigen::MatrixXd& s) {
  bool dropped = false;
  const Eigen::MatrixXd face = DropZeroRows(s, &dropped);
  if (face.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(face, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  return dropped ? std::max(top, 0.0) : top;
}

double MinEigenvalue(const Eigen::MatrixXd& s) {
  bool dropped = false;
  const Eigen::MatrixXd face = DropZeroRows(s, &dropped);
  if (face.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(face, Eigen::EigenvaluesOnly);
  const double bottom = eig.eigenvalues().minCoeff();
  return dropped ? std::min(bottom, 0.0) : bottom;
}

double SymbolicMatchingResidual(const PolicyModel& policy,
                                const LyapunovModel& lpf,
                                const std::vector<GramPolynomial>& g_blocks,
                                double eps_decrease) {
  const std::vector<MonomialPoly> vdot = LpfTimeDerivativePolys(lpf, policy);
  const int n = policy.n();
  MonomialPoly shift(n);
  for (int k = 0; k < n; ++k) shift.AddTerm(Monomial::Variable(n, k, 2), eps_decrease);
  double worst = 0.0;
  for (size_t i = 0; i < vdot.size(); ++i) {
    const MonomialPoly diff = vdot[i] + shift - g_blocks[i].Expand();
    worst = std::max(worst, diff.MaxAbsCoefficient());
  }
  return worst;
}

CertificateReport CheckCertificate(const PolicyModel& policy,
                                   const LyapunovModel& lpf,
                                   const StabilityCertificate& certificate,
                                   const AuditOptions& audit) {
  const int n = policy.n();
  if (lpf.n() != n) throw InputError("CheckCertificate: LPF dimension differs from policy");
  if (lpf.mode() != policy.mode()) {
    throw InputError("CheckCertificate: LPF and policy use different basis modes");
  }
  if (static_cast<int>(certificate.g_blocks.size()) != lpf.num_blocks()) {
    throw InputError("CheckCertificate: expected one derivative Gram block per LPF block");
  }
  const BasisSpec deriv = DerivativeBasis(policy, lpf);
  for (const auto& g : certificate.g_blocks) {
    if (!(g.spec() == deriv)) {
      throw InputError("CheckCertificate: derivative Gram block has degree " +
                       std::to_string(g.spec().degree) + ", expected alpha+beta = " +
                       std::to_string(deriv.degree));
    }
  }

  CertificateReport report;
  report.eps_decrease = certificate.eps_decrease;
  report.eps_pd = certificate.eps_pd;
  report.matching_residual = SymbolicMatchingResidual(
      policy, lpf, certificate.g_blocks, certificate.eps_decrease);

  bool q_ok = true;
  for (const auto& q : lpf.blocks()) {
    report.q_min_eig.push_back(MinEigenvalue(q.gram()));
    if (!(report.q_min_eig.back() >= certificate.eps_pd)) q_ok = false;
  }
  bool g_ok = true;
  for (const auto& g : certificate.g_blocks) {
    report.g_max_eig.push_back(MaxEigenvalue(g.gram()));
    if (!(report.g_max_eig.back() <= 0.0)) g_ok = false;
  }

  Eigen::VectorXd lo = audit.lo.size() == n ? audit.lo : Eigen::VectorXd::Constant(n, -1.0);
  Eigen::VectorXd hi = audit.hi.size() == n ? audit.hi : Eigen::VectorXd::Constant(n, 1.0);
  std::mt19937_64 rng(audit.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<MonomialPoly> vdot_polys = LpfTimeDerivativePolys(lpf, policy);
  report.worst_shifted_decrease = -std::numeric_limits<double>::infinity();
  int tested = 0;
  while (tested < audit.num_points) {
    Eigen::VectorXd x(n);
    for (int k = 0; k < n; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * unit(rng);
    if (x.squaredNorm() == 0.0) continue;
    ++tested;
    const Eigen::VectorXd v = LpfValue(lpf, x);
    bool positive = true;
    bool decreasing = true;
    for (int i = 0; i < v.size(); ++i) {
      const double vdot = vdot_polys[i].Evaluate(x);
      if (!(v[i] > 0.0)) positive = false;
      if (!(vdot < 0.0)) decreasing = false;
      report.worst_shifted_decrease =
          std::max(report.worst_shifted_decrease,
                   vdot + certificate.eps_decrease * x.squaredNorm());
    }
    report.positivity_passes += positive ? 1 : 0;
    report.decrease_passes += decreasing ? 1 : 0;
  }
  report.audit_points = tested;

  if (!(report.matching_residual <= kMatchingTolerance)) report.reasons.push_back("matching");
  if (!q_ok) report.reasons.push_back("lpf_not_positive");
  if (!g_ok) report.reasons.push_back("derivative_not_negative");
  if (report.positivity_passes != tested) report.reasons.push_back("audit_positivity");
  if (report.decrease_passes != tested) report.reasons.push_back("audit_decrease");
  report.verdict = report.reasons.empty() ? Verdict::kCertified : Verdict::kFailed;
  return report;
}

}  // namespace plyds
