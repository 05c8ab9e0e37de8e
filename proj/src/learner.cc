#include "plyds/learner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include <Eigen/Eigenvalues>

#include "plyds/errors.h"

namespace plyds {

void LearnConfig::Validate() const {
  if (alpha < 1) throw InputError("alpha must be >= 1");
  if (beta < 1) throw InputError("beta must be >= 1");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw InputError("l1 and l2 weights must be >= 0");
  if (!(tolerance >= 1e-9 && tolerance <= 1e-4)) {
    throw InputError("tolerance must lie in [1e-9, 1e-4]");
  }
  if (max_alternations < 0) throw InputError("max_alternations must be >= 0");
  if (sqp_iterations < 0) throw InputError("sqp_iterations must be >= 0");
  if (!(lpf_floor > 0.0)) throw InputError("lpf_floor must be > 0");
  if (!(margin_factor >= 0.0)) throw InputError("margin_factor must be >= 0");
  if (!(eps_pd > 0.0)) throw InputError("eps_pd must be > 0");
  if (audit_points < 1) throw InputError("audit_points must be >= 1");
}

nlohmann::json LearnConfig::ToJson() const {
  return {{"alpha", alpha},
          {"beta", beta},
          {"lambda1", lambda1},
          {"lambda2", lambda2},
          {"tolerance", tolerance},
          {"max_alternations", max_alternations},
          {"basis", ToString(basis)},
          {"lpf_mode", ToString(lpf_mode)},
          {"seed", seed},
          {"sqp_iterations", sqp_iterations},
          {"escalate_basis", escalate_basis},
          {"normalize_coordinates", normalize_coordinates},
          {"lpf_floor", lpf_floor},
          {"margin_factor", margin_factor},
          {"eps_pd", eps_pd},
          {"audit_points", audit_points}};
}

LearnConfig LearnConfig::FromJson(const nlohmann::json& j) {
  LearnConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.lambda1 = j.value("lambda1", c.lambda1);
  c.lambda2 = j.value("lambda2", c.lambda2);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.max_alternations = j.value("max_alternations", c.max_alternations);
  if (j.contains("basis")) c.basis = ParseBasisMode(j["basis"].get<std::string>());
  if (j.contains("lpf_mode")) c.lpf_mode = ParseLpfMode(j["lpf_mode"].get<std::string>());
  c.seed = j.value("seed", c.seed);
  c.sqp_iterations = j.value("sqp_iterations", c.sqp_iterations);
  c.escalate_basis = j.value("escalate_basis", c.escalate_basis);
  c.normalize_coordinates = j.value("normalize_coordinates", c.normalize_coordinates);
  c.lpf_floor = j.value("lpf_floor", c.lpf_floor);
  c.margin_factor = j.value("margin_factor", c.margin_factor);
  c.eps_pd = j.value("eps_pd", c.eps_pd);
  c.audit_points = j.value("audit_points", c.audit_points);
  return c;
}

nlohmann::json LearnReport::ToJson() const {
  return {{"objective_history", objective_history},
          {"alternations", alternations},
          {"sqp_accepted", sqp_accepted},
          {"certified_iterates", certified_iterates},
          {"objective", objective},
          {"train_mse", train_mse},
          {"wall_seconds", wall_seconds},
          {"coordinate_scale", coordinate_scale},
          {"basis_used", ToString(basis_used)},
          {"audit_lo", std::vector<double>(audit_lo.data(), audit_lo.data() + audit_lo.size())},
          {"audit_hi", std::vector<double>(audit_hi.data(), audit_hi.data() + audit_hi.size())},
          {"notes", notes}};
}

namespace {

// Derivative-basis entries of degree α+β cannot carry nonzero G entries: the
// matching top-degree squares are absent from v̇, and G ⪯ 0 then forces the
// whole row and column to vanish. The solver works on the remaining face.
struct Face {
  std::vector<int> index;  // derivative entry -> face position, -1 if dropped
  std::vector<int> entries;
  int size() const { return static_cast<int>(entries.size()); }
};

Face BuildFace(const MatchingSystem& ms) {
  Face face;
  const auto entries = ms.derivative_basis().Entries();
  const int top = ms.alpha() + ms.beta();
  for (size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].degree() < top) {
      face.index.push_back(face.size());
      face.entries.push_back(static_cast<int>(k));
    } else {
      face.index.push_back(-1);
    }
  }
  return face;
}

// Face pairs of one row, in face coordinates.
std::vector<std::pair<int, int>> FacePairs(const Face& face, const MatchingRow& row) {
  std::vector<std::pair<int, int>> out;
  for (const auto& [k, l] : row.gram_pairs) {
    if (face.index[k] >= 0 && face.index[l] >= 0) out.emplace_back(face.index[k], face.index[l]);
  }
  return out;
}

double PairWeight(const std::pair<int, int>& kl) { return kl.first == kl.second ? 1.0 : 2.0; }

// Least-change correction of a face block so every row with face pairs
// matches its right-hand side exactly.
Eigen::MatrixXd ProjectFace(const MatchingSystem& ms, const Face& face,
                            const Eigen::MatrixXd& g, const Eigen::VectorXd& rhs) {
  Eigen::MatrixXd out = 0.5 * (g + g.transpose());
  for (int r = 0; r < ms.num_rows(); ++r) {
    const auto pairs = FacePairs(face, ms.rows()[r]);
    if (pairs.empty()) continue;
    double side = 0.0;
    double weight = 0.0;
    for (const auto& kl : pairs) {
      side += PairWeight(kl) * out(kl.first, kl.second);
      weight += PairWeight(kl);
    }
    const double shift = (rhs[r] - side) / weight;
    for (const auto& [k, l] : pairs) {
      out(k, l) += shift;
      if (k != l) out(l, k) += shift;
    }
  }
  return out;
}

double LargestEigenvalue(const Eigen::MatrixXd& s) {
  if (s.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

// Alternating projections between the matching set and {λ <= -τ} until the
// matched block is negative semidefinite.
Eigen::MatrixXd RepairFace(const MatchingSystem& ms, const Face& face,
                           const Eigen::MatrixXd& g, const Eigen::VectorXd& rhs,
                           double margin) {
  Eigen::MatrixXd cur = ProjectFace(ms, face, g, rhs);
  const double tau = std::max(0.5 * margin, 1e-13 * std::max(1.0, cur.cwiseAbs().maxCoeff()));
  for (int it = 0; it < 200 && LargestEigenvalue(cur) > 0.0; ++it) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cur);
    Eigen::VectorXd lam = eig.eigenvalues().cwiseMin(-tau);
    cur = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    cur = ProjectFace(ms, face, cur, rhs);
  }
  return cur;
}

Eigen::MatrixXd EmbedFace(const Face& face, const Eigen::MatrixXd& g, int full) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(full, full);
  for (int a = 0; a < face.size(); ++a) {
    for (int b = 0; b < face.size(); ++b) out(face.entries[a], face.entries[b]) = g(a, b);
  }
  return out;
}

Eigen::MatrixXd ExtractFace(const Face& face, const Eigen::MatrixXd& g) {
  Eigen::MatrixXd out(face.size(), face.size());
  for (int a = 0; a < face.size(); ++a) {
    for (int b = 0; b < face.size(); ++b) out(a, b) = g(face.entries[a], face.entries[b]);
  }
  return out;
}

std::vector<std::pair<int, int>> UpperPairs(int m) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) out.emplace_back(a, b);
  }
  return out;
}

std::string RowLabel(int block, const MatchingRow& row) {
  return "block " + std::to_string(block) + " monomial " + row.monomial.ToString();
}

AdmmSettings StepSettings() {
  AdmmSettings s;
  s.max_iterations = 6000;
  s.eps_abs = 1e-10;
  s.eps_rel = 1e-8;
  return s;
}

}  // namespace

PolicyStepResult SolvePolicyStep(const MatchingSystem& ms, const PolicyObjective& objective,
                                 const std::vector<Eigen::VectorXd>& q_blocks, double margin,
                                 const AdmmState* warm) {
  if (static_cast<int>(q_blocks.size()) != ms.num_blocks()) {
    throw InputError("SolvePolicyStep: expected one Q block per LPF block");
  }
  if (objective.num_params() != ms.num_policy_params()) {
    throw InputError("SolvePolicyStep: objective and matching system disagree on the basis");
  }
  const Face face = BuildFace(ms);
  const int np = ms.num_policy_params();
  const double eps = ms.eps_decrease();

  ConicProblem prob;
  std::vector<int> pid(np);
  for (int k = 0; k < np; ++k) {
    pid[k] = prob.AddScalar("p" + std::to_string(k), -ConicProblem::kInf,
                            ConicProblem::kInf, objective.l1_weights[k]);
  }
  std::vector<int> gid;
  for (int i = 0; i < ms.num_blocks(); ++i) {
    gid.push_back(prob.AddMatrix("G" + std::to_string(i), std::max(face.size(), 1),
                                 MatrixCone::Nsd(-margin)));
  }
  prob.AddQuadratic(pid, objective.Hessian(), objective.LinearTerm());
  prob.AddConstant(objective.constant);
  for (int j = 0; j < ms.n(); ++j) {
    prob.AddEquality({{prob.Scalar(pid[ms.PolicyParamIndex(j, 0, 0)]), 1.0}}, 0.0,
                     "P" + std::to_string(j) + "[0,0]");
  }
  for (int i = 0; i < ms.num_blocks(); ++i) {
    for (int r = 0; r < ms.num_rows(); ++r) {
      const MatchingRow& row = ms.rows()[r];
      std::vector<std::pair<VarRef, double>> terms;
      for (const auto& kl : FacePairs(face, row)) {
        terms.emplace_back(prob.Entry(gid[i], kl.first, kl.second), PairWeight(kl));
      }
      for (const auto& t : row.terms) {
        const double c = t.coef * q_blocks[i][t.q];
        if (c != 0.0) terms.emplace_back(prob.Scalar(pid[t.p]), -c);
      }
      const double rhs = eps * row.eps_coef;
      if (terms.empty() && rhs == 0.0) continue;
      prob.AddEquality(terms, rhs, RowLabel(i, row));
    }
  }

  const ConicSolution sol = SolveConic(prob, StepSettings(), warm);
  PolicyStepResult out;
  out.params.resize(np);
  for (int k = 0; k < np; ++k) out.params[k] = sol.ScalarValue(prob, pid[k]);
  out.solver_converged = sol.solved();
  out.iterations = sol.iterations;
  out.state = sol.state;
  out.objective = objective.Evaluate(out.params);
  out.g_max_eig = -std::numeric_limits<double>::infinity();
  const int full = ms.derivative_basis().size();
  for (int i = 0; i < ms.num_blocks(); ++i) {
    const Eigen::VectorXd rhs = ms.Rhs(out.params, q_blocks[i], eps);
    Eigen::MatrixXd g = face.size() > 0 ? sol.MatrixValue(prob, gid[i], true)
                                        : Eigen::MatrixXd::Zero(0, 0);
    g = RepairFace(ms, face, g, rhs, margin);
    out.g_max_eig = std::max(out.g_max_eig, LargestEigenvalue(g));
    out.g_blocks.push_back(EmbedFace(face, g, full));
  }
  return out;
}

LpfStepResult SolveLpfStep(const MatchingSystem& ms, const Eigen::VectorXd& params,
                           double lpf_floor) {
  if (params.size() != ms.num_policy_params()) {
    throw InputError("SolveLpfStep: policy parameter vector has wrong length");
  }
  const Face face = BuildFace(ms);
  const int llpf = ms.lpf_basis().size();
  const auto qpairs = UpperPairs(llpf);
  const double eps = ms.eps_decrease();

  ConicProblem prob;
  const int sid = prob.AddScalar("s");
  std::vector<int> qid;
  std::vector<int> wid;
  for (int i = 0; i < ms.num_blocks(); ++i) {
    qid.push_back(prob.AddMatrix("Q" + std::to_string(i), llpf, MatrixCone::Psd(lpf_floor)));
    wid.push_back(prob.AddMatrix("W" + std::to_string(i), std::max(face.size(), 1),
                                 MatrixCone::Psd(0.0)));
  }
  prob.AddLinear(prob.Scalar(sid), -1.0);
  std::vector<std::pair<VarRef, double>> trace;
  for (int i = 0; i < ms.num_blocks(); ++i) {
    for (int a = 0; a < llpf; ++a) trace.emplace_back(prob.Entry(qid[i], a, a), 1.0);
  }
  const double total = static_cast<double>(ms.num_blocks() * llpf);
  prob.AddEquality(trace, total, "trace");
  for (int i = 0; i < ms.num_blocks(); ++i) {
    for (int r = 0; r < ms.num_rows(); ++r) {
      const MatchingRow& row = ms.rows()[r];
      std::vector<std::pair<VarRef, double>> terms;
      for (const auto& kl : FacePairs(face, row)) {
        if (kl.first == kl.second) terms.emplace_back(prob.Scalar(sid), -1.0);
        terms.emplace_back(prob.Entry(wid[i], kl.first, kl.second), -PairWeight(kl));
      }
      for (const auto& t : row.terms) {
        const double c = t.coef * params[t.p];
        if (c == 0.0) continue;
        terms.emplace_back(prob.Entry(qid[i], qpairs[t.q].first, qpairs[t.q].second), -c);
      }
      const double rhs = eps * row.eps_coef;
      if (terms.empty() && rhs == 0.0) continue;
      prob.AddEquality(terms, rhs, RowLabel(i, row));
    }
  }

  AdmmSettings settings = StepSettings();
  settings.max_iterations = 4000;
  const ConicSolution sol = SolveConic(prob, settings);
  LpfStepResult out;
  out.solver_converged = sol.solved();
  out.iterations = sol.iterations;

  // Honest slack of the cone-feasible Q after exact trace normalization.
  double trace_sum = 0.0;
  std::vector<Eigen::MatrixXd> qs;
  for (int i = 0; i < ms.num_blocks(); ++i) {
    qs.push_back(sol.MatrixValue(prob, qid[i], true));
    trace_sum += qs.back().trace();
  }
  double slack = std::numeric_limits<double>::infinity();
  double residual = 0.0;
  for (int i = 0; i < ms.num_blocks(); ++i) {
    qs[i] *= total / trace_sum;
    out.q_blocks.push_back(MatchingSystem::UpperVector(qs[i]));
    const Eigen::VectorXd rhs = ms.Rhs(params, out.q_blocks.back(), eps);
    for (int r = 0; r < ms.num_rows(); ++r) {
      if (FacePairs(face, ms.rows()[r]).empty()) residual = std::max(residual, std::abs(rhs[r]));
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(face.size(), face.size());
    if (face.size() > 0) {
      g = -sol.ScalarValue(prob, sid, true) * Eigen::MatrixXd::Identity(face.size(), face.size()) -
          sol.MatrixValue(prob, wid[i], true);
    }
    g = ProjectFace(ms, face, g, rhs);
    slack = std::min(slack, -LargestEigenvalue(g));
  }
  out.slack = slack;
  out.certifying = slack >= 0.0 && residual <= kMatchingTolerance;
  return out;
}

PolicyStepResult SolvePolicyStep(const DemonstrationSet& d, const LyapunovModel& lpf,
                                 const LearnConfig& config) {
  const MatchingSystem ms = MatchingSystem::Build(d.n, config.alpha, lpf.beta(), lpf.mode(),
                                                  lpf.lpf_mode(), config.tolerance);
  const DemonstrationSet shifted = Preprocess(d, false);
  const PolicyObjective obj =
      AssembleObjective(shifted, config.alpha, lpf.mode(), config.lambda1, config.lambda2);
  std::vector<Eigen::VectorXd> q;
  for (const auto& b : lpf.blocks()) q.push_back(MatchingSystem::UpperVector(b.gram()));
  return SolvePolicyStep(ms, obj, q, config.margin_factor * config.tolerance);
}

LpfStepResult SolveLpfStep(const PolicyModel& policy, const LearnConfig& config,
                           LpfMode lpf_mode) {
  const MatchingSystem ms = MatchingSystem::Build(policy.n(), policy.alpha(), config.beta,
                                                  policy.mode(), lpf_mode, config.tolerance);
  return SolveLpfStep(ms, ms.PolicyParams(policy), config.lpf_floor);
}

namespace {

Eigen::VectorXd DegreeScale(const BasisSpec& spec, double r) {
  const auto entries = spec.Entries();
  Eigen::VectorXd s(entries.size());
  for (size_t k = 0; k < entries.size(); ++k) s[k] = std::pow(r, entries[k].degree());
  return s;
}

// Maps S⁻¹ B S⁻¹.
Eigen::MatrixXd Unscale(const Eigen::MatrixXd& b, const Eigen::VectorXd& s) {
  const Eigen::VectorXd inv = s.cwiseInverse();
  return inv.asDiagonal() * b * inv.asDiagonal();
}

struct Candidate {
  Eigen::VectorXd params;  // learning coordinates
  std::vector<Eigen::VectorXd> q_blocks;
  double objective{0.0};
  std::optional<PolicyModel> policy;
  std::optional<LyapunovModel> lpf;
  StabilityCertificate certificate;
};

class Learner {
 public:
  Learner(const DemonstrationSet& d, const LearnConfig& config, BasisMode mode)
      : data_(d), config_(config), mode_(mode) {
    shifted_ = Preprocess(d, false);
    scale_ = 1.0;
    if (config.normalize_coordinates) {
      double m = 0.0;
      for (const auto& demo : shifted_.demos) m = std::max(m, demo.x.cwiseAbs().maxCoeff());
      if (m > 0.0) scale_ = m;
    }
    objective_ = AssembleObjective(shifted_, config.alpha, mode, config.lambda1,
                                   config.lambda2, scale_);
    ms_ = MatchingSystem::Build(d.n, config.alpha, config.beta, mode, config.lpf_mode,
                                config.tolerance);
    face_ = BuildFace(ms_);
    margin_ = config.margin_factor * config.tolerance;
    const auto [lo, hi] = BoundingBox(shifted_);
    const Eigen::VectorXd center = 0.5 * (lo + hi);
    Eigen::VectorXd half = 0.5 * (hi - lo);
    const double floor = 1e-3 * std::max(1.0, half.maxCoeff());
    half = half.cwiseMax(floor);
    audit_.lo = center - 2.0 * half;
    audit_.hi = center + 2.0 * half;
    audit_.num_points = config.audit_points;
    audit_.seed = config.seed;
  }

  double scale() const { return scale_; }
  const AuditOptions& audit() const { return audit_; }
  const MatchingSystem& ms() const { return ms_; }
  const PolicyObjective& objective() const { return objective_; }

  // Policy step for Q followed by an independent certificate check of the
  // mapped-back models.
  std::optional<Candidate> Evaluate(const std::vector<Eigen::VectorXd>& q,
                                    std::vector<std::string>* notes) {
    const PolicyStepResult step = SolvePolicyStep(ms_, objective_, q, margin_, warm_ ? &*warm_ : nullptr);
    warm_ = step.state;
    if (!(step.g_max_eig <= 0.0)) {
      if (notes) notes->push_back("policy step left λ_max(G) = " + std::to_string(step.g_max_eig));
      return std::nullopt;
    }
    Candidate c;
    c.params = step.params;
    c.q_blocks = q;
    c.objective = step.objective;
    MapBack(step, q, &c);
    if (!c.certificate.report.certified()) {
      if (notes) {
        std::string why;
        for (const auto& s : c.certificate.report.reasons) why += " " + s;
        notes->push_back("candidate failed certification:" + why);
      }
      return std::nullopt;
    }
    return c;
  }

  std::vector<Eigen::VectorXd> IdentityQ() const {
    const int l = ms_.lpf_basis().size();
    return std::vector<Eigen::VectorXd>(
        ms_.num_blocks(), MatchingSystem::UpperVector(Eigen::MatrixXd::Identity(l, l)));
  }

  // Trust-region linearization of the bilinear rows around (p, q); returns
  // the proposed LPF blocks.
  std::optional<std::vector<Eigen::VectorXd>> SqpProposal(const Candidate& at, double fraction) {
    const int np = ms_.num_policy_params();
    const int llpf = ms_.lpf_basis().size();
    const auto qpairs = UpperPairs(llpf);
    const double eps = ms_.eps_decrease();
    double qnorm = 0.0;
    std::vector<Eigen::MatrixXd> qmat;
    for (const auto& q : at.q_blocks) {
      qmat.push_back(MatchingSystem::FromUpperVector(q, llpf));
      qnorm += qmat.back().squaredNorm();
    }
    double pnorm = 0.0;
    for (int j = 0; j < ms_.n(); ++j) {
      const int t = ms_.ds_upper_size();
      pnorm += MatchingSystem::FromUpperVector(at.params.segment(j * t, t), ms_.ds_basis().size())
                   .squaredNorm();
    }
    const double rp = fraction * std::sqrt(pnorm);
    const double rq = fraction * std::sqrt(qnorm);
    if (!(rp > 0.0)) return std::nullopt;

    ConicProblem prob;
    std::vector<int> pid(np);
    for (int k = 0; k < np; ++k) {
      pid[k] = prob.AddScalar("p" + std::to_string(k), at.params[k] - rp, at.params[k] + rp,
                              objective_.l1_weights[k]);
    }
    std::vector<int> qid;
    std::vector<int> gid;
    for (int i = 0; i < ms_.num_blocks(); ++i) {
      qid.push_back(prob.AddMatrix("Q" + std::to_string(i), llpf,
                                   MatrixCone::Psd(config_.lpf_floor)));
      gid.push_back(prob.AddMatrix("G" + std::to_string(i), std::max(face_.size(), 1),
                                   MatrixCone::Nsd(-margin_)));
    }
    prob.AddQuadratic(pid, objective_.Hessian(), objective_.LinearTerm());
    prob.AddConstant(objective_.constant);
    for (int j = 0; j < ms_.n(); ++j) {
      prob.AddEquality({{prob.Scalar(pid[ms_.PolicyParamIndex(j, 0, 0)]), 1.0}}, 0.0);
    }
    std::vector<std::pair<VarRef, double>> trace;
    for (int i = 0; i < ms_.num_blocks(); ++i) {
      for (int a = 0; a < llpf; ++a) trace.emplace_back(prob.Entry(qid[i], a, a), 1.0);
      // Q entries stay within rq of the expansion point.
      for (size_t e = 0; e < qpairs.size(); ++e) {
        const auto [a, b] = qpairs[e];
        const int d = prob.AddScalar("dq", -rq, rq);
        prob.AddEquality({{prob.Entry(qid[i], a, b), 1.0}, {prob.Scalar(d), -1.0}},
                         qmat[i](a, b));
      }
    }
    prob.AddEquality(trace, static_cast<double>(ms_.num_blocks() * llpf), "trace");
    for (int i = 0; i < ms_.num_blocks(); ++i) {
      const Eigen::VectorXd& qk = at.q_blocks[i];
      for (int r = 0; r < ms_.num_rows(); ++r) {
        const MatchingRow& row = ms_.rows()[r];
        std::vector<std::pair<VarRef, double>> terms;
        for (const auto& kl : FacePairs(face_, row)) {
          terms.emplace_back(prob.Entry(gid[i], kl.first, kl.second), PairWeight(kl));
        }
        double rhs = eps * row.eps_coef;
        for (const auto& t : row.terms) {
          terms.emplace_back(prob.Scalar(pid[t.p]), -t.coef * qk[t.q]);
          terms.emplace_back(prob.Entry(qid[i], qpairs[t.q].first, qpairs[t.q].second),
                             -t.coef * at.params[t.p]);
          rhs -= t.coef * qk[t.q] * at.params[t.p];
        }
        prob.AddEquality(terms, rhs, RowLabel(i, row));
      }
    }
    AdmmSettings settings = StepSettings();
    settings.max_iterations = 3000;
    ConicSolution sol;
    try {
      sol = SolveConic(prob, settings);
    } catch (const InfeasibleError&) {
      return std::nullopt;
    }
    double total = 0.0;
    std::vector<Eigen::MatrixXd> qs;
    for (int i = 0; i < ms_.num_blocks(); ++i) {
      qs.push_back(sol.MatrixValue(prob, qid[i], true));
      total += qs.back().trace();
    }
    std::vector<Eigen::VectorXd> out;
    for (auto& q : qs) {
      q *= ms_.num_blocks() * llpf / total;
      out.push_back(MatchingSystem::UpperVector(q));
    }
    return out;
  }

 private:
  void MapBack(const PolicyStepResult& step, const std::vector<Eigen::VectorXd>& q,
               Candidate* c) const {
    const double r = scale_;
    const int n = ms_.n();
    const BasisSpec ds = ms_.ds_basis();
    const BasisSpec lb = ms_.lpf_basis();
    const BasisSpec db = ms_.derivative_basis();
    const Eigen::VectorXd sds = DegreeScale(ds, r);
    const Eigen::VectorXd slpf = DegreeScale(lb, r);
    const Eigen::VectorXd sder = DegreeScale(db, r);

    std::vector<GramPolynomial> rows;
    Eigen::VectorXd praw(ms_.num_policy_params());
    const int t = ms_.ds_upper_size();
    for (int j = 0; j < n; ++j) {
      Eigen::MatrixXd pj =
          r * Unscale(MatchingSystem::FromUpperVector(step.params.segment(j * t, t), ds.size()), sds);
      pj(0, 0) = 0.0;
      praw.segment(j * t, t) = MatchingSystem::UpperVector(pj);
      rows.emplace_back(ds, pj);
    }
    std::vector<Eigen::MatrixXd> qraw;
    double tr = 0.0;
    for (const auto& qi : q) {
      qraw.push_back(Unscale(MatchingSystem::FromUpperVector(qi, lb.size()), slpf));
      tr += qraw.back().trace();
    }
    const double cmul = ms_.num_blocks() * lb.size() / tr;
    const double eps_raw = cmul * ms_.eps_decrease() / (r * r);
    std::vector<GramPolynomial> qblocks;
    std::vector<GramPolynomial> gblocks;
    for (int i = 0; i < ms_.num_blocks(); ++i) {
      qraw[i] *= cmul;
      qblocks.emplace_back(lb, qraw[i]);
      const Eigen::MatrixXd graw = cmul * Unscale(step.g_blocks[i], sder);
      const Eigen::VectorXd rhs = ms_.Rhs(praw, MatchingSystem::UpperVector(qraw[i]), eps_raw);
      const Eigen::MatrixXd face =
          RepairFace(ms_, face_, ExtractFace(face_, graw), rhs, 0.0);
      gblocks.emplace_back(db, EmbedFace(face_, face, db.size()));
    }
    Eigen::VectorXd target = data_.target;
    c->policy.emplace(n, ms_.alpha(), ms_.mode(), target, std::move(rows));
    c->lpf.emplace(n, ms_.beta(), ms_.mode(), ms_.lpf_mode(), std::move(qblocks));
    c->certificate.g_blocks = std::move(gblocks);
    c->certificate.eps_decrease = eps_raw;
    c->certificate.eps_pd = config_.eps_pd;
    c->certificate.report = CheckCertificate(*c->policy, *c->lpf, c->certificate, audit_);
  }

  const DemonstrationSet& data_;
  LearnConfig config_;
  BasisMode mode_;
  DemonstrationSet shifted_;
  double scale_{1.0};
  PolicyObjective objective_;
  MatchingSystem ms_;
  Face face_;
  double margin_{0.0};
  AuditOptions audit_;
  std::optional<AdmmState> warm_;
};

LearnResult Run(const DemonstrationSet& d, const LearnConfig& config, BasisMode mode) {
  const auto start = std::chrono::steady_clock::now();
  Learner learner(d, config, mode);
  LearnReport report;
  report.coordinate_scale = learner.scale();
  report.basis_used = mode;
  report.audit_lo = learner.audit().lo;
  report.audit_hi = learner.audit().hi;

  std::optional<Candidate> best = learner.Evaluate(learner.IdentityQ(), &report.notes);
  if (best) {
    ++report.certified_iterates;
    report.objective_history.push_back(best->objective);
  }

  // Alternation: an LPF step that keeps the current policy feasible, then a
  // policy step; accepted only when certified and J does not increase.
  for (int it = 0; best && it < config.max_alternations; ++it) {
    ++report.alternations;
    const LpfStepResult lpf = SolveLpfStep(learner.ms(), best->params, config.lpf_floor);
    if (!lpf.certifying) {
      report.notes.push_back("LPF step found no certifying Q (slack " +
                             std::to_string(lpf.slack) + ")");
      break;
    }
    std::optional<Candidate> next = learner.Evaluate(lpf.q_blocks, &report.notes);
    if (!next) break;
    ++report.certified_iterates;
    if (next->objective > best->objective) break;
    const double gain = best->objective - next->objective;
    best = std::move(next);
    report.objective_history.push_back(best->objective);
    if (gain < config.tolerance) break;
  }

  // Trust-region refinement of (P, Q) jointly.
  double fraction = 0.1;
  for (int it = 0; best && it < config.sqp_iterations && fraction > 1e-3; ++it) {
    const auto proposal = learner.SqpProposal(*best, fraction);
    std::optional<Candidate> next;
    if (proposal) next = learner.Evaluate(*proposal, nullptr);
    if (next && next->objective < best->objective) {
      ++report.certified_iterates;
      ++report.sqp_accepted;
      const double gain = best->objective - next->objective;
      best = std::move(next);
      report.objective_history.push_back(best->objective);
      if (gain < config.tolerance) break;
    } else {
      fraction *= 0.5;
    }
  }

  if (!best) {
    std::string msg = "no certified iterate found (alpha=" + std::to_string(config.alpha) +
                      ", beta=" + std::to_string(config.beta) + ", basis=" + ToString(mode) +
                      "); try a larger beta or the full basis mode";
    for (const auto& s : report.notes) msg += "\n  " + s;
    throw LearningFailure(msg);
  }
  const double r2 = learner.scale() * learner.scale();
  for (double& j : report.objective_history) j *= r2;
  report.objective = best->objective * r2;
  report.train_mse = DataMse(*best->policy, d);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return LearnResult{std::move(*best->policy), std::move(*best->lpf),
                     std::move(best->certificate), std::move(report)};
}

}  // namespace

LearnResult LearnPolicy(const DemonstrationSet& d, const LearnConfig& config) {
  config.Validate();
  if (d.demos.empty()) throw InputError("LearnPolicy: empty dataset");
  Validate(d);
  try {
    return Run(d, config, config.basis);
  } catch (const InfeasibleError& e) {
    if (!config.escalate_basis || config.basis == BasisMode::kFull) {
      throw LearningFailure(std::string("policy step infeasible: ") + e.what() +
                            "; enable basis escalation or use the full basis mode");
    }
    LearnResult out = Run(d, config, BasisMode::kFull);
    out.report.notes.push_back(std::string("escalated to full basis: ") + e.what());
    return out;
  }
}

}  // namespace plyds
