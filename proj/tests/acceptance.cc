// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances are pinned below; certificate checks go through the
// test-side oracles rather than the library's own checker.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles.h"
#include "plyds/errors.h"
#include "plyds/evaluation.h"
#include "plyds/learner.h"
#include "plyds/rollout.h"

namespace {

using namespace plyds;

// Certificate.
constexpr double kQMinEig = 1e-8;
constexpr double kGMaxEig = 0.0;
constexpr double kMatchTol = 1e-8;
constexpr int kAuditPoints = 1000;
// Oracle equivalence.
constexpr int kOracleInstances = 1000;
constexpr double kOracleRelTol = 1e-9;
// Linear recovery.
constexpr int kLinearSeeds = 20;
constexpr double kLinearMse = 1e-5;
// Rollouts.
constexpr int kRandomStarts = 100;
constexpr double kRadiusFraction = 1e-2;
constexpr double kDt = 1e-2;
constexpr long kMaxSteps = 100000;
constexpr int kPushTrials = 50;
constexpr int kPushes = 5;
constexpr long kLastPushStep = 500;
// Sweeps.
constexpr int kSweepSeeds = 10;
constexpr double kCubicScale = 2.0;
constexpr double kNoiseScale = 20.0;
constexpr double kNoiseCertRate = 0.8;
// Runtime.
constexpr double kRuntimeBudget = 60.0;

constexpr int kWorkers = 8;

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Line> lines;

void Report(int id, const std::string& name, bool pass, const std::string& detail) {
  lines.push_back({id, name, pass, detail});
  std::printf("criterion %2d %s  %s: %s\n", id, pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

template <typename... Args>
std::string Fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DemonstrationSet Synth(SynthKind kind, int n, int demos, int samples, double scale = 1.0,
                       std::uint64_t seed = 1) {
  SynthOptions o;
  o.kind = kind;
  o.n = n;
  o.num_demos = demos;
  o.num_samples = samples;
  o.scale = scale;
  o.seed = seed;
  return SynthGenerate(o);
}

std::vector<oracle::Exps> OracleBasis(BasisMode mode, int n, int d, bool constant) {
  return mode == BasisMode::kElementwise ? oracle::ElementwiseBasis(n, d, constant)
                                         : oracle::FullBasis(n, d, constant);
}

double OracleEig(const Eigen::MatrixXd& m, bool max) {
  // Exactly-zero rows and columns (facially reduced entries) carry eigenvalue 0.
  std::vector<int> keep;
  for (int i = 0; i < m.rows(); ++i) {
    if (m.row(i).cwiseAbs().maxCoeff() > 0.0) keep.push_back(i);
  }
  const bool dropped = static_cast<int>(keep.size()) < m.rows();
  if (keep.empty()) return 0.0;
  Eigen::MatrixXd s(keep.size(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i)
    for (size_t j = 0; j < keep.size(); ++j) s(i, j) = m(keep[i], keep[j]);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues();
  double v = max ? ev.maxCoeff() : ev.minCoeff();
  if (dropped) v = max ? std::max(v, 0.0) : std::min(v, 0.0);
  return v;
}

// Independent re-check of a learned model, all arithmetic on the oracle side.
struct OracleCheck {
  bool ok{false};
  double q_min{0.0};
  double g_max{0.0};
  double residual{0.0};
  int decrease_passes{0};
  int positivity_passes{0};
  std::vector<oracle::Poly> v;
  std::vector<oracle::Poly> vdot;
};

OracleCheck CheckModel(const LearnResult& r, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                       std::uint64_t seed) {
  const PolicyModel& p = r.policy;
  const LyapunovModel& l = r.lpf;
  const int n = p.n();
  OracleCheck c;
  const auto ds_basis = OracleBasis(p.mode(), n, p.alpha(), true);
  const auto lpf_basis = OracleBasis(l.mode(), n, l.beta(), false);
  const auto der_basis = OracleBasis(l.mode(), n, p.alpha() + l.beta(), false);
  std::vector<oracle::Poly> f;
  for (int j = 0; j < n; ++j) f.push_back(oracle::Quadratic(ds_basis, p.row(j).gram()));
  oracle::Poly norm2;
  for (int j = 0; j < n; ++j) {
    oracle::Exps e(n, 0);
    e[j] = 2;
    oracle::Add(norm2, e, r.certificate.eps_decrease);
  }
  c.q_min = 1e300;
  c.g_max = -1e300;
  for (int i = 0; i < l.num_blocks(); ++i) {
    const oracle::Poly v = oracle::Quadratic(lpf_basis, l.block(i).gram());
    oracle::Poly vdot;
    for (int j = 0; j < n; ++j) {
      for (const auto& [e, k] : oracle::Mul(oracle::Diff(v, j), f[j])) oracle::Add(vdot, e, k);
    }
    oracle::Poly shifted = vdot;
    for (const auto& [e, k] : norm2) oracle::Add(shifted, e, k);
    const Eigen::MatrixXd& g = r.certificate.g_blocks.at(i).gram();
    c.residual = std::max(c.residual,
                          oracle::MaxAbsDiff(shifted, oracle::Quadratic(der_basis, g)));
    c.q_min = std::min(c.q_min, OracleEig(l.block(i).gram(), false));
    c.g_max = std::max(c.g_max, OracleEig(g, true));
    c.v.push_back(v);
    c.vdot.push_back(vdot);
  }
  std::mt19937_64 rng(seed);
  for (int k = 0; k < kAuditPoints; ++k) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
    if (x.norm() == 0.0) x[0] = 1e-3;
    bool pos = true, dec = true;
    for (size_t i = 0; i < c.v.size(); ++i) {
      pos = pos && oracle::Eval(c.v[i], x) > 0.0;
      dec = dec && oracle::Eval(c.vdot[i], x) < 0.0;
    }
    c.positivity_passes += pos;
    c.decrease_passes += dec;
  }
  c.ok = c.q_min >= kQMinEig && c.g_max <= kGMaxEig && c.residual <= kMatchTol &&
         c.positivity_passes == kAuditPoints && c.decrease_passes == kAuditPoints;
  return c;
}

// Workspace box doubled about its center, in world and target-relative frames.
struct Workspace {
  Eigen::VectorXd lo, hi;
  double scale{1.0};
  double radius{0.0};
};

Workspace MakeWorkspace(const DemonstrationSet& d) {
  const auto [lo, hi] = BoundingBox(d);
  Workspace w;
  const Eigen::VectorXd c = 0.5 * (lo + hi);
  w.lo = c - (hi - lo);
  w.hi = c + (hi - lo);
  w.scale = Scale(d);
  for (const auto& demo : d.demos) {
    for (int s = 0; s < demo.x.rows(); ++s) {
      w.radius = std::max(w.radius, (demo.x.row(s).transpose() - d.target).norm());
    }
  }
  return w;
}

struct Case {
  std::string name;
  DemonstrationSet data;
  LearnConfig config;
  std::optional<LearnResult> result;
  std::string failure;
};

Case MakeCase(std::string name, DemonstrationSet d, int alpha, int beta,
              LpfMode mode = LpfMode::kVector, BasisMode basis = BasisMode::kElementwise,
              double l1 = 1e-4) {
  Case c;
  c.name = std::move(name);
  c.data = std::move(d);
  c.config.alpha = alpha;
  c.config.beta = beta;
  c.config.lpf_mode = mode;
  c.config.basis = basis;
  c.config.lambda1 = l1;
  return c;
}

template <typename T, typename F>
void ParallelFor(std::vector<T>& items, F fn) {
  for (size_t start = 0; start < items.size(); start += kWorkers) {
    std::vector<std::future<void>> jobs;
    for (size_t i = start; i < std::min(items.size(), start + kWorkers); ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] { fn(items[i]); }));
    }
    for (auto& j : jobs) j.get();
  }
}

std::vector<Case> LearnSuite() {
  std::vector<Case> cases;
  cases.push_back(MakeCase("linear a1b1", Synth(SynthKind::kLinear, 2, 5, 200), 1, 1));
  cases.push_back(MakeCase("linear a3b1", Synth(SynthKind::kLinear, 2, 5, 200), 3, 1));
  cases.push_back(
      MakeCase("cubic a3b1", Synth(SynthKind::kCubic, 2, 5, 200, kCubicScale), 3, 1));
  cases.push_back(MakeCase("sine a1b1", Synth(SynthKind::kSine, 2, 5, 200), 1, 1));
  cases.push_back(MakeCase("sine a2b1", Synth(SynthKind::kSine, 2, 5, 200), 2, 1));
  cases.push_back(MakeCase("sine a3b1", Synth(SynthKind::kSine, 2, 5, 200), 3, 1));
  cases.push_back(MakeCase("sine a2b2", Synth(SynthKind::kSine, 2, 5, 200), 2, 2));
  cases.push_back(MakeCase("sine a3b1 scalar", Synth(SynthKind::kSine, 2, 5, 200), 3, 1,
                           LpfMode::kScalar));
  cases.push_back(MakeCase("sine a2b1 full", Synth(SynthKind::kSine, 2, 5, 200), 2, 1,
                           LpfMode::kVector, BasisMode::kFull));
  cases.push_back(MakeCase("sine a3b1 l1", Synth(SynthKind::kSine, 2, 5, 200, 1.0, 7), 3, 1,
                           LpfMode::kVector, BasisMode::kElementwise, 1e-2));
  cases.push_back(
      MakeCase("sine a3b1 x10", Synth(SynthKind::kSine, 2, 5, 200, 10.0, 3), 3, 1));
  cases.push_back(MakeCase("linear 3d a2b1", Synth(SynthKind::kLinear, 3, 5, 200), 2, 1));
  cases.push_back(MakeCase("cubic 1d a3b2", Synth(SynthKind::kCubic, 1, 4, 200, 3.0), 3, 2));
  ParallelFor(cases, [](Case& c) {
    try {
      c.result = LearnPolicy(c.data, c.config);
    } catch (const std::exception& e) {
      c.failure = e.what();
    }
  });
  return cases;
}

bool Converges(const PolicyModel& p, const Eigen::VectorXd& x0, const Workspace& w,
               const std::vector<Perturbation>& pushes = {}) {
  RolloutConfig rc;
  rc.dt = kDt;
  rc.max_steps = kMaxSteps;
  rc.convergence_radius = kRadiusFraction * w.scale;
  try {
    return PerturbedRollout(p, x0, rc, pushes).status == TerminalStatus::kConverged;
  } catch (const NumericalError&) {
    return false;
  }
}

Eigen::VectorXd UniformIn(const Workspace& w, std::mt19937_64& rng) {
  Eigen::VectorXd x(w.lo.size());
  for (int i = 0; i < x.size(); ++i) {
    x[i] = std::uniform_real_distribution<double>(w.lo[i], w.hi[i])(rng);
  }
  return x;
}

void CertificateSuite(const std::vector<Case>& cases) {
  int passed = 0;
  double worst_residual = 0.0, worst_g = -1e300, worst_q = 1e300;
  std::ostringstream bad;
  for (size_t k = 0; k < cases.size(); ++k) {
    const Case& c = cases[k];
    if (!c.result) {
      bad << " " << c.name << "(" << c.failure << ")";
      continue;
    }
    const Workspace w = MakeWorkspace(c.data);
    const OracleCheck o =
        CheckModel(*c.result, w.lo - c.data.target, w.hi - c.data.target, 100 + k);
    worst_residual = std::max(worst_residual, o.residual);
    worst_g = std::max(worst_g, o.g_max);
    worst_q = std::min(worst_q, o.q_min);
    if (o.ok) {
      ++passed;
    } else {
      bad << " " << c.name;
    }
  }
  Report(1, "certificate suite", passed == static_cast<int>(cases.size()),
         Fmt("%d/%zu models; min eig Q %.3g (>= %.0e), max eig G %.3g (<= 0), "
             "matching %.2g (<= %.0e), %d audit points each",
             passed, cases.size(), worst_q, kQMinEig, worst_g, worst_residual, kMatchTol,
             kAuditPoints) +
             bad.str());
}

void OracleEquivalence() {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim(1, 3), deg(1, 4), coin(0, 1);
  double worst = 0.0, worst_coeff = 0.0;
  for (int t = 0; t < kOracleInstances; ++t) {
    const int n = dim(rng);
    const int d = deg(rng);
    const bool constant = coin(rng);
    const BasisMode mode = coin(rng) ? BasisMode::kElementwise : BasisMode::kFull;
    const auto basis = OracleBasis(mode, n, d, constant);
    const Eigen::MatrixXd b = oracle::RandomSymmetric(static_cast<int>(basis.size()), rng);
    const GramPolynomial g(BasisSpec{n, d, constant, mode}, b);
    const oracle::Poly expanded = oracle::Quadratic(basis, b);
    const Eigen::VectorXd x = oracle::RandomPoint(n, rng, -1.5, 1.5);
    const double want = oracle::Eval(expanded, x);
    double mag = 0.0;
    for (const auto& [e, c] : expanded) {
      double t = std::abs(c);
      for (int i = 0; i < n; ++i) t *= std::pow(std::abs(x[i]), e[i]);
      mag += t;
    }
    worst = std::max(worst, std::abs(g.Evaluate(x) - want) / std::max(mag, 1e-300));
    oracle::Poly lib;
    const MonomialPoly expansion = g.Expand();
    for (const auto& [m, c] : expansion.terms()) oracle::Add(lib, m.powers(), c);
    worst_coeff = std::max(worst_coeff, oracle::MaxAbsDiff(lib, expanded));
  }
  Report(2, "oracle equivalence", worst <= kOracleRelTol && worst_coeff <= kOracleRelTol,
         Fmt("%d instances n<=3 degree<=4; max relative evaluation error %.2g, max coefficient "
             "error %.2g (<= %.0e)",
             kOracleInstances, worst, worst_coeff, kOracleRelTol));
}

void LinearRecovery() {
  EvalConfig c;
  c.seeds = kLinearSeeds;
  c.workers = kWorkers;
  c.learn.alpha = 3;
  c.learn.beta = 1;
  const EvalReport r = RunProtocol(Synth(SynthKind::kLinear, 2, 5, 200), c);
  const bool pass = r.certified_count() == kLinearSeeds && r.mean_mse() <= kLinearMse;
  Report(3, "linear recovery", pass,
         Fmt("%d/%d certified, mean test MSE %.3g (<= %.0e)", r.certified_count(), kLinearSeeds,
             r.mean_mse(), kLinearMse));
}

void GlobalConvergence(const std::vector<Case>& cases) {
  int models = 0, ok = 0, total = 0;
  for (size_t k = 0; k < cases.size(); ++k) {
    const Case& c = cases[k];
    if (!c.result || c.data.n != 2) continue;
    ++models;
    const Workspace w = MakeWorkspace(c.data);
    std::mt19937_64 rng(200 + k);
    for (int s = 0; s < kRandomStarts; ++s) {
      ok += Converges(c.result->policy, UniformIn(w, rng), w);
      ++total;
    }
  }
  Report(4, "global convergence", models > 0 && ok == total,
         Fmt("%d/%d rollouts over %d certified 2-D models, %d starts each in 2x workspace, "
             "radius %.0e*scale, dt %.0e, <= %ld steps",
             ok, total, models, kRandomStarts, kRadiusFraction, kDt, kMaxSteps));
}

void PerturbationRecovery(const std::vector<Case>& cases) {
  std::vector<const Case*> models;
  for (const Case& c : cases) {
    if (c.result && c.data.n == 2) models.push_back(&c);
  }
  std::mt19937_64 rng(300);
  int ok = 0;
  for (int t = 0; t < kPushTrials && !models.empty(); ++t) {
    const Case& c = *models[t % models.size()];
    const Workspace w = MakeWorkspace(c.data);
    std::vector<long> steps;
    while (static_cast<int>(steps.size()) < kPushes) {
      const long s = std::uniform_int_distribution<long>(1, kLastPushStep)(rng);
      if (std::find(steps.begin(), steps.end(), s) == steps.end()) steps.push_back(s);
    }
    std::sort(steps.begin(), steps.end());
    std::vector<Perturbation> pushes;
    for (long s : steps) {
      const double angle = std::uniform_real_distribution<double>(0, 2 * std::numbers::pi)(rng);
      const double mag = std::uniform_real_distribution<double>(0, w.radius)(rng);
      pushes.push_back({s, mag * Eigen::Vector2d(std::cos(angle), std::sin(angle))});
    }
    ok += Converges(c.result->policy, UniformIn(w, rng), w, pushes);
  }
  Report(5, "perturbation recovery", !models.empty() && ok == kPushTrials,
         Fmt("%d/%d trials recovered from %d pushes of magnitude <= workspace radius",
             ok, kPushTrials, kPushes));
}

void DegreeTrend() {
  EvalConfig c;
  c.seeds = kSweepSeeds;
  c.workers = kWorkers;
  const SweepReport s =
      DegreeSweep(Synth(SynthKind::kCubic, 2, 7, 200, kCubicScale), {1, 3}, {1}, c);
  const double m1 = s.cells[0].report.median_mse();
  const double m3 = s.cells[1].report.median_mse();
  Report(6, "degree sweep", m3 <= m1,
         Fmt("cubic data over %d seeds: median MSE alpha=3 %.4g <= alpha=1 %.4g", kSweepSeeds,
             m3, m1));
}

void AggregateProperty(const std::vector<Case>& cases) {
  int models = 0, ok = 0;
  for (size_t k = 0; k < cases.size(); ++k) {
    const Case& c = cases[k];
    if (!c.result || c.result->lpf.lpf_mode() != LpfMode::kVector) continue;
    ++models;
    const LyapunovModel agg = AggregateLpf(c.result->lpf);
    const Workspace w = MakeWorkspace(c.data);
    const OracleCheck o =
        CheckModel(*c.result, w.lo - c.data.target, w.hi - c.data.target, 400 + k);
    oracle::Poly v, vdot;
    for (size_t i = 0; i < o.v.size(); ++i) {
      for (const auto& [e, x] : o.v[i]) oracle::Add(v, e, x);
      for (const auto& [e, x] : o.vdot[i]) oracle::Add(vdot, e, x);
    }
    std::mt19937_64 rng(500 + k);
    int pass = 0;
    for (int t = 0; t < kAuditPoints; ++t) {
      const Eigen::VectorXd e = UniformIn(w, rng) - c.data.target;
      const double lib_v = LpfValue(agg, e)[0];
      const double lib_vdot = LpfTimeDerivative(agg, c.result->policy, e)[0];
      const double ov = oracle::Eval(v, e);
      const double od = oracle::Eval(vdot, e);
      const bool agree = std::abs(lib_v - ov) <= 1e-9 * (1 + std::abs(ov)) &&
                         std::abs(lib_vdot - od) <= 1e-9 * (1 + std::abs(od));
      pass += agree && ov > 0 && od < 0;
    }
    ok += pass == kAuditPoints;
  }
  Report(7, "aggregate LPF", models > 0 && ok == models,
         Fmt("%d/%d vector models: summed LPF positive and decreasing at %d points", ok,
             models, kAuditPoints));
}

void SampleEfficiency() {
  const DemonstrationSet d = Synth(SynthKind::kSine, 2, 1, 1000);
  bool certified = false, converged = false;
  std::string detail;
  try {
    const LearnResult r = LearnPolicy(d, LearnConfig{});
    const Workspace w = MakeWorkspace(d);
    const OracleCheck o = CheckModel(r, w.lo - d.target, w.hi - d.target, 600);
    certified = o.ok;
    converged = Converges(r.policy, d.demos[0].x.row(0).transpose(), w);
    detail = Fmt("one demonstration: certified %s, rollout from its start converged %s, "
                 "train MSE %.3g",
                 certified ? "yes" : "no", converged ? "yes" : "no", r.report.train_mse);
  } catch (const std::exception& e) {
    detail = e.what();
  }
  Report(8, "sample efficiency", certified && converged, detail);
}

void NoiseRobustness() {
  EvalConfig c;
  c.seeds = kSweepSeeds;
  c.workers = kWorkers;
  const SweepReport s =
      NoiseSweep(Synth(SynthKind::kSine, 2, 7, 200, kNoiseScale), {0.0, 2.0, 4.0}, c);
  std::vector<double> med;
  for (const auto& cell : s.cells) med.push_back(cell.report.median_mse());
  const double rate = static_cast<double>(s.cells[1].report.certified_count()) / kSweepSeeds;
  const bool pass = rate >= kNoiseCertRate && med[0] <= med[1] && med[1] <= med[2];
  Report(9, "noise robustness", pass,
         Fmt("scale %.0f, levels 0/2/4: median MSE %.4g, %.4g, %.4g; certified at level 2 "
             "%.0f%% (>= %.0f%%)",
             kNoiseScale, med[0], med[1], med[2], 100 * rate, 100 * kNoiseCertRate));
}

void RuntimeEnvelope() {
  const DemonstrationSet d = Synth(SynthKind::kSine, 2, 7, 1000);
  LearnConfig c;
  c.alpha = 3;
  c.beta = 1;
  const auto t0 = std::chrono::steady_clock::now();
  bool certified = false;
  try {
    certified = LearnPolicy(d, c).certificate.report.certified();
  } catch (const std::exception&) {
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Report(10, "runtime envelope", certified && secs < kRuntimeBudget,
         Fmt("7x1000 samples, alpha=3 beta=1: %.2f s (< %.0f s), certified %s", secs,
             kRuntimeBudget, certified ? "yes" : "no"));
}

}  // namespace

int main() {
  const std::vector<Case> cases = LearnSuite();
  CertificateSuite(cases);
  OracleEquivalence();
  LinearRecovery();
  GlobalConvergence(cases);
  PerturbationRecovery(cases);
  DegreeTrend();
  AggregateProperty(cases);
  SampleEfficiency();
  NoiseRobustness();
  RuntimeEnvelope();
  int failed = 0;
  for (const auto& l : lines) failed += !l.pass;
  std::printf("%zu criteria, %d failed\n", lines.size(), failed);
  return failed == 0 ? 0 : 1;
}
