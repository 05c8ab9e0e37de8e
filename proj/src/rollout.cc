#include "plyds/rollout.h"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "plyds/errors.h"

namespace plyds {

std::string ToString(Integrator integrator) {
  return integrator == Integrator::kRk4 ? "rk4" : "euler";
}

std::string ToString(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::kConverged: return "converged";
    case TerminalStatus::kStepLimit: return "step_limit";
    case TerminalStatus::kEscapedBox: return "escaped_box";
  }
  return "step_limit";
}

void RolloutConfig::Validate(int n) const {
  if (!(dt > 0.0)) throw InputError("rollout dt must be > 0");
  if (!(convergence_radius > 0.0)) throw InputError("convergence radius must be > 0");
  if (max_steps < 1) throw InputError("max_steps must be >= 1");
  if (box_lo.size() != box_hi.size()) throw InputError("box bounds differ in size");
  if (box_lo.size() != 0 && box_lo.size() != n) throw InputError("box dimension differs from n");
}

nlohmann::json RolloutConfig::ToJson() const {
  nlohmann::json j = {{"dt", dt},
                      {"max_steps", max_steps},
                      {"convergence_radius", convergence_radius},
                      {"integrator", ToString(integrator)}};
  if (box_lo.size() > 0) {
    j["box_lo"] = std::vector<double>(box_lo.data(), box_lo.data() + box_lo.size());
    j["box_hi"] = std::vector<double>(box_hi.data(), box_hi.data() + box_hi.size());
  }
  return j;
}

namespace {

Eigen::VectorXd Field(const PolicyModel& policy, const Eigen::VectorXd& x, long step) {
  Eigen::VectorXd f = policy.Velocity(x);
  if (!f.allFinite()) throw NumericalError("non-finite field value during rollout", step);
  return f;
}

Eigen::VectorXd Step(const PolicyModel& policy, const Eigen::VectorXd& x,
                     const RolloutConfig& c, long step) {
  if (c.integrator == Integrator::kEuler) return x + c.dt * Field(policy, x, step);
  const Eigen::VectorXd k1 = Field(policy, x, step);
  const Eigen::VectorXd k2 = Field(policy, x + 0.5 * c.dt * k1, step);
  const Eigen::VectorXd k3 = Field(policy, x + 0.5 * c.dt * k2, step);
  const Eigen::VectorXd k4 = Field(policy, x + c.dt * k3, step);
  return x + (c.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool Outside(const RolloutConfig& c, const Eigen::VectorXd& x) {
  if (c.box_lo.size() == 0) return false;
  return ((x - c.box_lo).array() < 0.0).any() || ((c.box_hi - x).array() < 0.0).any();
}

}  // namespace

Trajectory PerturbedRollout(const PolicyModel& policy, const Eigen::VectorXd& x0,
                            const RolloutConfig& config,
                            const std::vector<Perturbation>& perturbations) {
  const int n = policy.n();
  if (x0.size() != n) throw InputError("rollout start has the wrong dimension");
  config.Validate(n);
  std::vector<Perturbation> pushes = perturbations;
  for (const auto& p : pushes) {
    if (p.offset.size() != n) throw InputError("perturbation offset has the wrong dimension");
    if (p.step < 0 || p.step >= config.max_steps) {
      throw InputError("perturbation step must lie in [0, max_steps)");
    }
  }
  std::stable_sort(pushes.begin(), pushes.end(),
                   [](const Perturbation& a, const Perturbation& b) { return a.step < b.step; });
  const long last_push = pushes.empty() ? -1 : pushes.back().step;

  std::vector<Eigen::VectorXd> states{x0};
  Trajectory traj;
  traj.dt = config.dt;
  Eigen::VectorXd x = x0;
  size_t next = 0;
  for (long k = 0;; ++k) {
    while (next < pushes.size() && pushes[next].step == k) x += pushes[next++].offset;
    states.back() = x;
    if (Outside(config, x)) {
      traj.status = TerminalStatus::kEscapedBox;
      break;
    }
    if (k > last_push && (x - policy.target()).norm() <= config.convergence_radius) {
      traj.status = TerminalStatus::kConverged;
      break;
    }
    if (k == config.max_steps) {
      traj.status = TerminalStatus::kStepLimit;
      break;
    }
    x = Step(policy, x, config, k);
    states.push_back(x);
  }
  traj.states.resize(static_cast<long>(states.size()), n);
  for (size_t k = 0; k < states.size(); ++k) traj.states.row(k) = states[k].transpose();
  return traj;
}

Trajectory IntegrateRollout(const PolicyModel& policy, const Eigen::VectorXd& x0,
                            const RolloutConfig& config) {
  return PerturbedRollout(policy, x0, config, {});
}

std::vector<Trajectory> RolloutsFrom(const PolicyModel& policy,
                                     const std::vector<Eigen::VectorXd>& seeds,
                                     const RolloutConfig& config) {
  std::vector<Trajectory> out;
  out.reserve(seeds.size());
  for (const auto& s : seeds) out.push_back(IntegrateRollout(policy, s, config));
  return out;
}

StreamlineField ComputeStreamlines(const PolicyModel& policy, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi, int resolution,
                                   const RolloutConfig& config) {
  if (policy.n() != 2) {
    throw UnsupportedDimensionError("streamline grids need n = 2, got n = " +
                                    std::to_string(policy.n()));
  }
  if (resolution < 2) throw InputError("streamline resolution must be >= 2");
  if (lo.size() != 2 || hi.size() != 2 || !((hi - lo).array() > 0.0).all()) {
    throw InputError("streamline box must satisfy lo < hi in 2 dimensions");
  }
  StreamlineField out;
  for (int b = 0; b < resolution; ++b) {
    for (int a = 0; a < resolution; ++a) {
      Eigen::VectorXd s(2);
      s[0] = lo[0] + (hi[0] - lo[0]) * a / (resolution - 1);
      s[1] = lo[1] + (hi[1] - lo[1]) * b / (resolution - 1);
      out.seeds.push_back(s);
      out.velocities.push_back(policy.Velocity(s));
    }
  }
  out.rollouts = RolloutsFrom(policy, out.seeds, config);
  return out;
}

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void Provenance(std::ofstream& out, const nlohmann::json& provenance) {
  if (!provenance.is_null()) out << "# " << provenance.dump() << "\n";
}

}  // namespace

void WriteTrajectoryCsv(const Trajectory& traj, const std::string& path,
                        const nlohmann::json& provenance) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  Provenance(out, provenance);
  out << "t";
  for (int k = 1; k <= traj.states.cols(); ++k) out << ",x" << k;
  out << "\n";
  for (long s = 0; s < traj.states.rows(); ++s) {
    out << Num(s * traj.dt);
    for (int k = 0; k < traj.states.cols(); ++k) out << "," << Num(traj.states(s, k));
    out << "\n";
  }
}

void WriteStreamlineCsv(const StreamlineField& field, const std::string& rollouts_path,
                        const std::string& field_path, const nlohmann::json& provenance) {
  std::ofstream roll(rollouts_path);
  if (!roll) throw InputError("cannot write " + rollouts_path);
  Provenance(roll, provenance);
  roll << "seed,t,x1,x2\n";
  for (size_t i = 0; i < field.rollouts.size(); ++i) {
    const Trajectory& t = field.rollouts[i];
    for (long s = 0; s < t.states.rows(); ++s) {
      roll << i << "," << Num(s * t.dt) << "," << Num(t.states(s, 0)) << ","
           << Num(t.states(s, 1)) << "\n";
    }
  }
  std::ofstream grid(field_path);
  if (!grid) throw InputError("cannot write " + field_path);
  Provenance(grid, provenance);
  grid << "x1,x2,v1,v2\n";
  for (size_t i = 0; i < field.seeds.size(); ++i) {
    grid << Num(field.seeds[i][0]) << "," << Num(field.seeds[i][1]) << ","
         << Num(field.velocities[i][0]) << "," << Num(field.velocities[i][1]) << "\n";
  }
}

}  // namespace plyds
