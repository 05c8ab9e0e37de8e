// Command-line front end: learn, verify, rollout, streamlines, eval, synth.
//
// Exit codes: 0 success, 1 usage, 2 data or validation, 3 learning or
// numerical failure, 4 certification failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plyds/certificate.h"
#include "plyds/demonstration.h"
#include "plyds/errors.h"
#include "plyds/evaluation.h"
#include "plyds/learner.h"
#include "plyds/model_io.h"
#include "plyds/rollout.h"
#include "plyds/svg_plot.h"

namespace {

using plyds::InputError;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitLearning = 3;
constexpr int kExitCertification = 4;

std::vector<double> ParseList(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InputError(std::string("cannot parse ") + what + " '" + text + "'");
    }
  }
  return out;
}

Eigen::VectorXd ToVector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

std::vector<double> FromVector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// key=value lines; '#' starts a comment. Keys are long flag names.
std::map<std::string, std::string> ReadOverlay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto l = s.find_first_not_of(" \t\r");
      const auto r = s.find_last_not_of(" \t\r");
      return l == std::string::npos ? std::string() : s.substr(l, r - l + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

// Fills options not given on the command line from the overlay.
void ApplyOverlay(CLI::App* sub, const std::string& path) {
  for (const auto& [key, value] : ReadOverlay(path)) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw CLI::ValidationError("config", "unknown key '" + key + "' in " + path);
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

struct LearnFlags {
  std::string data;
  std::string out;
  plyds::LearnConfig config;
  std::string basis{"elementwise"};
  std::string lpf_mode{"vector"};
  bool lenient{false};
  bool normalize_velocities{false};
};

void AddLearnOptions(CLI::App* sub, LearnFlags& f) {
  sub->add_option("--data", f.data, "Dataset directory")->required();
  sub->add_option("--alpha", f.config.alpha, "Policy degree")->check(CLI::Range(1, 64));
  sub->add_option("--beta", f.config.beta, "Lyapunov degree")->check(CLI::Range(1, 64));
  sub->add_option("--tol", f.config.tolerance, "Decrease margin and stopping threshold")
      ->check(CLI::Range(1e-9, 1e-4));
  sub->add_option("--l1", f.config.lambda1, "l1 weight")->check(CLI::NonNegativeNumber);
  sub->add_option("--l2", f.config.lambda2, "squared Frobenius weight")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--lpf-mode", f.lpf_mode, "vector or scalar")
      ->check(CLI::IsMember({"vector", "scalar"}));
  sub->add_option("--basis", f.basis, "elementwise or full")
      ->check(CLI::IsMember({"elementwise", "full"}));
  sub->add_option("--max-alternations", f.config.max_alternations)->check(CLI::NonNegativeNumber);
  sub->add_option("--sqp-iterations", f.config.sqp_iterations)->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", f.config.seed, "Seed (env PLYDS_SEED)")->envname("PLYDS_SEED");
  sub->add_flag("--escalate-basis", f.config.escalate_basis,
                "Retry in the full basis when the element-wise problem is infeasible");
  sub->add_flag("--lenient", f.lenient, "Re-pin endpoints instead of rejecting the dataset");
  sub->add_flag("--normalize-velocities", f.normalize_velocities);
}

void ResolveLearnFlags(LearnFlags& f) {
  f.config.basis = plyds::ParseBasisMode(f.basis);
  f.config.lpf_mode = plyds::ParseLpfMode(f.lpf_mode);
}

plyds::DemonstrationSet LoadData(const LearnFlags& f) {
  std::vector<std::string> warnings;
  plyds::DemonstrationSet d =
      plyds::LoadDemonstrations(f.data, plyds::LoadOptions{f.lenient}, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return d;
}

nlohmann::json Provenance(const std::string& command, const nlohmann::json& config) {
  return {{"tool", "plyds"}, {"version", plyds::kVersion}, {"command", command}, {"config", config}};
}

int RunLearn(LearnFlags& f) {
  ResolveLearnFlags(f);
  plyds::DemonstrationSet d = LoadData(f);
  if (f.normalize_velocities) {
    const Eigen::VectorXd target = d.target;
    d = plyds::Preprocess(d, true);
    for (auto& demo : d.demos) demo.x.rowwise() += target.transpose();
    d.target = target;
  }
  const plyds::LearnResult r = plyds::LearnPolicy(d, f.config);
  plyds::ModelBundle bundle{r.policy, r.lpf, r.certificate};
  bundle.config = f.config.ToJson();
  bundle.config["data"] = f.data;
  bundle.config["lenient"] = f.lenient;
  bundle.config["normalize_velocities"] = f.normalize_velocities;
  bundle.metrics = r.report.ToJson();
  plyds::SaveModel(bundle, f.out);
  std::cout << "certified model written to " << f.out << " (train MSE " << r.report.train_mse
            << ", " << r.report.wall_seconds << " s)\n";
  return 0;
}

int RunVerify(const std::string& path, int audit_points, const std::string& report_path) {
  const plyds::ModelBundle m = plyds::LoadModel(path);
  plyds::AuditOptions audit;
  audit.num_points = audit_points;
  if (m.metrics.contains("audit_lo") && m.metrics.contains("audit_hi")) {
    const auto lo = m.metrics["audit_lo"].get<std::vector<double>>();
    const auto hi = m.metrics["audit_hi"].get<std::vector<double>>();
    if (static_cast<int>(lo.size()) == m.policy.n() && lo.size() == hi.size()) {
      audit.lo = ToVector(lo);
      audit.hi = ToVector(hi);
    }
  }
  if (m.config.contains("seed")) audit.seed = m.config["seed"].get<std::uint64_t>();
  const plyds::CertificateReport report =
      plyds::CheckCertificate(m.policy, m.lpf, m.certificate, audit);
  nlohmann::json out = report.ToJson();
  out["provenance"] = Provenance("verify", {{"model", path}, {"audit_points", audit_points}});
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    f << out.dump(2) << "\n";
  }
  std::cout << out.dump(2) << "\n";
  return report.certified() ? 0 : kExitCertification;
}

struct RolloutFlags {
  std::string model;
  std::string x0;
  std::string out;
  plyds::RolloutConfig config;
  std::string integrator{"euler"};
};

void AddRolloutOptions(CLI::App* sub, RolloutFlags& f) {
  sub->add_option("--dt", f.config.dt, "Integration step")->check(CLI::PositiveNumber);
  sub->add_option("--max-steps", f.config.max_steps)->check(CLI::PositiveNumber);
  sub->add_option("--radius", f.config.convergence_radius, "Convergence radius")
      ->check(CLI::PositiveNumber);
  sub->add_option("--integrator", f.integrator)->check(CLI::IsMember({"euler", "rk4"}));
}

int RunRollout(RolloutFlags& f) {
  const plyds::ModelBundle m = plyds::LoadModel(f.model);
  f.config.integrator = f.integrator == "rk4" ? plyds::Integrator::kRk4 : plyds::Integrator::kEuler;
  const Eigen::VectorXd x0 = ToVector(ParseList(f.x0, "--x0"));
  const plyds::Trajectory t = plyds::IntegrateRollout(m.policy, x0, f.config);
  nlohmann::json cfg = f.config.ToJson();
  cfg["model"] = f.model;
  cfg["x0"] = FromVector(x0);
  plyds::WriteTrajectoryCsv(t, f.out, Provenance("rollout", cfg));
  std::cout << plyds::ToString(t.status) << " after " << t.steps() << " steps\n";
  return 0;
}

struct StreamFlags {
  RolloutFlags roll;
  std::string bbox;
  int res{20};
  std::string svg;
  std::string csv;
  std::string overlay;
};

int RunStreamlines(StreamFlags& f) {
  const plyds::ModelBundle m = plyds::LoadModel(f.roll.model);
  f.roll.config.integrator =
      f.roll.integrator == "rk4" ? plyds::Integrator::kRk4 : plyds::Integrator::kEuler;
  const auto box = ParseList(f.bbox, "--bbox");
  if (box.size() != 4) throw InputError("--bbox expects xmin,xmax,ymin,ymax");
  Eigen::VectorXd lo(2), hi(2);
  lo << box[0], box[2];
  hi << box[1], box[3];
  const plyds::StreamlineField field =
      plyds::ComputeStreamlines(m.policy, lo, hi, f.res, f.roll.config);
  nlohmann::json cfg = f.roll.config.ToJson();
  cfg["model"] = f.roll.model;
  cfg["bbox"] = box;
  cfg["res"] = f.res;
  if (!f.overlay.empty()) cfg["overlay"] = f.overlay;
  const nlohmann::json prov = Provenance("streamlines", cfg);
  if (!f.csv.empty()) {
    std::filesystem::path p(f.csv);
    const std::string field_path =
        (p.parent_path() / (p.stem().string() + "_field" + p.extension().string())).string();
    plyds::WriteStreamlineCsv(field, f.csv, field_path, prov);
  }
  int converged = 0;
  for (const auto& t : field.rollouts) converged += t.status == plyds::TerminalStatus::kConverged;
  if (!f.svg.empty()) {
    plyds::SvgScene scene;
    scene.lo = Eigen::Vector2d(lo[0], lo[1]);
    scene.hi = Eigen::Vector2d(hi[0], hi[1]);
    for (size_t i = 0; i < field.seeds.size(); ++i) {
      scene.arrow_origins.emplace_back(field.seeds[i][0], field.seeds[i][1]);
      scene.arrow_vectors.emplace_back(field.velocities[i][0], field.velocities[i][1]);
    }
    for (const auto& t : field.rollouts) scene.rollouts.push_back(t.states);
    if (!f.overlay.empty()) {
      const plyds::DemonstrationSet d =
          plyds::LoadDemonstrations(f.overlay, plyds::LoadOptions{true});
      for (const auto& demo : d.demos) scene.demos.push_back(demo.x);
    }
    scene.targets.emplace_back(m.policy.target()[0], m.policy.target()[1]);
    scene.title = std::to_string(converged) + "/" + std::to_string(field.rollouts.size()) +
                  " rollouts converged";
    scene.comment = prov.dump();
    plyds::WriteSvg(scene, f.svg);
  }
  std::cout << converged << "/" << field.rollouts.size() << " rollouts converged\n";
  return 0;
}

struct EvalFlags {
  LearnFlags learn;
  plyds::EvalConfig config;
  std::string out;
  std::string json;
  std::string sweep{"none"};
  std::string alphas{"1,2,3"};
  std::string betas{"1"};
  std::string levels{"0,2,4"};
};

int RunEval(EvalFlags& f) {
  ResolveLearnFlags(f.learn);
  f.config.learn = f.learn.config;
  f.config.run_seed = f.learn.config.seed;
  f.config.normalize_velocities = f.learn.normalize_velocities;
  const plyds::DemonstrationSet d = LoadData(f.learn);
  std::string json_path = f.json;
  if (json_path.empty()) {
    std::filesystem::path p(f.out);
    json_path = (p.parent_path() / (p.stem().string() + ".json")).string();
  }
  if (f.sweep == "none") {
    plyds::EvalReport r = plyds::RunProtocol(d, f.config);
    r.config["data"] = f.learn.data;
    r.WriteCsv(f.out);
    r.WriteJson(json_path);
    std::cout << r.successes() << "/" << r.rows.size() << " seeds learned, "
              << r.certified_count() << " certified, mean test MSE " << r.mean_mse()
              << " ± " << r.std_mse() << "\n";
    return r.successes() > 0 ? 0 : kExitLearning;
  }
  plyds::SweepReport r;
  if (f.sweep == "degree") {
    std::vector<int> a, b;
    for (double v : ParseList(f.alphas, "--alphas")) a.push_back(static_cast<int>(v));
    for (double v : ParseList(f.betas, "--betas")) b.push_back(static_cast<int>(v));
    r = plyds::DegreeSweep(d, a, b, f.config);
  } else if (f.sweep == "noise") {
    r = plyds::NoiseSweep(d, ParseList(f.levels, "--levels"), f.config);
  } else {
    r = plyds::LpfAblation(d, f.config);
  }
  r.WriteCsv(f.out);
  std::ofstream(json_path) << r.ToJson().dump(2) << "\n";
  for (const auto& c : r.cells) {
    std::cout << c.label << ": " << c.report.certified_count() << "/" << c.report.rows.size()
              << " certified, median test MSE " << c.report.median_mse() << "\n";
  }
  for (const auto& a : r.advisories) std::cout << "advisory: " << a << "\n";
  return 0;
}

int RunSynth(const plyds::SynthOptions& o, const std::string& out) {
  plyds::SynthOptions opts = o;
  const plyds::DemonstrationSet d = plyds::SynthGenerate(opts);
  plyds::SaveDemonstrations(d, out,
                            Provenance("synth", {{"kind", plyds::ToString(o.kind)},
                                                 {"n", o.n},
                                                 {"demos", o.num_demos},
                                                 {"samples", o.num_samples},
                                                 {"seed", o.seed},
                                                 {"scale", o.scale}}));
  std::cout << "wrote " << d.num_demos() << " demonstrations to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn certified stable polynomial dynamical systems from demonstrations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(plyds::kVersion));
  std::string config_path;

  LearnFlags learn;
  CLI::App* learn_cmd = app.add_subcommand("learn", "Learn a certified policy");
  AddLearnOptions(learn_cmd, learn);
  learn_cmd->add_option("--out", learn.out, "Model JSON")->required();
  learn_cmd->add_option("--config", config_path, "key=value overlay; flags win");

  std::string verify_path;
  std::string verify_report;
  int audit_points = 1000;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Re-check a model's certificate");
  verify_cmd->add_option("model", verify_path)->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--audit-points", audit_points)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--report", verify_report, "Write the report JSON here");
  verify_cmd->add_option("--config", config_path);

  RolloutFlags roll;
  CLI::App* roll_cmd = app.add_subcommand("rollout", "Simulate one rollout");
  roll_cmd->add_option("model", roll.model)->required()->check(CLI::ExistingFile);
  roll_cmd->add_option("--x0", roll.x0, "Start state, comma separated")->required();
  roll_cmd->add_option("--out", roll.out, "Trajectory CSV")->required();
  AddRolloutOptions(roll_cmd, roll);
  roll_cmd->add_option("--config", config_path);

  StreamFlags stream;
  CLI::App* stream_cmd = app.add_subcommand("streamlines", "Grid rollouts and field plot (n = 2)");
  stream_cmd->add_option("model", stream.roll.model)->required()->check(CLI::ExistingFile);
  stream_cmd->add_option("--bbox", stream.bbox, "xmin,xmax,ymin,ymax")->required();
  stream_cmd->add_option("--res", stream.res, "Grid points per axis")->check(CLI::Range(2, 1000));
  stream_cmd->add_option("--svg", stream.svg, "SVG output");
  stream_cmd->add_option("--csv", stream.csv, "Rollout CSV; field samples go to <stem>_field.csv");
  stream_cmd->add_option("--overlay", stream.overlay, "Dataset directory drawn on top");
  AddRolloutOptions(stream_cmd, stream.roll);
  stream_cmd->add_option("--config", config_path);

  EvalFlags eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Multi-seed evaluation protocol");
  AddLearnOptions(eval_cmd, eval.learn);
  eval_cmd->add_option("--seeds", eval.config.seeds)->check(CLI::Range(1, 100000));
  eval_cmd->add_option("--out", eval.out, "Per-seed CSV report")->required();
  eval_cmd->add_option("--json", eval.json, "JSON summary (default: <out stem>.json)");
  eval_cmd->add_option("--test-fraction", eval.config.test_fraction)
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  eval_cmd->add_option("--noise", eval.config.noise_level)->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--workers", eval.config.workers)->check(CLI::Range(1, 256));
  eval_cmd->add_option("--sweep", eval.sweep)->check(CLI::IsMember({"none", "degree", "noise", "lpf"}));
  eval_cmd->add_option("--alphas", eval.alphas);
  eval_cmd->add_option("--betas", eval.betas);
  eval_cmd->add_option("--levels", eval.levels);
  eval_cmd->add_option("--config", config_path);

  plyds::SynthOptions synth;
  std::string synth_kind;
  std::string synth_out;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate synthetic demonstrations");
  synth_cmd->add_option("--kind", synth_kind)->required()->check(
      CLI::IsMember({"linear", "sine", "cubic"}));
  synth_cmd->add_option("--out", synth_out)->required();
  synth_cmd->add_option("--n", synth.n)->check(CLI::Range(1, 64));
  synth_cmd->add_option("--demos", synth.num_demos)->check(CLI::Range(1, 100000));
  synth_cmd->add_option("--samples", synth.num_samples)->check(CLI::Range(2, 10000000));
  synth_cmd->add_option("--seed", synth.seed)->envname("PLYDS_SEED");
  synth_cmd->add_option("--scale", synth.scale)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--config", config_path);

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) ApplyOverlay(sub, config_path);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*learn_cmd) return RunLearn(learn);
    if (*verify_cmd) return RunVerify(verify_path, audit_points, verify_report);
    if (*roll_cmd) return RunRollout(roll);
    if (*stream_cmd) return RunStreamlines(stream);
    if (*eval_cmd) return RunEval(eval);
    if (*synth_cmd) {
      synth.kind = plyds::ParseSynthKind(synth_kind);
      return RunSynth(synth, synth_out);
    }
  } catch (const plyds::InputError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const plyds::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const plyds::ValidationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const plyds::LearningFailure& e) {
    std::cerr << "learning failed: " << e.what() << "\n";
    return kExitLearning;
  } catch (const plyds::InfeasibleError& e) {
    std::cerr << "learning failed: " << e.what() << "\n";
    return kExitLearning;
  } catch (const plyds::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitLearning;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
