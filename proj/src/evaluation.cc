#include "plyds/evaluation.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "plyds/errors.h"
#include "plyds/model_io.h"
#include "plyds/objective.h"

namespace plyds {

double TestMse(const PolicyModel& policy, const DemonstrationSet& test) {
  if (policy.n() != test.n) {
    throw InputError("TestMse: policy has n = " + std::to_string(policy.n()) +
                     ", test set has n = " + std::to_string(test.n));
  }
  return DataMse(policy, test);
}

nlohmann::json EvalConfig::ToJson() const {
  return {{"learn", learn.ToJson()},
          {"seeds", seeds},
          {"run_seed", run_seed},
          {"test_fraction", test_fraction},
          {"normalize_velocities", normalize_velocities},
          {"noise_level", noise_level}};
}

namespace {

std::vector<double> SuccessfulMse(const EvalReport& r) {
  std::vector<double> out;
  for (const auto& row : r.rows) {
    if (row.learned) out.push_back(row.test_mse);
  }
  return out;
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json Provenance(const nlohmann::json& config) {
  return {{"schema", kEvalSchema}, {"version", kVersion}, {"config", config}};
}

double NanIfEmpty(const std::vector<double>& v, double value) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : value;
}

}  // namespace

int EvalReport::successes() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(),
                                        [](const SeedResult& r) { return r.learned; }));
}

int EvalReport::certified_count() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(),
                                        [](const SeedResult& r) { return r.certified; }));
}

double EvalReport::mean_mse() const {
  const auto v = SuccessfulMse(*this);
  double s = 0.0;
  for (double x : v) s += x;
  return NanIfEmpty(v, v.empty() ? 0.0 : s / v.size());
}

double EvalReport::std_mse() const {
  const auto v = SuccessfulMse(*this);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_mse();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size());
}

double EvalReport::median_mse() const {
  auto v = SuccessfulMse(*this);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double EvalReport::mean_wall_seconds() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.wall_seconds;
  return s / rows.size();
}

bool EvalReport::any_overlap() const {
  return std::any_of(rows.begin(), rows.end(), [](const SeedResult& r) { return r.overlap; });
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"index", r.index},
                         {"seed", r.seed},
                         {"learned", r.learned},
                         {"certified", r.certified},
                         {"test_mse", r.test_mse},
                         {"train_mse", r.train_mse},
                         {"wall_seconds", r.wall_seconds},
                         {"n_train", r.n_train},
                         {"n_test", r.n_test},
                         {"overlap", r.overlap},
                         {"failure", r.failure}});
  }
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  nlohmann::json j = Provenance(config);
  j["summary"] = {{"seeds", rows.size()},
                  {"successes", successes()},
                  {"failures", failures()},
                  {"certified", certified_count()},
                  {"mean_test_mse", num(mean_mse())},
                  {"std_test_mse", num(std_mse())},
                  {"median_test_mse", num(median_mse())},
                  {"mean_wall_seconds", mean_wall_seconds()},
                  {"train_test_overlap", any_overlap()}};
  j["rows"] = rows_json;
  return j;
}

void EvalReport::WriteCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "# " << Provenance(config).dump() << "\n";
  out << "index,seed,learned,certified,test_mse,train_mse,wall_seconds,n_train,n_test,"
         "overlap,failure\n";
  for (const auto& r : rows) {
    std::string failure = r.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    std::replace(failure.begin(), failure.end(), '\n', ' ');
    out << r.index << "," << r.seed << "," << r.learned << "," << r.certified << ","
        << Num(r.test_mse) << "," << Num(r.train_mse) << "," << Num(r.wall_seconds) << ","
        << r.n_train << "," << r.n_test << "," << r.overlap << ",\"" << failure << "\"\n";
  }
}

void EvalReport::WriteJson(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << ToJson().dump(2) << "\n";
}

namespace {

SeedResult RunSeed(const DemonstrationSet& d, const EvalConfig& config, int index) {
  SeedResult row;
  row.index = index;
  row.seed = config.run_seed ^ static_cast<std::uint64_t>(index);
  const auto start = std::chrono::steady_clock::now();
  try {
    DemonstrationSet train;
    DemonstrationSet test;
    if (d.num_demos() == 1) {
      train = d;
      test = d;
      row.overlap = true;
    } else {
      std::tie(train, test) = SplitTrainTest(d, config.test_fraction, row.seed);
    }
    row.n_train = train.num_demos();
    row.n_test = test.num_demos();
    if (config.noise_level > 0.0) train = AddUniformNoise(train, config.noise_level, row.seed);
    LearnConfig lc = config.learn;
    lc.seed = row.seed;
    const LearnResult result = LearnPolicy(train, lc);
    row.learned = true;
    row.certified = result.certificate.report.certified();
    row.train_mse = result.report.train_mse;
    row.test_mse = TestMse(result.policy, test);
  } catch (const std::exception& e) {
    row.failure = e.what();
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

EvalReport RunProtocol(const DemonstrationSet& raw, const EvalConfig& config) {
  if (config.seeds < 1) throw InputError("RunProtocol: seeds must be >= 1");
  config.learn.Validate();
  const DemonstrationSet d = config.normalize_velocities ? Preprocess(raw, true) : raw;
  EvalReport report;
  report.config = config.ToJson();
  report.rows.resize(config.seeds);
  const int workers = std::clamp(config.workers, 1, config.seeds);
  if (workers == 1) {
    for (int i = 0; i < config.seeds; ++i) report.rows[i] = RunSeed(d, config, i);
    return report;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < config.seeds; i = next++) report.rows[i] = RunSeed(d, config, i);
    });
  }
  for (auto& t : pool) t.join();
  return report;
}

EvalReport RunProtocol(const std::string& dataset_dir, const EvalConfig& config) {
  return RunProtocol(LoadDemonstrations(dataset_dir), config);
}

nlohmann::json SweepReport::ToJson() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& c : cells) {
    cells_json.push_back({{"label", c.label}, {"params", c.params}, {"report", c.report.ToJson()}});
  }
  return {{"schema", kEvalSchema},
          {"version", kVersion},
          {"kind", kind},
          {"cells", cells_json},
          {"advisories", advisories}};
}

void SweepReport::WriteCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  nlohmann::json prov = {{"schema", kEvalSchema}, {"version", kVersion}, {"kind", kind}};
  if (!cells.empty()) prov["config"] = cells.front().report.config;
  out << "# " << prov.dump() << "\n";
  out << "label,params,seeds,successes,certified,mean_test_mse,std_test_mse,median_test_mse,"
         "mean_wall_seconds\n";
  for (const auto& c : cells) {
    std::string params = c.params.dump();
    std::replace(params.begin(), params.end(), ',', ';');
    out << c.label << ",\"" << params << "\"," << c.report.rows.size() << ","
        << c.report.successes() << "," << c.report.certified_count() << ","
        << Num(c.report.mean_mse()) << "," << Num(c.report.std_mse()) << ","
        << Num(c.report.median_mse()) << "," << Num(c.report.mean_wall_seconds()) << "\n";
  }
}

SweepReport DegreeSweep(const DemonstrationSet& d, const std::vector<int>& alphas,
                        const std::vector<int>& betas, const EvalConfig& config) {
  if (alphas.empty() || betas.empty()) throw InputError("DegreeSweep: empty degree list");
  for (int a : alphas) {
    if (a < 1) throw InputError("DegreeSweep: alpha values must be >= 1");
  }
  for (int b : betas) {
    if (b < 1) throw InputError("DegreeSweep: beta values must be >= 1");
  }
  SweepReport out;
  out.kind = "degree_sweep";
  for (int b : betas) {
    for (int a : alphas) {
      EvalConfig c = config;
      c.learn.alpha = a;
      c.learn.beta = b;
      out.cells.push_back({"alpha=" + std::to_string(a) + " beta=" + std::to_string(b),
                           {{"alpha", a}, {"beta", b}},
                           RunProtocol(d, c)});
    }
  }
  // Within each beta, a larger alpha nests the smaller hypothesis class.
  for (size_t i = 0; i < out.cells.size(); ++i) {
    for (size_t j = i + 1; j < out.cells.size(); ++j) {
      const auto& lo = out.cells[i];
      const auto& hi = out.cells[j];
      if (lo.params["beta"] != hi.params["beta"]) continue;
      if (hi.params["alpha"].get<int>() <= lo.params["alpha"].get<int>()) continue;
      if (hi.report.median_mse() > lo.report.median_mse()) {
        out.advisories.push_back("median MSE rises from " + lo.label + " to " + hi.label);
      }
      if (hi.report.certified_count() < lo.report.certified_count()) {
        out.advisories.push_back("certification rate drops from " + lo.label + " to " +
                                 hi.label);
      }
    }
  }
  return out;
}

SweepReport NoiseSweep(const DemonstrationSet& d, const std::vector<double>& levels,
                       const EvalConfig& config) {
  if (levels.empty()) throw InputError("NoiseSweep: empty level list");
  SweepReport out;
  out.kind = "noise_sweep";
  for (double level : levels) {
    if (level < 0.0) throw InputError("NoiseSweep: levels must be >= 0");
    EvalConfig c = config;
    c.noise_level = level;
    out.cells.push_back({"noise=" + Num(level), {{"noise", level}}, RunProtocol(d, c)});
  }
  for (size_t i = 1; i < out.cells.size(); ++i) {
    if (out.cells[i].report.median_mse() < out.cells[i - 1].report.median_mse()) {
      out.advisories.push_back("median MSE falls from " + out.cells[i - 1].label + " to " +
                               out.cells[i].label);
    }
  }
  return out;
}

SweepReport LpfAblation(const DemonstrationSet& d, const EvalConfig& config) {
  SweepReport out;
  out.kind = "lpf_ablation";
  for (LpfMode mode : {LpfMode::kVector, LpfMode::kScalar}) {
    EvalConfig c = config;
    c.learn.lpf_mode = mode;
    out.cells.push_back({"lpf=" + ToString(mode), {{"lpf_mode", ToString(mode)}},
                         RunProtocol(d, c)});
  }
  return out;
}

}  // namespace plyds
