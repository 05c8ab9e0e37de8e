#include "plyds/demonstration.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "plyds/errors.h"

namespace plyds {

namespace fs = std::filesystem;

double Scale(const DemonstrationSet& d) {
  if (d.demos.empty()) return 1.0;
  const auto [lo, hi] = BoundingBox(d);
  const double range = (hi - lo).maxCoeff();
  return range > 0.0 ? range : 1.0;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> BoundingBox(const DemonstrationSet& d) {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(d.n, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  for (const auto& demo : d.demos) {
    lo = lo.cwiseMin(demo.x.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(demo.x.colwise().maxCoeff().transpose());
  }
  return {lo, hi};
}

std::vector<std::string> ValidationIssues(const DemonstrationSet& d) {
  std::vector<std::string> issues;
  if (d.demos.empty()) {
    issues.push_back("dataset has no demonstrations");
    return issues;
  }
  const double tol = 1e-3 * Scale(d);
  const int ns = d.num_samples();
  for (int i = 0; i < d.num_demos(); ++i) {
    const Demonstration& demo = d.demos[i];
    const std::string tag = "demonstration " + std::to_string(i) +
                            (demo.name.empty() ? "" : " (" + demo.name + ")");
    if (demo.x.rows() != ns || demo.v.rows() != ns) {
      issues.push_back(tag + ": has " + std::to_string(demo.x.rows()) +
                       " samples, expected " + std::to_string(ns));
      continue;
    }
    if (!demo.x.allFinite() || !demo.v.allFinite()) {
      issues.push_back(tag + ": non-finite values");
      continue;
    }
    const double miss = (demo.x.row(ns - 1).transpose() - d.target).norm();
    if (miss > tol) {
      issues.push_back(tag + ": final position is " + std::to_string(miss) +
                       " from the common target (tolerance " + std::to_string(tol) + ")");
    }
    const double speed = demo.v.row(ns - 1).norm();
    if (speed > tol) {
      issues.push_back(tag + ": final velocity norm " + std::to_string(speed) +
                       " exceeds " + std::to_string(tol));
    }
  }
  return issues;
}

void Validate(const DemonstrationSet& d) {
  const auto issues = ValidationIssues(d);
  if (issues.empty()) return;
  std::string msg = "dataset violates demonstration assumptions:";
  for (const auto& s : issues) msg += "\n  " + s;
  throw ValidationError(msg);
}

namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string Trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double ParseNumber(const std::string& cell, const std::string& file, int line) {
  const std::string t = Trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("not a number: '" + t + "'", file, line);
  }
  return value;
}

Demonstration ReadCsv(const fs::path& path, int n, int ns) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path.string());
  Demonstration demo;
  demo.name = path.filename().string();
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", path.string(), 1);
  ++lineno;
  const auto header = SplitCsv(line);
  std::vector<std::string> expected;
  for (int k = 1; k <= n; ++k) expected.push_back("x" + std::to_string(k));
  for (int k = 1; k <= n; ++k) expected.push_back("v" + std::to_string(k));
  std::vector<std::string> got;
  for (const auto& h : header) got.push_back(Trim(h));
  if (got != expected) {
    throw ParseError("header must be x1..x" + std::to_string(n) + ",v1..v" +
                         std::to_string(n),
                     path.string(), 1);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCsv(line);
    if (static_cast<int>(cells.size()) != 2 * n) {
      throw ParseError("expected " + std::to_string(2 * n) + " fields, got " +
                           std::to_string(cells.size()),
                       path.string(), lineno);
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(ParseNumber(c, path.string(), lineno));
    rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != ns) {
    throw ParseError("has " + std::to_string(rows.size()) + " data rows, manifest says " +
                         std::to_string(ns),
                     path.string(), lineno);
  }
  demo.x.resize(ns, n);
  demo.v.resize(ns, n);
  for (int s = 0; s < ns; ++s) {
    for (int k = 0; k < n; ++k) {
      demo.x(s, k) = rows[s][k];
      demo.v(s, k) = rows[s][n + k];
    }
  }
  return demo;
}

}  // namespace

DemonstrationSet LoadDemonstrations(const std::string& dir, const LoadOptions& options,
                                    std::vector<std::string>* warnings) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw ParseError("not a dataset directory", dir);
  const fs::path manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw ParseError("missing manifest.json", manifest_path.string());
  }
  nlohmann::json m;
  try {
    std::ifstream in(manifest_path);
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), manifest_path.string());
  }
  DemonstrationSet d;
  try {
    if (m.value("schema", std::string()) != kDataSchema) {
      throw ParseError(std::string("schema must be ") + kDataSchema, manifest_path.string());
    }
    d.n = m.at("n").get<int>();
    const int ns = m.at("n_samples").get<int>();
    if (d.n < 1 || ns < 2) throw ParseError("n must be >= 1 and n_samples >= 2", manifest_path.string());
    const auto target = m.at("target").get<std::vector<double>>();
    if (static_cast<int>(target.size()) != d.n) {
      throw ParseError("target length differs from n", manifest_path.string());
    }
    d.target = Eigen::Map<const Eigen::VectorXd>(target.data(), d.n);
    d.units = m.value("units", std::string());
    d.name = m.value("name", std::string());
    d.source = m.value("source", std::string());
    d.sample_dt = m.value("sample_dt", 0.0);
    if (m.contains("metadata")) d.metadata = m["metadata"];
    const auto names = m.at("names").get<std::vector<std::string>>();
    if (names.empty()) throw ParseError("manifest lists no demonstrations", manifest_path.string());
    for (const auto& file : names) d.demos.push_back(ReadCsv(root / file, d.n, ns));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad manifest field: ") + e.what(), manifest_path.string());
  }

  const auto issues = ValidationIssues(d);
  if (issues.empty()) return d;
  if (!options.lenient) Validate(d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d.n);
  for (const auto& demo : d.demos) mean += demo.x.row(demo.x.rows() - 1).transpose();
  mean /= d.num_demos();
  d.target = mean;
  for (auto& demo : d.demos) {
    demo.x.row(demo.x.rows() - 1) = mean.transpose();
    demo.v.row(demo.v.rows() - 1).setZero();
  }
  if (warnings != nullptr) {
    for (const auto& s : issues) warnings->push_back(s + " (re-pinned to mean endpoint)");
  }
  return d;
}

namespace {

std::string FormatNumber(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void SaveDemonstrations(const DemonstrationSet& d, const std::string& dir,
                        const nlohmann::json& provenance) {
  if (d.demos.empty()) throw InputError("SaveDemonstrations: empty dataset");
  const fs::path root(dir);
  fs::create_directories(root);
  nlohmann::json m;
  m["schema"] = kDataSchema;
  m["n"] = d.n;
  m["n_samples"] = d.num_samples();
  m["target"] = std::vector<double>(d.target.data(), d.target.data() + d.n);
  m["units"] = d.units;
  m["name"] = d.name;
  m["source"] = d.source;
  if (d.sample_dt > 0.0) m["sample_dt"] = d.sample_dt;
  if (!d.metadata.empty()) m["metadata"] = d.metadata;
  if (!provenance.is_null()) m["provenance"] = provenance;
  std::vector<std::string> names;
  for (int i = 0; i < d.num_demos(); ++i) {
    const Demonstration& demo = d.demos[i];
    char buf[32];
    std::snprintf(buf, sizeof(buf), "demo_%03d.csv", i);
    names.emplace_back(buf);
    std::ofstream out(root / names.back());
    for (int k = 1; k <= d.n; ++k) out << "x" << k << ",";
    for (int k = 1; k <= d.n; ++k) out << "v" << k << (k < d.n ? "," : "\n");
    for (int s = 0; s < demo.x.rows(); ++s) {
      for (int k = 0; k < d.n; ++k) out << FormatNumber(demo.x(s, k)) << ",";
      for (int k = 0; k < d.n; ++k) {
        out << FormatNumber(demo.v(s, k)) << (k + 1 < d.n ? "," : "\n");
      }
    }
    if (!out) throw ParseError("write failed", (root / names.back()).string());
  }
  m["names"] = names;
  std::ofstream out(root / "manifest.json");
  out << m.dump(2) << "\n";
}

DemonstrationSet Preprocess(const DemonstrationSet& d, bool normalize_velocities) {
  DemonstrationSet out = d;
  for (auto& demo : out.demos) {
    demo.x.rowwise() -= d.target.transpose();
    if (!normalize_velocities) continue;
    for (int s = 0; s < demo.v.rows(); ++s) {
      const double norm = demo.v.row(s).norm();
      if (norm == 0.0 || std::abs(norm - 1.0) <= 1e-15) continue;
      demo.v.row(s) /= norm;
    }
  }
  out.target = Eigen::VectorXd::Zero(d.n);
  return out;
}

namespace {

// Median spacing implied by |Δx| / |v| when sample_dt is absent.
double EstimateDt(const DemonstrationSet& d) {
  std::vector<double> ratios;
  for (const auto& demo : d.demos) {
    for (int s = 0; s + 1 < demo.x.rows(); ++s) {
      const double speed = demo.v.row(s).norm();
      if (speed > 0.0) ratios.push_back((demo.x.row(s + 1) - demo.x.row(s)).norm() / speed);
    }
  }
  if (ratios.empty()) return 1.0;
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  const double dt = ratios[ratios.size() / 2];
  return dt > 0.0 ? dt : 1.0;
}

}  // namespace

DemonstrationSet AddUniformNoise(const DemonstrationSet& d, double level,
                                 std::uint64_t seed) {
  if (level < 0.0) throw InputError("AddUniformNoise: level must be >= 0");
  if (level == 0.0) return d;
  const double dt = d.sample_dt > 0.0 ? d.sample_dt : EstimateDt(d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-level, level);
  DemonstrationSet out = d;
  for (auto& demo : out.demos) {
    const int ns = static_cast<int>(demo.x.rows());
    const Eigen::RowVectorXd last = demo.x.row(ns - 1);
    for (int s = 0; s < ns; ++s) {
      for (int k = 0; k < d.n; ++k) demo.x(s, k) += noise(rng);
    }
    demo.x.row(ns - 1) = last;
    for (int s = 0; s < ns; ++s) {
      if (s == 0) {
        demo.v.row(s) = (demo.x.row(1) - demo.x.row(0)) / dt;
      } else if (s == ns - 1) {
        demo.v.row(s).setZero();
      } else {
        demo.v.row(s) = (demo.x.row(s + 1) - demo.x.row(s - 1)) / (2.0 * dt);
      }
    }
  }
  return out;
}

std::pair<DemonstrationSet, DemonstrationSet> SplitTrainTest(
    const DemonstrationSet& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InputError("SplitTrainTest: test fraction must lie in (0, 1)");
  }
  const int nd = d.num_demos();
  if (nd < 2) {
    throw InputError("SplitTrainTest: need at least 2 demonstrations to split");
  }
  const int n_test = std::clamp(static_cast<int>(std::lround(test_fraction * nd)), 1, nd - 1);
  std::vector<int> order(nd);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::sort(order.begin(), order.begin() + n_test);
  std::sort(order.begin() + n_test, order.end());
  DemonstrationSet train = d;
  DemonstrationSet test = d;
  train.demos.clear();
  test.demos.clear();
  for (int i = 0; i < nd; ++i) {
    (i < n_test ? test : train).demos.push_back(d.demos[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

std::string ToString(SynthKind kind) {
  switch (kind) {
    case SynthKind::kLinear: return "linear";
    case SynthKind::kSine: return "sine";
    case SynthKind::kCubic: return "cubic";
  }
  return "linear";
}

SynthKind ParseSynthKind(const std::string& text) {
  if (text == "linear") return SynthKind::kLinear;
  if (text == "sine") return SynthKind::kSine;
  if (text == "cubic") return SynthKind::kCubic;
  throw InputError("unsupported synthetic kind '" + text + "' (linear, sine, cubic)");
}

namespace {

constexpr double kCubicGain = 0.1;
constexpr double kPi = 3.14159265358979323846;

// Sine-kind shape: x2 = y2 + A sin(k x1) with ẏ = -y.
double SineAmplitude(double scale) { return 0.3 * scale; }
double SineWavenumber(double scale) { return kPi / scale; }

}  // namespace

Eigen::VectorXd SynthField(SynthKind kind, double scale,
                           const Eigen::Ref<const Eigen::VectorXd>& x) {
  switch (kind) {
    case SynthKind::kLinear:
      return -x;
    case SynthKind::kCubic:
      return -x - kCubicGain * x.array().cube().matrix();
    case SynthKind::kSine: {
      if (x.size() != 2) throw InputError("sine field is planar (n = 2)");
      const double a = SineAmplitude(scale);
      const double k = SineWavenumber(scale);
      Eigen::VectorXd f(2);
      f[0] = -x[0];
      f[1] = -(x[1] - a * std::sin(k * x[0])) - a * k * std::cos(k * x[0]) * x[0];
      return f;
    }
  }
  return -x;
}

DemonstrationSet SynthGenerate(const SynthOptions& o) {
  if (o.n < 1 || o.num_demos < 1 || o.num_samples < 2) {
    throw InputError("SynthGenerate: need n >= 1, at least 1 demo and 2 samples");
  }
  if (!(o.scale > 0.0)) throw InputError("SynthGenerate: scale must be > 0");
  if (o.kind == SynthKind::kSine && o.n != 2) {
    throw InputError("SynthGenerate: sine kind requires n = 2");
  }
  const double horizon = std::log(1e4);
  const double dt = horizon / (o.num_samples - 1);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> mag(0.5, 1.0);
  std::bernoulli_distribution sign(0.5);

  DemonstrationSet d;
  d.n = o.n;
  d.target = Eigen::VectorXd::Zero(o.n);
  d.name = "synth-" + ToString(o.kind);
  d.units = "unit";
  d.source = "synthetic";
  d.sample_dt = dt;
  d.metadata["generator"] = ToString(o.kind);
  d.metadata["scale"] = o.scale;
  d.metadata["seed"] = o.seed;
  switch (o.kind) {
    case SynthKind::kLinear: d.metadata["field"] = "xdot = -x"; break;
    case SynthKind::kCubic: d.metadata["field"] = "xdot = -x - 0.1 x^3"; break;
    case SynthKind::kSine:
      d.metadata["field"] = "y = (x1, x2 - A sin(k x1)), ydot = -y";
      d.metadata["amplitude"] = SineAmplitude(o.scale);
      d.metadata["wavenumber"] = SineWavenumber(o.scale);
      break;
  }

  for (int i = 0; i < o.num_demos; ++i) {
    Eigen::VectorXd x0(o.n);
    for (int k = 0; k < o.n; ++k) x0[k] = (sign(rng) ? 1.0 : -1.0) * mag(rng) * o.scale;
    Demonstration demo;
    demo.x.resize(o.num_samples, o.n);
    demo.v.resize(o.num_samples, o.n);
    for (int s = 0; s < o.num_samples; ++s) {
      const double t = s * dt;
      const double decay = std::exp(-t);
      Eigen::VectorXd x(o.n);
      switch (o.kind) {
        case SynthKind::kLinear:
          x = x0 * decay;
          break;
        case SynthKind::kCubic:
          for (int k = 0; k < o.n; ++k) {
            x[k] = x0[k] * decay /
                   std::sqrt(1.0 + kCubicGain * x0[k] * x0[k] * (1.0 - decay * decay));
          }
          break;
        case SynthKind::kSine: {
          const double a = SineAmplitude(o.scale);
          const double k = SineWavenumber(o.scale);
          const double y2 = (x0[1] - a * std::sin(k * x0[0])) * decay;
          x[0] = x0[0] * decay;
          x[1] = y2 + a * std::sin(k * x[0]);
          break;
        }
      }
      if (s == o.num_samples - 1) x.setZero();
      demo.x.row(s) = x.transpose();
      demo.v.row(s) = SynthField(o.kind, o.scale, x).transpose();
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "demo_%03d.csv", i);
    demo.name = buf;
    d.demos.push_back(std::move(demo));
  }
  return d;
}

}  // namespace plyds
