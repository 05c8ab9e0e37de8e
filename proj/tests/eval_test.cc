#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "plyds/errors.h"
#include "plyds/evaluation.h"
#include "plyds/matching_system.h"
#include "plyds/model_io.h"
#include "plyds/objective.h"

namespace plyds {
namespace {

DemonstrationSet Synth(SynthKind kind, int demos, int samples, double scale = 1.0) {
  SynthOptions o;
  o.kind = kind;
  o.num_demos = demos;
  o.num_samples = samples;
  o.scale = scale;
  return SynthGenerate(o);
}

PolicyModel Linear(int n, double slope) {
  const BasisSpec s = PolicyModel::Basis(n, 1, BasisMode::kElementwise);
  std::vector<GramPolynomial> rows;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(s.size(), s.size());
    b(0, 1 + i) = b(1 + i, 0) = 0.5 * slope;
    rows.emplace_back(s, b);
  }
  return PolicyModel(n, 1, BasisMode::kElementwise, Eigen::VectorXd::Zero(n), rows);
}

SeedResult Row(int i, bool learned, double mse) {
  SeedResult r;
  r.index = i;
  r.learned = learned;
  r.certified = learned;
  r.test_mse = mse;
  if (!learned) r.failure = "no certified iterate";
  return r;
}

TEST(TestMse, PerfectPredictorIsZero) {
  EXPECT_EQ(TestMse(Linear(2, -1), Synth(SynthKind::kLinear, 3, 100)), 0.0);
}

TEST(TestMse, ZeroPolicyOnUnitVelocities) {
  DemonstrationSet d;
  d.n = 2;
  d.target = Eigen::Vector2d::Zero();
  Demonstration demo;
  demo.x = Eigen::MatrixXd::Random(10, 2);
  demo.v.resize(10, 2);
  for (int s = 0; s < 10; ++s) {
    const double a = 0.3 * s;
    demo.v.row(s) << std::cos(a), std::sin(a);
  }
  d.demos = {demo, demo};
  EXPECT_NEAR(TestMse(Linear(2, 0), d), 0.5, 1e-15);
}

TEST(TestMse, GeneratorFieldOnLinearData) {
  EXPECT_LE(TestMse(Linear(2, -1), Synth(SynthKind::kLinear, 5, 200)), 1e-12);
}

TEST(TestMse, DimensionMismatchThrows) {
  EXPECT_THROW(TestMse(Linear(1, -1), Synth(SynthKind::kLinear, 2, 10)), InputError);
}

TEST(EvalReport, StatisticsRecomputeFromRows) {
  EvalReport r;
  r.rows = {Row(0, true, 1.0), Row(1, true, 3.0), Row(2, false, 0.0), Row(3, true, 2.0),
            Row(4, true, 10.0)};
  EXPECT_EQ(r.successes(), 4);
  EXPECT_EQ(r.failures(), 1);
  EXPECT_EQ(r.certified_count(), 4);
  EXPECT_DOUBLE_EQ(r.mean_mse(), 4.0);
  // Population deviation of {1, 3, 2, 10} about 4: sqrt((9+1+4+36)/4).
  EXPECT_DOUBLE_EQ(r.std_mse(), std::sqrt(50.0 / 4.0));
  EXPECT_DOUBLE_EQ(r.median_mse(), 2.5);
  r.rows[4].test_mse = 0.5;
  EXPECT_DOUBLE_EQ(r.median_mse(), 1.5);
  const nlohmann::json j = r.ToJson();
  EXPECT_EQ(j["rows"].size(), 5u);
  EXPECT_EQ(j["summary"]["failures"], 1);
}

TEST(EvalReport, NoSuccessGivesNaN) {
  EvalReport r;
  r.rows = {Row(0, false, 0.0)};
  EXPECT_TRUE(std::isnan(r.mean_mse()));
  EXPECT_TRUE(std::isnan(r.median_mse()));
  EXPECT_TRUE(r.ToJson()["summary"]["mean_test_mse"].is_null());
}

EvalConfig Quick(int seeds) {
  EvalConfig c;
  c.seeds = seeds;
  c.learn.sqp_iterations = 1;
  return c;
}

nlohmann::json WithoutTimes(nlohmann::json j) {
  for (auto& row : j["rows"]) row.erase("wall_seconds");
  j["summary"].erase("mean_wall_seconds");
  return j;
}

TEST(RunProtocol, LinearDataAllCertified) {
  const EvalReport r = RunProtocol(Synth(SynthKind::kLinear, 5, 200), Quick(3));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.certified_count(), 3);
  EXPECT_LE(r.mean_mse(), 1e-5);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.seed, 1u ^ static_cast<std::uint64_t>(row.index));
    EXPECT_EQ(row.n_train + row.n_test, 5);
    EXPECT_FALSE(row.overlap);
  }
}

TEST(RunProtocol, SingleDemonstrationFlagsOverlap) {
  const EvalReport r = RunProtocol(Synth(SynthKind::kSine, 1, 200), Quick(5));
  EXPECT_TRUE(r.any_overlap());
  EXPECT_TRUE(r.ToJson()["summary"]["train_test_overlap"].get<bool>());
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.n_train, 1);
    EXPECT_EQ(row.n_test, 1);
  }
}

TEST(RunProtocol, RepeatableAndIndependentOfWorkers) {
  const DemonstrationSet d = Synth(SynthKind::kSine, 4, 150);
  EvalConfig c = Quick(3);
  const EvalReport a = RunProtocol(d, c);
  const EvalReport b = RunProtocol(d, c);
  c.workers = 3;
  const EvalReport p = RunProtocol(d, c);
  EXPECT_EQ(WithoutTimes(a.ToJson()), WithoutTimes(b.ToJson()));
  for (size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].test_mse, p.rows[i].test_mse);
    EXPECT_EQ(a.rows[i].certified, p.rows[i].certified);
  }
}

TEST(RunProtocol, FailuresAreRecorded) {
  EvalConfig c = Quick(2);
  c.learn.max_alternations = 0;
  c.learn.sqp_iterations = 0;
  // Unsatisfiable: a positive floor larger than the trace budget.
  c.learn.lpf_floor = 10.0;
  const EvalReport r = RunProtocol(Synth(SynthKind::kLinear, 3, 50), c);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    if (!row.learned) EXPECT_FALSE(row.failure.empty());
  }
  EXPECT_EQ(r.successes() + r.failures(), 2);
}

TEST(RunProtocol, TrainingMseEqualsObjectiveDataTerm) {
  const DemonstrationSet d = Synth(SynthKind::kCubic, 4, 150);
  LearnConfig c;
  c.lambda1 = c.lambda2 = 0.0;
  const LearnResult r = LearnPolicy(d, c);
  const PolicyObjective o = AssembleObjective(d, c.alpha, c.basis, 0.0, 0.0);
  const MatchingSystem ms =
      MatchingSystem::Build(2, c.alpha, c.beta, c.basis, c.lpf_mode, c.tolerance);
  const double mse = TestMse(r.policy, d);
  EXPECT_GE(mse, 0.0);
  EXPECT_NEAR(mse, o.DataTerm(ms.PolicyParams(r.policy)), 1e-9);
  EXPECT_NEAR(mse, r.report.train_mse, 1e-9);
}

TEST(RunProtocol, ReportsCarrySchemaAndConfig) {
  const EvalReport r = RunProtocol(Synth(SynthKind::kLinear, 3, 50), Quick(1));
  const auto dir = std::filesystem::temp_directory_path();
  const std::string csv = (dir / "plyds_eval_report.csv").string();
  const std::string json = (dir / "plyds_eval_report.json").string();
  r.WriteCsv(csv);
  r.WriteJson(json);
  std::ifstream in(csv);
  std::string first, header;
  std::getline(in, first);
  std::getline(in, header);
  ASSERT_EQ(first.rfind("# ", 0), 0u);
  const nlohmann::json prov = nlohmann::json::parse(first.substr(2));
  EXPECT_EQ(prov["schema"], kEvalSchema);
  EXPECT_EQ(prov["version"], kVersion);
  EXPECT_EQ(prov["config"]["learn"]["alpha"], 3);
  EXPECT_EQ(header.rfind("index,seed,learned,certified,test_mse", 0), 0u);
  nlohmann::json j;
  std::ifstream(json) >> j;
  EXPECT_EQ(j["schema"], kEvalSchema);
  std::filesystem::remove(csv);
  std::filesystem::remove(json);
}

TEST(DegreeSweep, CubicPrefersHigherDegree) {
  const SweepReport s =
      DegreeSweep(Synth(SynthKind::kCubic, 5, 150, 2.0), {1, 2, 3}, {1}, Quick(3));
  ASSERT_EQ(s.cells.size(), 3u);
  EXPECT_LE(s.cells[2].report.median_mse(), s.cells[0].report.median_mse());
  EXPECT_EQ(s.cells[0].params["alpha"], 1);
}

TEST(DegreeSweep, LinearAlreadyExactAtDegreeOne) {
  const SweepReport s = DegreeSweep(Synth(SynthKind::kLinear, 5, 150), {1, 3}, {1}, Quick(3));
  EXPECT_LE(s.cells[0].report.mean_mse(), 1e-5);
  EXPECT_GE(s.cells[1].report.certified_count(), s.cells[0].report.certified_count());
}

TEST(DegreeSweep, RejectsBadDegrees) {
  const DemonstrationSet d = Synth(SynthKind::kLinear, 3, 20);
  EXPECT_THROW(DegreeSweep(d, {}, {1}, Quick(1)), InputError);
  EXPECT_THROW(DegreeSweep(d, {0}, {1}, Quick(1)), InputError);
}

TEST(NoiseSweep, CellsAndCsv) {
  const SweepReport s = NoiseSweep(Synth(SynthKind::kSine, 5, 150, 20.0), {0.0, 2.0}, Quick(2));
  ASSERT_EQ(s.cells.size(), 2u);
  EXPECT_EQ(s.cells[1].params["noise"], 2.0);
  EXPECT_LE(s.cells[0].report.median_mse(), s.cells[1].report.median_mse());
  const std::string path =
      (std::filesystem::temp_directory_path() / "plyds_noise_sweep.csv").string();
  s.WriteCsv(path);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_NE(first.find("noise_sweep"), std::string::npos);
  std::filesystem::remove(path);
  EXPECT_THROW(NoiseSweep(Synth(SynthKind::kSine, 3, 20), {-1.0}, Quick(1)), InputError);
}

TEST(LpfAblation, VectorAndScalarCells) {
  const SweepReport s = LpfAblation(Synth(SynthKind::kSine, 4, 150), Quick(2));
  ASSERT_EQ(s.cells.size(), 2u);
  EXPECT_EQ(s.cells[0].params["lpf_mode"], "vector");
  EXPECT_EQ(s.cells[1].params["lpf_mode"], "scalar");
  for (const auto& c : s.cells) EXPECT_EQ(c.report.certified_count(), 2);
}

}  // namespace
}  // namespace plyds
