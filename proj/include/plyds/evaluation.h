#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "plyds/demonstration.h"
#include "plyds/learner.h"
#include "plyds/policy_model.h"

namespace plyds {

inline constexpr const char* kEvalSchema = "plyds-eval/1";

/// (1/(2·N_d·N_s)) Σ_d Σ_s ‖f̂(x) - ẋ‖². Throws InputError on a dimension
/// mismatch or an empty set.
double TestMse(const PolicyModel& policy, const DemonstrationSet& test);

struct EvalConfig {
  LearnConfig learn;
  int seeds{20};
  std::uint64_t run_seed{1};
  double test_fraction{2.0 / 7.0};
  bool normalize_velocities{false};
  /// Uniform noise added to the training split only; the test split stays
  /// clean so the metric measures what the noise did to the policy.
  double noise_level{0.0};
  /// Worker threads for independent seeds; results do not depend on it.
  int workers{1};

  nlohmann::json ToJson() const;
};

struct SeedResult {
  int index{0};
  std::uint64_t seed{0};
  bool learned{false};
  bool certified{false};
  double test_mse{0.0};
  double train_mse{0.0};
  double wall_seconds{0.0};
  int n_train{0};
  int n_test{0};
  /// Single-demonstration mode: train and test are the same trajectory.
  bool overlap{false};
  std::string failure;
};

/// Per-seed rows; every statistic is recomputed from them on demand.
struct EvalReport {
  nlohmann::json config;
  std::vector<SeedResult> rows;

  int successes() const;
  int certified_count() const;
  int failures() const { return static_cast<int>(rows.size()) - successes(); }
  /// Mean, population standard deviation and median of test MSE over the
  /// seeds that produced a model; NaN when there are none.
  double mean_mse() const;
  double std_mse() const;
  double median_mse() const;
  double mean_wall_seconds() const;
  bool any_overlap() const;

  nlohmann::json ToJson() const;
  void WriteCsv(const std::string& path) const;
  void WriteJson(const std::string& path) const;
};

/// Split, learn, certify and score once per seed; seed i uses run_seed ⊕ i.
EvalReport RunProtocol(const DemonstrationSet& d, const EvalConfig& config);
EvalReport RunProtocol(const std::string& dataset_dir, const EvalConfig& config);

struct SweepCell {
  std::string label;
  nlohmann::json params;
  EvalReport report;
};

struct SweepReport {
  std::string kind;
  std::vector<SweepCell> cells;
  /// Trend checks (e.g. MSE not improving with degree); never assertions.
  std::vector<std::string> advisories;

  nlohmann::json ToJson() const;
  void WriteCsv(const std::string& path) const;
};

SweepReport DegreeSweep(const DemonstrationSet& d, const std::vector<int>& alphas,
                        const std::vector<int>& betas, const EvalConfig& config);
SweepReport NoiseSweep(const DemonstrationSet& d, const std::vector<double>& levels,
                       const EvalConfig& config);
/// Vector versus scalar LPF mode under otherwise identical settings.
SweepReport LpfAblation(const DemonstrationSet& d, const EvalConfig& config);

}  // namespace plyds
