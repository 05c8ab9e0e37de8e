#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace plyds {

/// One expert trajectory: N_s rows of positions and matching velocities.
struct Demonstration {
  std::string name;
  Eigen::MatrixXd x;  // N_s × n
  Eigen::MatrixXd v;  // N_s × n
};

/// N_d demonstrations sharing N_s, a common target and zero final velocity.
struct DemonstrationSet {
  int n{0};
  Eigen::VectorXd target;
  std::vector<Demonstration> demos;
  std::string name;
  std::string units;
  std::string source;
  /// Sampling interval in time units; 0 when unknown.
  double sample_dt{0.0};
  /// Free-form metadata carried through save/load (e.g. generator field).
  nlohmann::json metadata = nlohmann::json::object();

  int num_demos() const { return static_cast<int>(demos.size()); }
  int num_samples() const { return demos.empty() ? 0 : static_cast<int>(demos[0].x.rows()); }
  int num_records() const { return num_demos() * num_samples(); }
};

inline constexpr const char* kDataSchema = "plyds-data/1";

/// Max coordinate range (max - min) over every position; 1 if degenerate.
double Scale(const DemonstrationSet& d);
/// Per-coordinate bounding box of every position.
std::pair<Eigen::VectorXd, Eigen::VectorXd> BoundingBox(const DemonstrationSet& d);

/// Assumption violations, one message per offending demonstration; empty
/// when the set is valid.
std::vector<std::string> ValidationIssues(const DemonstrationSet& d);
/// Throws ValidationError listing every issue.
void Validate(const DemonstrationSet& d);

struct LoadOptions {
  /// Accept assumption violations: the target becomes the mean endpoint and
  /// every final sample is re-pinned to it with zero velocity.
  bool lenient{false};
};

/// Reads a dataset directory (manifest.json plus one CSV per demonstration).
/// Throws ParseError for malformed content and ValidationError for
/// assumption violations in strict mode. Lenient-mode warnings are appended
/// to `warnings` when given.
DemonstrationSet LoadDemonstrations(const std::string& dir,
                                    const LoadOptions& options = {},
                                    std::vector<std::string>* warnings = nullptr);

/// Writes the set in the directory format, numbers in round-trip precision.
/// `provenance` is stored verbatim in the manifest when non-null.
void SaveDemonstrations(const DemonstrationSet& d, const std::string& dir,
                        const nlohmann::json& provenance = nullptr);

/// Shifts positions so the target is the origin; optionally rescales every
/// nonzero velocity to unit norm. Idempotent.
DemonstrationSet Preprocess(const DemonstrationSet& d, bool normalize_velocities);

/// Adds independent uniform[-level, level] noise to every position, then
/// recomputes velocities by finite differences over the sample spacing and
/// re-pins each final sample to its original position with zero velocity.
DemonstrationSet AddUniformNoise(const DemonstrationSet& d, double level,
                                 std::uint64_t seed);

/// Trajectory-level split. n_test = clamp(round(f·N_d), 1, N_d - 1).
std::pair<DemonstrationSet, DemonstrationSet> SplitTrainTest(
    const DemonstrationSet& d, double test_fraction, std::uint64_t seed);

enum class SynthKind { kLinear, kSine, kCubic };
std::string ToString(SynthKind kind);
SynthKind ParseSynthKind(const std::string& text);

struct SynthOptions {
  SynthKind kind{SynthKind::kLinear};
  int n{2};
  int num_demos{7};
  int num_samples{1000};
  std::uint64_t seed{1};
  /// Start points lie at distance in [0.5, 1]·scale per coordinate.
  double scale{1.0};
};

/// Samples closed-form solutions of a known globally stable field:
///   linear  ẋ = -x
///   cubic   ẋ = -x - 0.1 x∘3
///   sine    planar field whose paths follow x2 ≈ A sin(k x1) into the origin
/// over t ∈ [0, ln 1e4]; the final sample is pinned to the origin.
DemonstrationSet SynthGenerate(const SynthOptions& options);

/// Generator field of a synthetic kind (world frame, target at origin).
Eigen::VectorXd SynthField(SynthKind kind, double scale,
                           const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace plyds
