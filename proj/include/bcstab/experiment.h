// Experiment orchestration: a flat key/value spec expands into sweep points
// x scheme/policy variants x tasks, each evaluated independently on a worker
// pool and exported one file per task.

#ifndef BCSTAB_EXPERIMENT_H_
#define BCSTAB_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bcstab/channel_model.h"
#include "bcstab/queue_sim.h"
#include "bcstab/stability_region.h"

namespace bcstab {

enum class Task { kProbs, kRegion, kBoundary, kClosure, kAggregate, kSimulate, kVerify };
std::string_view to_string(Task task);
Task parse_task(std::string_view text);

enum class OutputFormat { kCsv, kJson };
std::string_view to_string(OutputFormat format);
OutputFormat parse_format(std::string_view text);

struct Variant {
  Scheme scheme = Scheme::kTin;
  PowerPolicy policy = PowerPolicy::kFixed;

  bool operator==(const Variant&) const = default;
};

// "tin-fixed", "sd-adaptive", ...
std::string to_string(const Variant& variant);
Variant parse_variant(std::string_view text);

struct Sweep {
  std::string parameter;  // p1 | gamma1 | gamma2
  double from = 0.0;
  double to = 0.0;
  int steps = 2;

  std::vector<double> values() const;
  bool operator==(const Sweep&) const = default;
};

struct SimSettings {
  std::uint64_t horizon = 1'000'000;
  std::uint64_t seed = 1;
  ServiceMode mode = ServiceMode::kChannelDraw;
  DominantSystem dominant = DominantSystem::kNone;
  ArrivalRates rates{0.1, 0.1};
  double drift_eps = 1e-3;
  double q_cap_fraction = 5e-4;

  bool operator==(const SimSettings&) const = default;
};

struct ExperimentSpec {
  SystemConfig base;
  std::optional<Sweep> sweep;
  // Empty means the base config's own scheme and policy.
  std::vector<Variant> variants;
  std::vector<Task> tasks;
  SimSettings sim;
  int boundary_points = 512;
  int closure_splits = 201;
  double verify_tolerance = 0.02;
  std::filesystem::path out_dir = "out";
  OutputFormat format = OutputFormat::kCsv;

  std::vector<Variant> effective_variants() const;
  bool operator==(const ExperimentSpec&) const = default;
};

// Validation failure naming the offending key.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Keys are normalised to lower case with '_' replaced by '-'.
using KeyValues = std::map<std::string, std::string>;

// "key = value" lines; '#' starts a comment. Throws SpecError on a malformed
// line or duplicate key.
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);

// Applies every key on top of `spec` and re-validates. Unknown keys and
// unparsable values raise SpecError naming the key.
void apply_key_values(ExperimentSpec& spec, const KeyValues& values);
ExperimentSpec spec_from_key_values(const KeyValues& values);

void validate(const ExperimentSpec& spec);

// Canonical 16-hex-digit digest of everything that affects results.
std::string spec_hash(const ExperimentSpec& spec);

struct RegionPayload {
  StabilityRegion region;
  std::optional<bool> convex;  // unset when a solo probability is zero

  bool operator==(const RegionPayload&) const = default;
};

struct BoundaryPayload {
  std::vector<ArrivalRates> points;

  bool operator==(const BoundaryPayload&) const = default;
};

struct ClosureSplit {
  double p1 = 0.0;
  SuccessProfile profile;

  bool operator==(const ClosureSplit&) const = default;
};

struct ClosurePayload {
  std::vector<ClosureSplit> splits;
  std::vector<ArrivalRates> envelope;

  bool operator==(const ClosurePayload&) const = default;
};

struct AggregatePayload {
  AggregateThroughput stable;
  double saturated = 0.0;

  bool operator==(const AggregatePayload&) const = default;
};

struct SimulatePayload {
  ArrivalRates rates;
  DominantSystem dominant = DominantSystem::kNone;
  ServiceMode mode = ServiceMode::kClosedForm;
  std::uint64_t horizon = 0;
  SimOutcome outcome;

  bool operator==(const SimulatePayload&) const = default;
};

struct VerifyRay {
  double u1 = 0.0;
  double u2 = 0.0;
  ArrivalRates analytic;
  BoundaryScan empirical;
  double delta = 0.0;  // max coordinate difference

  bool operator==(const VerifyRay&) const = default;
};

struct VerifyPayload {
  std::vector<VerifyRay> rays;

  double max_delta() const;
  bool operator==(const VerifyPayload&) const = default;
};

using Payload = std::variant<SuccessProfile, RegionPayload, BoundaryPayload, ClosurePayload,
                             AggregatePayload, SimulatePayload, VerifyPayload>;

struct ResultRow {
  Task task = Task::kProbs;
  std::string parameter;  // sweep parameter or "none"
  double value = 0.0;
  Variant variant;
  std::string config_hash;
  std::uint64_t seed = 0;
  Payload payload;

  bool operator==(const ResultRow&) const = default;
};

struct SweepResult {
  std::string spec_hash;
  std::vector<ResultRow> rows;  // task-major, then sweep value, then variant

  bool operator==(const SweepResult&) const = default;
};

// The 8 ray directions used by the verify task, both axes included.
std::vector<std::pair<double, double>> verify_directions();

// Concrete system config of one sweep point / variant.
SystemConfig point_config(const ExperimentSpec& spec, double value, const Variant& variant);

// Evaluates every row in memory without touching the filesystem.
SweepResult evaluate(const ExperimentSpec& spec);

// evaluate() + one file per task under spec.out_dir, each written to a
// temporary name and renamed on success. Returns the written paths.
SweepResult run(const ExperimentSpec& spec, std::vector<std::filesystem::path>* written = nullptr);

// fig3..fig8 parameterisations of the reference scenario.
ExperimentSpec fig_recipe(std::string_view name);

}  // namespace bcstab

#endif  // BCSTAB_EXPERIMENT_H_
