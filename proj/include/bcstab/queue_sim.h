// Slotted-time simulation of the two-queue broadcast source.
//
// Each slot: the busy set is read from the queue lengths at the start of the
// slot (a dominant system forces its dummy queue into the set), both
// receivers independently succeed or fail, successful head-of-line packets
// leave, and Bernoulli arrivals join afterwards, so a packet is never served
// in its arrival slot. Randomness is drawn from a counter-based generator
// keyed on (seed, slot, stream), which lets any two variants share draws.

#ifndef BCSTAB_QUEUE_SIM_H_
#define BCSTAB_QUEUE_SIM_H_

#include <array>
#include <cstdint>
#include <string_view>

#include "bcstab/channel_model.h"
#include "bcstab/stability_region.h"

namespace bcstab {

enum class DominantSystem { kNone, kQueue1Dummy, kQueue2Dummy };
enum class ServiceMode { kClosedForm, kChannelDraw };
enum class Verdict { kStable, kUnstable, kInconclusive };

std::string_view to_string(DominantSystem dominant);
std::string_view to_string(ServiceMode mode);
std::string_view to_string(Verdict verdict);
DominantSystem parse_dominant(std::string_view text);
ServiceMode parse_mode(std::string_view text);
Verdict parse_verdict(std::string_view text);

inline constexpr std::uint64_t kMinVerdictHorizon = 10'000;

struct SimConfig {
  SystemConfig system;
  ArrivalRates rates;
  std::uint64_t horizon = 1'000'000;
  std::uint64_t seed = 1;
  DominantSystem dominant = DominantSystem::kNone;
  ServiceMode mode = ServiceMode::kClosedForm;
  // Largest second-half slope (packets/slot) still called stable.
  double drift_eps = 1e-3;
  // Queue-length cap as a fraction of the horizon.
  double q_cap_fraction = 5e-4;

  bool operator==(const SimConfig&) const = default;
};

void validate(const SimConfig& cfg);

// Transmissions of one user, split by whether the other user was also in the
// transmitted set. Dummy transmissions count.
struct ServiceCounts {
  std::uint64_t solo_attempts = 0;
  std::uint64_t solo_successes = 0;
  std::uint64_t joint_attempts = 0;
  std::uint64_t joint_successes = 0;

  double solo_frequency() const;
  double joint_frequency() const;
  double frequency() const;

  bool operator==(const ServiceCounts&) const = default;
};

struct QueueStats {
  std::uint64_t final_length = 0;
  double mean_length = 0.0;
  double drift = 0.0;  // least-squares slope over the second half
  ServiceCounts service;
  double empty_fraction = 0.0;  // slots starting with an empty real queue
  Verdict verdict = Verdict::kInconclusive;

  bool operator==(const QueueStats&) const = default;
};

struct SimOutcome {
  std::array<QueueStats, 2> queue;

  bool operator==(const SimOutcome&) const = default;
};

// Throws InvalidArgument when horizon < kMinVerdictHorizon.
SimOutcome simulate(const SimConfig& cfg);

// Stable if drift <= eps and final < cap, Unstable if drift > eps and
// final >= cap, otherwise Inconclusive.
Verdict classify(double drift, std::uint64_t final_length, double drift_eps, double q_cap);

struct EmptyProbability {
  double analytic = 0.0;
  double empirical = 0.0;
};

// Little's-theorem prediction 1 - lambda_j / Pr(Dj/1,2) for the real queue j
// of a dominant system against its simulated empty fraction.
EmptyProbability empty_probability_check(const SimConfig& cfg);

enum class ScanStatus {
  kConverged,   // bracket narrowed to the requested width
  kBracketed,   // an inconclusive probe stopped the search early
  kSaturated,   // whole ray up to the unit box is stable
};
std::string_view to_string(ScanStatus status);
ScanStatus parse_scan_status(std::string_view text);

struct ScanOptions {
  ServiceMode mode = ServiceMode::kChannelDraw;
  double bracket_width = 0.005;
  double drift_eps = 1e-3;
  double q_cap_fraction = 5e-4;
};

struct BoundaryScan {
  ArrivalRates point;  // bracket midpoint mapped back onto the ray
  double t_stable = 0.0;
  double t_unstable = 0.0;
  ScanStatus status = ScanStatus::kConverged;

  bool operator==(const BoundaryScan&) const = default;
};

// Bisection along the ray t * direction on the original coupled system.
// An inconclusive probe is retried once at 4x horizon before the search
// stops and reports the current bracket.
BoundaryScan boundary_scan(const SystemConfig& system, double u1, double u2,
                           std::uint64_t horizon, std::uint64_t seed,
                           const ScanOptions& options = {});

// Runs the original and the chosen dominant system on identical arrivals and
// decoding draws from equal initial queues; true iff both dominant queue
// lengths stay >= the original ones at every slot.
bool dominance_coupling_check(const SystemConfig& system, const ArrivalRates& rates,
                              std::uint64_t horizon, std::uint64_t seed,
                              DominantSystem dominant = DominantSystem::kQueue1Dummy,
                              ServiceMode mode = ServiceMode::kClosedForm);

}  // namespace bcstab

#endif  // BCSTAB_QUEUE_SIM_H_
