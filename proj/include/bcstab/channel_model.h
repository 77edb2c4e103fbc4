// Closed-form decoding success probabilities for the two-user broadcast
// channel under unit-mean Rayleigh block fading and unit noise power.
//
// Two receiver structures are modelled when both queues are backlogged and
// the transmitter superimposes both packets:
//   - kTin: each receiver treats the other user's signal as noise.
//   - kSd:  receiver 1 (the designated strong receiver) first decodes and
//           strips the message of user 2, then decodes its own; receiver 2
//           treats interference as noise.
//
// Two power policies decide what happens when only one queue is backlogged:
//   - kFixed:         the lone packet still uses its own share p1 or p2.
//   - kQueueAdaptive: the lone packet gets the whole budget p_total.

#ifndef BCSTAB_CHANNEL_MODEL_H_
#define BCSTAB_CHANNEL_MODEL_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace bcstab {

enum class Scheme { kTin, kSd };
enum class PowerPolicy { kFixed, kQueueAdaptive };

// Receivers are numbered 1 and 2 throughout.
enum class User { k1 = 1, k2 = 2 };

std::string_view to_string(Scheme scheme);
std::string_view to_string(PowerPolicy policy);
Scheme parse_scheme(std::string_view text);
PowerPolicy parse_policy(std::string_view text);

// Thrown for any malformed configuration or argument. `field()` names the
// offending parameter so callers can surface it verbatim.
class InvalidArgument : public std::invalid_argument {
 public:
  InvalidArgument(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SystemConfig {
  double gamma1 = 0.5;
  double gamma2 = 0.4;
  double d1 = 10.0;
  double d2 = 14.0;
  double alpha = 2.0;
  double p1 = 80.0;
  double p2 = 120.0;
  double p_total = 200.0;
  Scheme scheme = Scheme::kTin;
  PowerPolicy power_policy = PowerPolicy::kFixed;
  // Receiver the caller declares to have the better channel. Successive
  // decoding is only defined with receiver 1 as the strong one.
  User strong_user = User::k1;

  // Same geometry and thresholds, with the split (p1, p_total - p1).
  SystemConfig with_split(double new_p1) const;

  bool operator==(const SystemConfig&) const = default;
};

// Throws InvalidArgument unless every field is finite, thresholds, distances,
// path-loss exponent and budget are strictly positive, powers are
// nonnegative, and p1 + p2 = p_total within relative tolerance 1e-9.
void validate(const SystemConfig& cfg);

struct SuccessProfile {
  double p_1_1 = 0.0;   // Pr(D1/1): user 1 decodes, only queue 1 busy
  double p_2_2 = 0.0;   // Pr(D2/2): user 2 decodes, only queue 2 busy
  double p_1_12 = 0.0;  // Pr(D1/1,2): user 1 decodes, both busy
  double p_2_12 = 0.0;  // Pr(D2/1,2): user 2 decodes, both busy

  bool operator==(const SuccessProfile&) const = default;
};

// Throws InvalidArgument unless each field is in [0, 1] and the joint
// probabilities do not exceed the solo ones.
void validate(const SuccessProfile& profile);

// exp(-gamma * d^alpha / power); zero power maps to probability 0.
double outage_free_probability(double gamma, double distance, double alpha,
                               double power);

// Pr(Di/i). Effective power is p_i under kFixed and p_total under
// kQueueAdaptive.
double success_solo(const SystemConfig& cfg, User user);

// Pr(Di/1,2) when receiver i treats the other signal as noise. Exactly zero
// unless P_i > gamma_i * P_j (strict).
double success_joint_tin(const SystemConfig& cfg, User user);

// The indicator alone: true iff P_i > gamma_i * P_j. Unlike
// success_joint_tin() this cannot underflow to zero for tiny margins.
bool tin_joint_feasible(const SystemConfig& cfg, User user);

// Pr(D1/1,2) when receiver 1 applies successive decoding. Requires
// cfg.scheme == kSd.
double success_joint_sd(const SystemConfig& cfg);

// Power level for user 2 above which successive decoding at receiver 1 is
// limited only by its own single-user decoding: p1 * gamma2 (1 + gamma1) / gamma1.
double sd_interference_free_threshold(const SystemConfig& cfg);

SuccessProfile success_profile(const SystemConfig& cfg);

// True iff gamma1 * gamma2 <= 1.
bool tin_feasibility(double gamma1, double gamma2);

}  // namespace bcstab

#endif  // BCSTAB_CHANNEL_MODEL_H_
