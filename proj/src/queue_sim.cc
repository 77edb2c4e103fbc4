#include "bcstab/queue_sim.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "bcstab/counter_rng.h"

namespace bcstab {

namespace {

// Per-slot decoding decisions for a transmitted set. Both modes consume the
// same two uniforms, so closed-form and channel-draw runs stay coupled.
class SlotDecoder {
 public:
  SlotDecoder(const SystemConfig& cfg, ServiceMode mode)
      : cfg_(cfg), mode_(mode), profile_(success_profile(cfg)) {
    path_gain1_ = std::pow(cfg.d1, -cfg.alpha);
    path_gain2_ = std::pow(cfg.d2, -cfg.alpha);
    const bool adaptive = cfg.power_policy == PowerPolicy::kQueueAdaptive;
    solo_power1_ = adaptive ? cfg.p_total : cfg.p1;
    solo_power2_ = adaptive ? cfg.p_total : cfg.p2;
  }

  std::pair<bool, bool> decode(bool tx1, bool tx2, double u1, double u2) const {
    const bool joint = tx1 && tx2;
    if (mode_ == ServiceMode::kClosedForm) {
      const bool s1 = tx1 && u1 < (joint ? profile_.p_1_12 : profile_.p_1_1);
      const bool s2 = tx2 && u2 < (joint ? profile_.p_2_12 : profile_.p_2_2);
      return {s1, s2};
    }
    // Unit-mean exponential channel power gains |h_i|^2 by inversion.
    bool s1 = false;
    bool s2 = false;
    if (tx1) {
      const double snr_unit = -std::log1p(-u1) * path_gain1_;
      if (!joint) {
        s1 = solo_power1_ * snr_unit >= cfg_.gamma1;
      } else if (cfg_.scheme == Scheme::kTin) {
        s1 = cfg_.p1 * snr_unit / (1.0 + cfg_.p2 * snr_unit) >= cfg_.gamma1;
      } else {
        // Strip user 2's message first, then decode interference-free.
        s1 = cfg_.p2 * snr_unit / (1.0 + cfg_.p1 * snr_unit) >= cfg_.gamma2 &&
             cfg_.p1 * snr_unit >= cfg_.gamma1;
      }
    }
    if (tx2) {
      const double snr_unit = -std::log1p(-u2) * path_gain2_;
      s2 = joint ? cfg_.p2 * snr_unit / (1.0 + cfg_.p1 * snr_unit) >= cfg_.gamma2
                 : solo_power2_ * snr_unit >= cfg_.gamma2;
    }
    return {s1, s2};
  }

 private:
  SystemConfig cfg_;
  ServiceMode mode_;
  SuccessProfile profile_;
  double path_gain1_ = 0.0;
  double path_gain2_ = 0.0;
  double solo_power1_ = 0.0;
  double solo_power2_ = 0.0;
};

struct QueuePair {
  std::uint64_t q1 = 0;
  std::uint64_t q2 = 0;
};

struct SlotEvent {
  bool tx1 = false;
  bool tx2 = false;
  bool ok1 = false;
  bool ok2 = false;
};

SlotEvent advance(QueuePair& q, DominantSystem dominant, const SlotDecoder& decoder,
                  const CounterRng& rng, std::uint64_t slot, const ArrivalRates& rates) {
  SlotEvent ev;
  ev.tx1 = q.q1 > 0 || dominant == DominantSystem::kQueue1Dummy;
  ev.tx2 = q.q2 > 0 || dominant == DominantSystem::kQueue2Dummy;
  if (ev.tx1 || ev.tx2) {
    std::tie(ev.ok1, ev.ok2) =
        decoder.decode(ev.tx1, ev.tx2, rng.uniform(slot, DrawStream::kDecode1),
                       rng.uniform(slot, DrawStream::kDecode2));
  }
  // Dummy packets never drain a real queue.
  if (ev.ok1 && q.q1 > 0) --q.q1;
  if (ev.ok2 && q.q2 > 0) --q.q2;
  if (rng.uniform(slot, DrawStream::kArrival1) < rates.lambda1) ++q.q1;
  if (rng.uniform(slot, DrawStream::kArrival2) < rates.lambda2) ++q.q2;
  return ev;
}

// Streaming least-squares slope of y against x.
class SlopeAccumulator {
 public:
  void add(double x, double y) {
    ++n_;
    const double dx = x - mean_x_;
    mean_x_ += dx / n_;
    mean_y_ += (y - mean_y_) / n_;
    sxx_ += dx * (x - mean_x_);
    sxy_ += dx * (y - mean_y_);
  }
  double slope() const { return sxx_ > 0.0 ? sxy_ / sxx_ : 0.0; }

 private:
  double n_ = 0.0;
  double mean_x_ = 0.0;
  double mean_y_ = 0.0;
  double sxx_ = 0.0;
  double sxy_ = 0.0;
};

void record(ServiceCounts& counts, bool joint, bool ok) {
  if (joint) {
    ++counts.joint_attempts;
    counts.joint_successes += ok;
  } else {
    ++counts.solo_attempts;
    counts.solo_successes += ok;
  }
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

enum class Probe { kStable, kUnstable, kInconclusive };

Probe classify_pair(const SimOutcome& out) {
  const Verdict v1 = out.queue[0].verdict;
  const Verdict v2 = out.queue[1].verdict;
  if (v1 == Verdict::kUnstable || v2 == Verdict::kUnstable) return Probe::kUnstable;
  if (v1 == Verdict::kStable && v2 == Verdict::kStable) return Probe::kStable;
  return Probe::kInconclusive;
}

}  // namespace

std::string_view to_string(DominantSystem dominant) {
  switch (dominant) {
    case DominantSystem::kNone:
      return "none";
    case DominantSystem::kQueue1Dummy:
      return "queue1_dummy";
    case DominantSystem::kQueue2Dummy:
      return "queue2_dummy";
  }
  return "?";
}

std::string_view to_string(ServiceMode mode) {
  return mode == ServiceMode::kClosedForm ? "closed_form" : "channel_draw";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kStable:
      return "stable";
    case Verdict::kUnstable:
      return "unstable";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string_view to_string(ScanStatus status) {
  switch (status) {
    case ScanStatus::kConverged:
      return "converged";
    case ScanStatus::kBracketed:
      return "bracketed";
    case ScanStatus::kSaturated:
      return "saturated";
  }
  return "?";
}

DominantSystem parse_dominant(std::string_view text) {
  if (text == "none") return DominantSystem::kNone;
  if (text == "queue1_dummy" || text == "queue1-dummy") return DominantSystem::kQueue1Dummy;
  if (text == "queue2_dummy" || text == "queue2-dummy") return DominantSystem::kQueue2Dummy;
  throw InvalidArgument("dominant", "expected none|queue1_dummy|queue2_dummy, got '" +
                                        std::string(text) + "'");
}

ServiceMode parse_mode(std::string_view text) {
  if (text == "closed_form" || text == "closed-form") return ServiceMode::kClosedForm;
  if (text == "channel_draw" || text == "channel-draw") return ServiceMode::kChannelDraw;
  throw InvalidArgument("mode", "expected closed_form|channel_draw, got '" +
                                    std::string(text) + "'");
}

Verdict parse_verdict(std::string_view text) {
  if (text == "stable") return Verdict::kStable;
  if (text == "unstable") return Verdict::kUnstable;
  if (text == "inconclusive") return Verdict::kInconclusive;
  throw InvalidArgument("verdict", "unknown verdict '" + std::string(text) + "'");
}

ScanStatus parse_scan_status(std::string_view text) {
  if (text == "converged") return ScanStatus::kConverged;
  if (text == "bracketed") return ScanStatus::kBracketed;
  if (text == "saturated") return ScanStatus::kSaturated;
  throw InvalidArgument("status", "unknown scan status '" + std::string(text) + "'");
}

double ServiceCounts::solo_frequency() const { return ratio(solo_successes, solo_attempts); }
double ServiceCounts::joint_frequency() const {
  return ratio(joint_successes, joint_attempts);
}
double ServiceCounts::frequency() const {
  return ratio(solo_successes + joint_successes, solo_attempts + joint_attempts);
}

void validate(const SimConfig& cfg) {
  validate(cfg.system);
  validate(cfg.rates);
  if (cfg.rates.lambda1 > 1.0) throw InvalidArgument("lambda1", "must be at most 1");
  if (cfg.rates.lambda2 > 1.0) throw InvalidArgument("lambda2", "must be at most 1");
  if (cfg.horizon < 1) throw InvalidArgument("horizon", "must be at least 1");
  if (!std::isfinite(cfg.drift_eps) || cfg.drift_eps < 0.0) {
    throw InvalidArgument("drift_eps", "must be finite and nonnegative");
  }
  if (!std::isfinite(cfg.q_cap_fraction) || !(cfg.q_cap_fraction > 0.0)) {
    throw InvalidArgument("q_cap_fraction", "must be finite and positive");
  }
}

Verdict classify(double drift, std::uint64_t final_length, double drift_eps, double q_cap) {
  const bool growing = drift > drift_eps;
  const bool large = static_cast<double>(final_length) >= q_cap;
  if (!growing && !large) return Verdict::kStable;
  if (growing && large) return Verdict::kUnstable;
  return Verdict::kInconclusive;
}

SimOutcome simulate(const SimConfig& cfg) {
  validate(cfg);
  if (cfg.horizon < kMinVerdictHorizon) {
    throw InvalidArgument("horizon", "need at least 10000 slots for a drift verdict");
  }
  const SlotDecoder decoder(cfg.system, cfg.mode);
  const CounterRng rng(cfg.seed);

  QueuePair q;
  SimOutcome out;
  std::array<double, 2> length_sum{};
  std::array<std::uint64_t, 2> empty_slots{};
  std::array<SlopeAccumulator, 2> slope;
  const std::uint64_t half = cfg.horizon / 2;

  for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
    length_sum[0] += static_cast<double>(q.q1);
    length_sum[1] += static_cast<double>(q.q2);
    empty_slots[0] += q.q1 == 0;
    empty_slots[1] += q.q2 == 0;
    if (t >= half) {
      const double x = static_cast<double>(t - half);
      slope[0].add(x, static_cast<double>(q.q1));
      slope[1].add(x, static_cast<double>(q.q2));
    }
    const SlotEvent ev = advance(q, cfg.dominant, decoder, rng, t, cfg.rates);
    const bool joint = ev.tx1 && ev.tx2;
    if (ev.tx1) record(out.queue[0].service, joint, ev.ok1);
    if (ev.tx2) record(out.queue[1].service, joint, ev.ok2);
  }

  const double horizon = static_cast<double>(cfg.horizon);
  const double q_cap = cfg.q_cap_fraction * horizon;
  const std::array<std::uint64_t, 2> finals{q.q1, q.q2};
  for (int i = 0; i < 2; ++i) {
    QueueStats& s = out.queue[i];
    s.final_length = finals[i];
    s.mean_length = length_sum[i] / horizon;
    s.drift = slope[i].slope();
    s.empty_fraction = static_cast<double>(empty_slots[i]) / horizon;
    s.verdict = classify(s.drift, s.final_length, cfg.drift_eps, q_cap);
  }
  return out;
}

EmptyProbability empty_probability_check(const SimConfig& cfg) {
  validate(cfg);
  if (cfg.dominant == DominantSystem::kNone) {
    throw InvalidArgument("dominant", "empty-probability check needs a dominant system");
  }
  const SuccessProfile profile = success_profile(cfg.system);
  const bool real_is_2 = cfg.dominant == DominantSystem::kQueue1Dummy;
  const double lambda = real_is_2 ? cfg.rates.lambda2 : cfg.rates.lambda1;
  const double service = real_is_2 ? profile.p_2_12 : profile.p_1_12;
  if (!(lambda < service)) {
    throw InvalidArgument(real_is_2 ? "lambda2" : "lambda1",
                          "real queue of the dominant system is unstable");
  }
  const SimOutcome out = simulate(cfg);
  return {1.0 - lambda / service, out.queue[real_is_2 ? 1 : 0].empty_fraction};
}

BoundaryScan boundary_scan(const SystemConfig& system, double u1, double u2,
                           std::uint64_t horizon, std::uint64_t seed,
                           const ScanOptions& options) {
  validate(system);
  if (!std::isfinite(u1) || !std::isfinite(u2) || u1 < 0.0 || u2 < 0.0 ||
      (u1 == 0.0 && u2 == 0.0)) {
    throw InvalidArgument("direction", "must be nonnegative and nonzero");
  }
  if (!(options.bracket_width > 0.0)) {
    throw InvalidArgument("bracket_width", "must be positive");
  }
  const double norm = std::hypot(u1, u2);
  u1 /= norm;
  u2 /= norm;
  const double t_max = 1.0 / std::max(u1, u2);

  std::uint64_t probe_index = 0;
  const auto run_probe = [&](double t) {
    SimConfig sim;
    sim.system = system;
    sim.rates = {std::min(1.0, t * u1), std::min(1.0, t * u2)};
    sim.horizon = horizon;
    sim.seed = derive_seed(seed, probe_index++);
    sim.mode = options.mode;
    sim.drift_eps = options.drift_eps;
    sim.q_cap_fraction = options.q_cap_fraction;
    Probe p = classify_pair(simulate(sim));
    if (p == Probe::kInconclusive) {
      sim.horizon = horizon * 4;
      sim.seed = derive_seed(seed, probe_index++);
      p = classify_pair(simulate(sim));
    }
    return p;
  };
  const auto result = [&](double lo, double hi, ScanStatus status) {
    const double t = 0.5 * (lo + hi);
    return BoundaryScan{{t * u1, t * u2}, lo, hi, status};
  };

  const Probe top = run_probe(t_max);
  if (top == Probe::kStable) {
    return BoundaryScan{{t_max * u1, t_max * u2}, t_max, t_max, ScanStatus::kSaturated};
  }
  double lo = 0.0;
  double hi = t_max;
  if (top == Probe::kInconclusive) return result(lo, hi, ScanStatus::kBracketed);
  while (hi - lo > options.bracket_width) {
    const double mid = 0.5 * (lo + hi);
    switch (run_probe(mid)) {
      case Probe::kStable:
        lo = mid;
        break;
      case Probe::kUnstable:
        hi = mid;
        break;
      case Probe::kInconclusive:
        return result(lo, hi, ScanStatus::kBracketed);
    }
  }
  return result(lo, hi, ScanStatus::kConverged);
}

bool dominance_coupling_check(const SystemConfig& system, const ArrivalRates& rates,
                              std::uint64_t horizon, std::uint64_t seed,
                              DominantSystem dominant, ServiceMode mode) {
  SimConfig cfg;
  cfg.system = system;
  cfg.rates = rates;
  cfg.horizon = horizon;
  cfg.seed = seed;
  validate(cfg);
  if (dominant == DominantSystem::kNone) {
    throw InvalidArgument("dominant", "coupling check needs a dominant system");
  }
  const SlotDecoder decoder(system, mode);
  const CounterRng rng(seed);
  QueuePair original;
  QueuePair dominated;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    advance(original, DominantSystem::kNone, decoder, rng, t, rates);
    advance(dominated, dominant, decoder, rng, t, rates);
    if (dominated.q1 < original.q1 || dominated.q2 < original.q2) return false;
  }
  return true;
}

}  // namespace bcstab
