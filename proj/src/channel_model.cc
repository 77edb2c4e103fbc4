#include "bcstab/channel_model.h"

#include <algorithm>
#include <cmath>

namespace bcstab {

namespace {

void require_finite(std::string_view field, double value) {
  if (!std::isfinite(value)) {
    throw InvalidArgument(std::string(field), "must be finite");
  }
}

void require_positive(std::string_view field, double value) {
  require_finite(field, value);
  if (!(value > 0.0)) {
    throw InvalidArgument(std::string(field), "must be strictly positive");
  }
}

void require_nonnegative(std::string_view field, double value) {
  require_finite(field, value);
  if (value < 0.0) {
    throw InvalidArgument(std::string(field), "must be nonnegative");
  }
}

// Probability that a unit-mean exponential gain clears `required`, where
// the SINR constraint has been rearranged to gain * margin >= gamma d^alpha.
double joint_tin(double gamma, double distance, double alpha, double own_power,
                 double other_power) {
  const double margin = own_power - gamma * other_power;
  if (!(margin > 0.0)) return 0.0;
  return std::exp(-gamma * std::pow(distance, alpha) / margin);
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::kTin ? "tin" : "sd";
}

std::string_view to_string(PowerPolicy policy) {
  return policy == PowerPolicy::kFixed ? "fixed" : "adaptive";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "tin" || text == "TIN") return Scheme::kTin;
  if (text == "sd" || text == "SD") return Scheme::kSd;
  throw InvalidArgument("scheme", "expected tin|sd, got '" + std::string(text) + "'");
}

PowerPolicy parse_policy(std::string_view text) {
  if (text == "fixed") return PowerPolicy::kFixed;
  if (text == "adaptive" || text == "pc") return PowerPolicy::kQueueAdaptive;
  throw InvalidArgument("policy",
                        "expected fixed|adaptive, got '" + std::string(text) + "'");
}

SystemConfig SystemConfig::with_split(double new_p1) const {
  SystemConfig out = *this;
  out.p1 = new_p1;
  out.p2 = p_total - new_p1;
  // Clamp rounding noise at the grid ends so validate() accepts the split.
  if (out.p2 < 0.0 && out.p2 > -1e-9 * p_total) out.p2 = 0.0;
  return out;
}

void validate(const SystemConfig& cfg) {
  require_positive("gamma1", cfg.gamma1);
  require_positive("gamma2", cfg.gamma2);
  require_positive("d1", cfg.d1);
  require_positive("d2", cfg.d2);
  require_positive("alpha", cfg.alpha);
  require_positive("p_total", cfg.p_total);
  require_nonnegative("p1", cfg.p1);
  require_nonnegative("p2", cfg.p2);
  if (std::abs(cfg.p1 + cfg.p2 - cfg.p_total) > 1e-9 * cfg.p_total) {
    throw InvalidArgument("p1", "p1 + p2 must equal p_total");
  }
  if (cfg.scheme == Scheme::kSd && cfg.strong_user != User::k1) {
    throw InvalidArgument("scheme",
                          "successive decoding requires receiver 1 to be the strong receiver");
  }
}

void validate(const SuccessProfile& profile) {
  const std::pair<const char*, double> fields[] = {
      {"p_1_1", profile.p_1_1},
      {"p_2_2", profile.p_2_2},
      {"p_1_12", profile.p_1_12},
      {"p_2_12", profile.p_2_12}};
  for (const auto& [name, value] : fields) {
    require_finite(name, value);
    if (value < 0.0 || value > 1.0) {
      throw InvalidArgument(name, "probability outside [0, 1]");
    }
  }
  if (profile.p_1_12 > profile.p_1_1) {
    throw InvalidArgument("p_1_12", "joint success exceeds solo success");
  }
  if (profile.p_2_12 > profile.p_2_2) {
    throw InvalidArgument("p_2_12", "joint success exceeds solo success");
  }
}

double outage_free_probability(double gamma, double distance, double alpha,
                               double power) {
  require_finite("gamma", gamma);
  require_finite("distance", distance);
  require_finite("alpha", alpha);
  if (std::isnan(power) || power < 0.0) {
    throw InvalidArgument("power", "must be nonnegative");
  }
  if (power == 0.0) return 0.0;
  return std::exp(-gamma * std::pow(distance, alpha) / power);
}

double success_solo(const SystemConfig& cfg, User user) {
  validate(cfg);
  const bool adaptive = cfg.power_policy == PowerPolicy::kQueueAdaptive;
  if (user == User::k1) {
    return outage_free_probability(cfg.gamma1, cfg.d1, cfg.alpha,
                                   adaptive ? cfg.p_total : cfg.p1);
  }
  return outage_free_probability(cfg.gamma2, cfg.d2, cfg.alpha,
                                 adaptive ? cfg.p_total : cfg.p2);
}

double success_joint_tin(const SystemConfig& cfg, User user) {
  validate(cfg);
  if (user == User::k1) {
    return joint_tin(cfg.gamma1, cfg.d1, cfg.alpha, cfg.p1, cfg.p2);
  }
  return joint_tin(cfg.gamma2, cfg.d2, cfg.alpha, cfg.p2, cfg.p1);
}

bool tin_joint_feasible(const SystemConfig& cfg, User user) {
  validate(cfg);
  return user == User::k1 ? cfg.p1 > cfg.gamma1 * cfg.p2 : cfg.p2 > cfg.gamma2 * cfg.p1;
}

double sd_interference_free_threshold(const SystemConfig& cfg) {
  return cfg.p1 * cfg.gamma2 * (1.0 + cfg.gamma1) / cfg.gamma1;
}

double success_joint_sd(const SystemConfig& cfg) {
  validate(cfg);
  if (cfg.scheme != Scheme::kSd) {
    throw InvalidArgument("scheme", "successive decoding probability requested for a TIN config");
  }
  if (!(cfg.p2 > cfg.gamma2 * cfg.p1)) return 0.0;
  const double d_alpha = std::pow(cfg.d1, cfg.alpha);
  if (cfg.p2 <= sd_interference_free_threshold(cfg)) {
    // Stripping user 2's message is the binding step.
    return std::exp(-cfg.gamma2 * d_alpha / (cfg.p2 - cfg.gamma2 * cfg.p1));
  }
  return outage_free_probability(cfg.gamma1, cfg.d1, cfg.alpha, cfg.p1);
}

SuccessProfile success_profile(const SystemConfig& cfg) {
  validate(cfg);
  SuccessProfile profile;
  profile.p_1_1 = success_solo(cfg, User::k1);
  profile.p_2_2 = success_solo(cfg, User::k2);
  profile.p_1_12 = cfg.scheme == Scheme::kSd ? success_joint_sd(cfg)
                                             : success_joint_tin(cfg, User::k1);
  profile.p_2_12 = success_joint_tin(cfg, User::k2);
  // At the successive-decoding knot both closed forms agree analytically;
  // rounding may leave the joint value one ulp above the solo one.
  profile.p_1_12 = std::min(profile.p_1_12, profile.p_1_1);
  validate(profile);
  return profile;
}

bool tin_feasibility(double gamma1, double gamma2) {
  require_positive("gamma1", gamma1);
  require_positive("gamma2", gamma2);
  return gamma1 * gamma2 <= 1.0;
}

}  // namespace bcstab
