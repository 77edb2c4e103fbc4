#include "bcstab/stability_region.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bcstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double axis_value(int axis, double lambda1, double lambda2) {
  return axis == 1 ? lambda1 : lambda2;
}

SubRegion empty_subregion(SubRegionLabel label, int axis) {
  return SubRegion{HalfPlane{0.0, 0.0, 0.0}, AxisBound{axis, 0.0}, label};
}

// One dominant system. `own_solo`/`own_joint` belong to the queue whose
// service rate depends on the other queue's emptiness; `other_joint` is the
// constant service rate of the queue that never sees its partner empty.
// `box_axis` is the axis carrying the other queue's rate.
SubRegion dominant_subregion(double own_solo, double own_joint, double other_joint,
                             int box_axis, SubRegionLabel label) {
  const int own_axis = box_axis == 1 ? 2 : 1;
  if (!(own_solo > 0.0)) return empty_subregion(label, box_axis);

  HalfPlane slope;
  slope.b = 1.0;
  const double own_coef = 1.0 / own_solo;
  double other_coef = 0.0;
  if (other_joint > 0.0) {
    other_coef = (own_solo - own_joint) / (own_solo * other_joint);
  }
  // With other_joint == 0 the other queue can only be stable at zero load,
  // leaving the segment {other = 0, own < own_solo}.
  if (own_axis == 1) {
    slope.a1 = own_coef;
    slope.a2 = other_coef;
  } else {
    slope.a1 = other_coef;
    slope.a2 = own_coef;
  }
  return SubRegion{slope, AxisBound{box_axis, other_joint}, label};
}

}  // namespace

void validate(const ArrivalRates& rates) {
  for (const auto& [name, value] :
       {std::pair{"lambda1", rates.lambda1}, std::pair{"lambda2", rates.lambda2}}) {
    if (!std::isfinite(value) || value < 0.0) {
      throw InvalidArgument(name, "arrival rate must be finite and nonnegative");
    }
  }
}

bool SubRegion::contains(double lambda1, double lambda2) const {
  if (empty()) return false;
  if (!(slope.a1 * lambda1 + slope.a2 * lambda2 < slope.b)) return false;
  const double v = axis_value(box.axis, lambda1, lambda2);
  return box.bound > 0.0 ? v < box.bound : v == 0.0;
}

std::optional<double> SubRegion::max_lambda1() const {
  if (empty()) return std::nullopt;
  double x = slope.a1 > 0.0 ? slope.b / slope.a1 : kInf;
  if (box.axis == 1) x = std::min(x, box.bound);
  return x;
}

std::optional<double> SubRegion::height(double lambda1) const {
  if (empty() || lambda1 < 0.0) return std::nullopt;
  if (box.axis == 1 && lambda1 > box.bound) return std::nullopt;
  const double slack = slope.b - slope.a1 * lambda1;
  if (slack < 0.0) return std::nullopt;
  double y = slope.a2 > 0.0 ? slack / slope.a2 : kInf;
  if (box.axis == 2) y = std::min(y, box.bound);
  return y;
}

std::optional<double> SubRegion::ray_exit(double u1, double u2) const {
  if (empty()) return std::nullopt;
  double t = kInf;
  const double rate = slope.a1 * u1 + slope.a2 * u2;
  if (rate > 0.0) t = slope.b / rate;
  const double u_axis = box.axis == 1 ? u1 : u2;
  if (u_axis > 0.0) t = std::min(t, box.bound / u_axis);
  return t;
}

StabilityRegion build_region(const SuccessProfile& profile) {
  validate(profile);
  StabilityRegion region;
  region.profile = profile;
  region.sub1 = dominant_subregion(profile.p_1_1, profile.p_1_12, profile.p_2_12,
                                   /*box_axis=*/2, SubRegionLabel::kR1);
  region.sub2 = dominant_subregion(profile.p_2_2, profile.p_2_12, profile.p_1_12,
                                   /*box_axis=*/1, SubRegionLabel::kR2);
  return region;
}

bool contains(const StabilityRegion& region, const ArrivalRates& rates) {
  validate(rates);
  return region.sub1.contains(rates.lambda1, rates.lambda2) ||
         region.sub2.contains(rates.lambda1, rates.lambda2);
}

std::optional<double> max_lambda1(const StabilityRegion& region) {
  const auto x1 = region.sub1.max_lambda1();
  const auto x2 = region.sub2.max_lambda1();
  if (!x1) return x2;
  if (!x2) return x1;
  return std::max(*x1, *x2);
}

std::optional<double> frontier_height(const StabilityRegion& region, double lambda1) {
  const auto y1 = region.sub1.height(lambda1);
  const auto y2 = region.sub2.height(lambda1);
  if (!y1) return y2;
  if (!y2) return y1;
  return std::max(*y1, *y2);
}

bool closure_contains(const StabilityRegion& region, const ArrivalRates& rates,
                      double tolerance) {
  validate(rates);
  const auto x_max = max_lambda1(region);
  if (!x_max || rates.lambda1 > *x_max + tolerance) return false;
  const auto y = frontier_height(region, std::min(rates.lambda1, *x_max));
  return y && rates.lambda2 <= *y + tolerance;
}

std::optional<double> ray_exit(const StabilityRegion& region, double u1, double u2) {
  if (!std::isfinite(u1) || !std::isfinite(u2) || u1 < 0.0 || u2 < 0.0 ||
      (u1 == 0.0 && u2 == 0.0)) {
    throw InvalidArgument("direction", "must be nonnegative and nonzero");
  }
  const auto t1 = region.sub1.ray_exit(u1, u2);
  const auto t2 = region.sub2.ray_exit(u1, u2);
  if (!t1) return t2;
  if (!t2) return t1;
  return std::max(*t1, *t2);
}

std::vector<ArrivalRates> boundary(const StabilityRegion& region, int n_points) {
  if (n_points < 2) throw InvalidArgument("n_points", "must be at least 2");
  std::vector<ArrivalRates> points;
  const auto x_max = max_lambda1(region);
  if (!x_max) return points;
  points.reserve(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    // Pin the last sample to x_max exactly to avoid falling off the edge.
    const double x = k + 1 == n_points ? *x_max : *x_max * k / (n_points - 1);
    const auto y = frontier_height(region, x);
    points.push_back({x, y.value_or(0.0)});
  }
  return points;
}

bool is_convex(const SuccessProfile& profile) {
  validate(profile);
  if (!(profile.p_1_1 > 0.0)) {
    throw InvalidArgument("p_1_1", "convexity condition undefined for zero solo success");
  }
  if (!(profile.p_2_2 > 0.0)) {
    throw InvalidArgument("p_2_2", "convexity condition undefined for zero solo success");
  }
  return profile.p_1_12 / profile.p_1_1 + profile.p_2_12 / profile.p_2_2 >= 1.0;
}

std::string_view to_string(Corner corner) {
  switch (corner) {
    case Corner::kUser2Solo:
      return "user2_solo";
    case Corner::kJoint:
      return "joint";
    case Corner::kUser1Solo:
      return "user1_solo";
  }
  return "?";
}

Corner parse_corner(std::string_view text) {
  if (text == "user2_solo") return Corner::kUser2Solo;
  if (text == "joint") return Corner::kJoint;
  if (text == "user1_solo") return Corner::kUser1Solo;
  throw InvalidArgument("corner", "unknown corner '" + std::string(text) + "'");
}

AggregateThroughput max_aggregate(const SuccessProfile& profile) {
  validate(profile);
  const AggregateThroughput candidates[] = {
      {profile.p_2_2, Corner::kUser2Solo},
      {profile.p_1_12 + profile.p_2_12, Corner::kJoint},
      {profile.p_1_1, Corner::kUser1Solo}};
  AggregateThroughput best = candidates[0];
  for (const auto& c : candidates) {
    if (c.value > best.value) best = c;
  }
  return best;
}

double saturated_aggregate(const SuccessProfile& profile) {
  validate(profile);
  return profile.p_1_12 + profile.p_2_12;
}

std::vector<ClosureEntry> closure(const SystemConfig& base, int n_splits) {
  validate(base);
  if (n_splits < 2) throw InvalidArgument("n_splits", "must be at least 2");
  std::vector<ClosureEntry> entries;
  entries.reserve(static_cast<std::size_t>(n_splits));
  for (int k = 0; k < n_splits; ++k) {
    const double p1 =
        k + 1 == n_splits ? base.p_total : base.p_total * k / (n_splits - 1);
    entries.push_back({p1, build_region(success_profile(base.with_split(p1)))});
  }
  return entries;
}

bool closure_contains(std::span<const ClosureEntry> entries, const ArrivalRates& rates,
                      double tolerance) {
  return std::any_of(entries.begin(), entries.end(), [&](const ClosureEntry& e) {
    return tolerance == 0.0 ? contains(e.region, rates)
                            : closure_contains(e.region, rates, tolerance);
  });
}

std::vector<ArrivalRates> closure_envelope(std::span<const ClosureEntry> entries,
                                           int n_points) {
  if (n_points < 2) throw InvalidArgument("n_points", "must be at least 2");
  std::optional<double> x_max;
  for (const auto& e : entries) {
    const auto x = max_lambda1(e.region);
    if (x && (!x_max || *x > *x_max)) x_max = x;
  }
  std::vector<ArrivalRates> points;
  if (!x_max) return points;
  points.reserve(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    const double x = k + 1 == n_points ? *x_max : *x_max * k / (n_points - 1);
    double y = 0.0;
    for (const auto& e : entries) {
      if (const auto h = frontier_height(e.region, x)) y = std::max(y, *h);
    }
    points.push_back({x, y});
  }
  return points;
}

std::optional<double> closure_frontier_height(const SystemConfig& base, double lambda1,
                                              int coarse_splits) {
  validate(base);
  if (coarse_splits < 3) throw InvalidArgument("coarse_splits", "must be at least 3");
  const auto height_at = [&](double p1) {
    const auto h = frontier_height(build_region(success_profile(base.with_split(p1))),
                                   lambda1);
    return h.value_or(-kInf);
  };

  const double step = base.p_total / (coarse_splits - 1);
  std::vector<double> values(static_cast<std::size_t>(coarse_splits));
  for (int k = 0; k < coarse_splits; ++k) {
    values[k] = height_at(k + 1 == coarse_splits ? base.p_total : step * k);
  }
  double best = *std::max_element(values.begin(), values.end());
  if (best == -kInf) return std::nullopt;

  // Refine around every coarse local maximum within reach of the best.
  constexpr double kInvPhi = 0.6180339887498949;
  for (int k = 0; k < coarse_splits; ++k) {
    const bool left_ok = k == 0 || values[k] >= values[k - 1];
    const bool right_ok = k + 1 == coarse_splits || values[k] >= values[k + 1];
    if (!left_ok || !right_ok || values[k] == -kInf) continue;
    double lo = std::max(0.0, step * (k - 1));
    double hi = std::min(base.p_total, step * (k + 1));
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = height_at(x1);
    double f2 = height_at(x2);
    for (int iter = 0; iter < 80 && hi - lo > 1e-12 * base.p_total; ++iter) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = height_at(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = height_at(x1);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

}  // namespace bcstab
