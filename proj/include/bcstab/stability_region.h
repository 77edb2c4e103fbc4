// Stable-throughput region of the two-queue broadcast source.
//
// The region is the union of two downward-closed polygons, one per dominant
// system (the source keeps one queue busy with dummy packets). Each polygon is
// stored as one slanted half-plane plus one axis bound, so membership and
// corner points are exact. Rasterisation only happens in boundary sampling.

#ifndef BCSTAB_STABILITY_REGION_H_
#define BCSTAB_STABILITY_REGION_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bcstab/channel_model.h"

namespace bcstab {

struct ArrivalRates {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  bool operator==(const ArrivalRates&) const = default;
};

void validate(const ArrivalRates& rates);

// a1 * lambda1 + a2 * lambda2 < b, all coefficients nonnegative.
struct HalfPlane {
  double a1 = 0.0;
  double a2 = 0.0;
  double b = 0.0;

  bool operator==(const HalfPlane&) const = default;
};

// lambda_axis < bound. A zero bound pins the axis to exactly zero instead of
// emptying the set: that is how a collapsed sub-region (a segment on the
// other axis) is represented.
struct AxisBound {
  int axis = 1;
  double bound = 0.0;

  bool operator==(const AxisBound&) const = default;
};

enum class SubRegionLabel { kR1, kR2 };

struct SubRegion {
  HalfPlane slope;
  AxisBound box;
  SubRegionLabel label = SubRegionLabel::kR1;

  // b == 0 makes the strict half-plane unsatisfiable for nonnegative rates.
  bool empty() const { return !(slope.b > 0.0); }

  // Strict membership (the open stability set).
  bool contains(double lambda1, double lambda2) const;

  // Largest lambda1 in the closure, nullopt when empty.
  std::optional<double> max_lambda1() const;

  // sup{lambda2 : (lambda1, lambda2) in closure}, nullopt if the vertical
  // line misses the closure.
  std::optional<double> height(double lambda1) const;

  // Largest t with t * (u1, u2) in the closure (0 if only the origin).
  // nullopt when empty.
  std::optional<double> ray_exit(double u1, double u2) const;

  bool operator==(const SubRegion&) const = default;
};

struct StabilityRegion {
  SubRegion sub1;  // first dominant system (queue 1 sends dummies)
  SubRegion sub2;  // second dominant system (queue 2 sends dummies)
  SuccessProfile profile;

  bool empty() const { return sub1.empty() && sub2.empty(); }
  bool operator==(const StabilityRegion&) const = default;
};

StabilityRegion build_region(const SuccessProfile& profile);

bool contains(const StabilityRegion& region, const ArrivalRates& rates);

// Membership in the closed region with `tolerance` slack on both axes.
bool closure_contains(const StabilityRegion& region, const ArrivalRates& rates,
                      double tolerance = 0.0);

std::optional<double> max_lambda1(const StabilityRegion& region);
std::optional<double> frontier_height(const StabilityRegion& region, double lambda1);

// Distance along the unit ray (u1, u2) to the closure boundary. Throws on a
// direction with a negative component or both components zero.
std::optional<double> ray_exit(const StabilityRegion& region, double u1, double u2);

// n_points evenly spaced lambda1 samples over [0, sup lambda1] paired with the
// upper frontier of the closure. Empty region gives an empty list.
std::vector<ArrivalRates> boundary(const StabilityRegion& region, int n_points);

// Convexity condition: Pr(D1/1,2)/Pr(D1/1) + Pr(D2/1,2)/Pr(D2/2) >= 1.
// Throws when a solo probability is zero (condition undefined).
bool is_convex(const SuccessProfile& profile);

enum class Corner { kUser2Solo, kJoint, kUser1Solo };
std::string_view to_string(Corner corner);
Corner parse_corner(std::string_view text);

struct AggregateThroughput {
  double value = 0.0;
  Corner corner = Corner::kUser2Solo;

  bool operator==(const AggregateThroughput&) const = default;
};

// Best extreme point of the region for lambda1 + lambda2. Ties go to the
// earlier corner in the order user-2 solo, joint, user-1 solo.
AggregateThroughput max_aggregate(const SuccessProfile& profile);

// Pr(D1/1,2) + Pr(D2/1,2): both queues permanently backlogged.
double saturated_aggregate(const SuccessProfile& profile);

struct ClosureEntry {
  double p1 = 0.0;
  StabilityRegion region;

  bool operator==(const ClosureEntry&) const = default;
};

// Regions for p1 on a uniform grid over [0, p_total] with both endpoints;
// degenerate splits are kept.
std::vector<ClosureEntry> closure(const SystemConfig& base, int n_splits);

bool closure_contains(std::span<const ClosureEntry> entries, const ArrivalRates& rates,
                      double tolerance = 0.0);

// Upper envelope of the union sampled at n_points evenly spaced lambda1.
std::vector<ArrivalRates> closure_envelope(std::span<const ClosureEntry> entries,
                                           int n_points);

// sup over every split p1 in [0, p_total] (not just a grid) of the frontier
// height at lambda1: a coarse scan followed by golden-section refinement
// around the best cells. nullopt when no split reaches lambda1.
std::optional<double> closure_frontier_height(const SystemConfig& base, double lambda1,
                                              int coarse_splits = 2001);

}  // namespace bcstab

#endif  // BCSTAB_STABILITY_REGION_H_
