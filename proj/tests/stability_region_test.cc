#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "bcstab/stability_region.h"

using namespace bcstab;

namespace {

const SuccessProfile kTinFixed{0.5352614285189903, 0.5203085212063068, 0.0820849986238988,
                               0.41028259898180197};
const SuccessProfile kSdFixed{0.5352614285189903, 0.5203085212063068, 0.5352614285189903,
                              0.41028259898180197};

// The two dominant-system conditions written out longhand.
bool oracle_contains(const SuccessProfile& p, double l1, double l2) {
  bool in1 = false;
  bool in2 = false;
  if (p.p_1_1 > 0) {
    if (p.p_2_12 > 0) {
      in1 = l1 / p.p_1_1 + (p.p_1_1 - p.p_1_12) / (p.p_1_1 * p.p_2_12) * l2 < 1 &&
            l2 < p.p_2_12;
    } else {
      in1 = l2 == 0 && l1 < p.p_1_1;
    }
  }
  if (p.p_2_2 > 0) {
    if (p.p_1_12 > 0) {
      in2 = l2 / p.p_2_2 + (p.p_2_2 - p.p_2_12) / (p.p_2_2 * p.p_1_12) * l1 < 1 &&
            l1 < p.p_1_12;
    } else {
      in2 = l1 == 0 && l2 < p.p_2_2;
    }
  }
  return in1 || in2;
}

SuccessProfile random_profile(std::mt19937_64& rng, bool allow_zero) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SuccessProfile p;
  p.p_1_1 = 0.02 + 0.98 * u(rng);
  p.p_2_2 = 0.02 + 0.98 * u(rng);
  p.p_1_12 = p.p_1_1 * u(rng);
  p.p_2_12 = p.p_2_2 * u(rng);
  if (allow_zero) {
    const int k = static_cast<int>(u(rng) * 8);
    if (k == 0) p.p_1_12 = 0;
    if (k == 1) p.p_2_12 = 0;
    if (k == 2) p.p_1_12 = p.p_1_1;
  }
  return p;
}

// Midpoint test on the closed region: true iff every sampled midpoint lies
// under the frontier.
bool midpoints_inside(const StabilityRegion& region, std::mt19937_64& rng, int pairs,
                      double tol) {
  const double x_max = *max_lambda1(region);
  std::uniform_real_distribution<double> u(0.0, x_max);
  for (int i = 0; i < pairs; ++i) {
    const double xa = u(rng), xb = u(rng);
    const ArrivalRates a{xa, *frontier_height(region, xa)};
    const ArrivalRates b{xb, *frontier_height(region, xb)};
    const ArrivalRates mid{0.5 * (a.lambda1 + b.lambda1), 0.5 * (a.lambda2 + b.lambda2)};
    if (!closure_contains(region, mid, tol)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("stability_region") {

TEST_CASE("membership at hand-checked points of the interference-as-noise region") {
  const auto r = build_region(kTinFixed);
  CHECK(contains(r, {0.04, 0.40}));
  CHECK(r.sub1.contains(0.04, 0.40));
  // 0.50/0.5353 + 0.02 * 0.4503 / (0.5353 * 0.4103) < 1 puts it in the first part.
  CHECK(contains(r, {0.50, 0.02}));
  CHECK(r.sub1.contains(0.50, 0.02));
  CHECK_FALSE(contains(r, {0.30, 0.35}));
  CHECK(contains(r, {0.0821 * 0.99, 0.4103 * 0.99}));
  CHECK(contains(r, {0.0, 0.0}));
}

TEST_CASE("equal solo and joint success gives an uncoupled rectangle") {
  const SuccessProfile p{0.5353, 0.4103, 0.5353, 0.4103};
  const auto r = build_region(p);
  CHECK(r.sub1.slope.a2 == 0.0);
  CHECK(contains(r, {0.5353 * 0.999, 0.4103 * 0.999}));
  CHECK_FALSE(contains(r, {0.5353, 0.1}));
  CHECK_FALSE(contains(r, {0.1, 0.4103}));
  for (const auto& pt : boundary(r, 50)) CHECK(pt.lambda2 == doctest::Approx(0.4103));
}

TEST_CASE("successive decoding with fixed power has a rectangular first part") {
  const auto r = build_region(kSdFixed);
  CHECK(r.sub1.slope.a2 == 0.0);
  CHECK(r.sub1.slope.a1 == doctest::Approx(1 / kSdFixed.p_1_1));
  CHECK(r.sub1.box.axis == 2);
  CHECK(r.sub1.box.bound == kSdFixed.p_2_12);
  CHECK(is_convex(kSdFixed));
}

TEST_CASE("degenerate probabilities collapse the sub-regions") {
  // Zero joint success for user 2: the first part is the lambda1 axis segment.
  const auto seg = build_region({0.5, 0.4, 0.3, 0.0});
  CHECK(seg.sub1.contains(0.49, 0.0));
  CHECK_FALSE(seg.sub1.contains(0.49, 1e-12));
  CHECK_FALSE(seg.sub1.contains(0.5, 0.0));
  // Zero solo success: no first part at all.
  const auto none = build_region({0.0, 0.4, 0.0, 0.3});
  CHECK(none.sub1.empty());
  CHECK_FALSE(none.sub1.contains(0.0, 0.0));
  const auto all_zero = build_region({0, 0, 0, 0});
  CHECK(boundary(all_zero, 10).empty());
  CHECK_FALSE(contains(all_zero, {0, 0}));
}

TEST_CASE("membership matches the longhand inequalities") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_profile(rng, true);
    const auto r = build_region(p);
    double l1 = u(rng) * 0.8, l2 = u(rng) * 0.8;
    if (i % 10 == 0) l1 = 0;
    if (i % 10 == 1) l2 = 0;
    const bool got = contains(r, {l1, l2});
    inside += got;
    CHECK(got == oracle_contains(p, l1, l2));
  }
  CHECK(inside > 1000);
}

TEST_CASE("regions are downward closed") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const auto r = build_region(random_profile(rng, true));
    const ArrivalRates a{u(rng) * 0.6, u(rng) * 0.6};
    if (!contains(r, a)) continue;
    const ArrivalRates b{a.lambda1 * u(rng), a.lambda2 * u(rng)};
    CHECK(contains(r, b));
  }
}

TEST_CASE("corner points lie on the region boundary") {
  std::mt19937_64 rng(17);
  const double eps = 1e-9;
  for (int i = 0; i < 2000; ++i) {
    const auto p = random_profile(rng, false);
    const auto r = build_region(p);
    for (const ArrivalRates c : {ArrivalRates{p.p_1_1, 0}, ArrivalRates{0, p.p_2_2},
                                 ArrivalRates{p.p_1_12, p.p_2_12}}) {
      CHECK(contains(r, {c.lambda1 * (1 - eps), c.lambda2 * (1 - eps)}));
      if (c.lambda1 > 0 && c.lambda2 > 0) {
        CHECK_FALSE(contains(r, {c.lambda1 * (1 + eps), c.lambda2 * (1 + eps)}));
      } else if (c.lambda1 > 0) {
        CHECK_FALSE(contains(r, {c.lambda1 * (1 + eps), 0}));
      } else {
        CHECK_FALSE(contains(r, {0, c.lambda2 * (1 + eps)}));
      }
    }
  }
}

TEST_CASE("sampled frontier is nonincreasing and passes through the joint corner") {
  const auto r = build_region(kTinFixed);
  const auto pts = boundary(r, 512);
  REQUIRE(pts.size() == 512);
  CHECK(pts.front().lambda1 == 0.0);
  CHECK(pts.front().lambda2 == doctest::Approx(kTinFixed.p_2_2));
  CHECK(pts.back().lambda1 == kTinFixed.p_1_1);
  CHECK(pts.back().lambda2 == doctest::Approx(0.0).epsilon(1e-12));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].lambda2 <= pts[i - 1].lambda2 + 1e-15);
  }
  // Both printed lines meet at the joint corner.
  CHECK(*frontier_height(r, kTinFixed.p_1_12) == doctest::Approx(kTinFixed.p_2_12));
  // Left of the corner the frontier follows the second line, right of it the first.
  const double x = 0.04;
  const double line2 = kTinFixed.p_2_2 * (1 - (kTinFixed.p_2_2 - kTinFixed.p_2_12) /
                                                  (kTinFixed.p_2_2 * kTinFixed.p_1_12) * x);
  CHECK(*frontier_height(r, x) == doctest::Approx(line2));
  const double x2 = 0.3;
  const double line1 = (1 - x2 / kTinFixed.p_1_1) * kTinFixed.p_1_1 * kTinFixed.p_2_12 /
                       (kTinFixed.p_1_1 - kTinFixed.p_1_12);
  CHECK(*frontier_height(r, x2) == doctest::Approx(line1));
}

TEST_CASE("equality in the convexity condition gives the time-sharing triangle") {
  const SuccessProfile p{0.6, 0.5, 0.3, 0.25};
  CHECK(is_convex(p));
  const auto r = build_region(p);
  for (const auto& pt : boundary(r, 101)) {
    CHECK(pt.lambda2 == doctest::Approx(0.5 * (1 - pt.lambda1 / 0.6)).epsilon(1e-12));
  }
}

TEST_CASE("convexity condition examples") {
  CHECK(is_convex(kSdFixed));
  CHECK_FALSE(is_convex(kTinFixed));
  CHECK(is_convex({0.4, 0.6, 0.2, 0.3}));
  CHECK_THROWS_AS(is_convex({0.0, 0.5, 0.0, 0.2}), InvalidArgument);
  CHECK_THROWS_AS(is_convex({0.5, 0.0, 0.2, 0.0}), InvalidArgument);
}

TEST_CASE("convexity condition agrees with geometry and with the corner test") {
  std::mt19937_64 rng(23);
  int convex = 0;
  for (int i = 0; i < 300; ++i) {
    const auto p = random_profile(rng, false);
    if (p.p_1_12 == 0 || p.p_2_12 == 0) continue;
    const double sum = p.p_1_12 / p.p_1_1 + p.p_2_12 / p.p_2_2;
    if (std::abs(sum - 1) < 1e-9) continue;
    const bool analytic = is_convex(p);
    convex += analytic;
    // The joint corner sits on or above the chord between the solo corners.
    const double chord = p.p_2_2 * (1 - p.p_1_12 / p.p_1_1);
    CHECK(analytic == (p.p_2_12 >= chord));
    CHECK(analytic == midpoints_inside(build_region(p), rng, 400, 1e-12));
  }
  CHECK(convex > 20);
  CHECK(convex < 280);
}

TEST_CASE("maximum aggregate throughput matches a dense frontier search") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_profile(rng, true);
    const auto agg = max_aggregate(p);
    double best = 0;
    for (const auto& pt : boundary(build_region(p), 20001)) {
      best = std::max(best, pt.lambda1 + pt.lambda2);
    }
    // Include the corners themselves: a segment region samples them only in the limit.
    best = std::max({best, p.p_1_1, p.p_2_2});
    CHECK(agg.value == doctest::Approx(best).epsilon(1e-3));
    CHECK(saturated_aggregate(p) == p.p_1_12 + p.p_2_12);
    CHECK(saturated_aggregate(p) <= agg.value);
  }
}

TEST_CASE("aggregate ties keep the earliest corner") {
  CHECK(max_aggregate({0.5, 0.5, 0.25, 0.25}).corner == Corner::kUser2Solo);
  CHECK(max_aggregate({0.5, 0.4, 0.25, 0.25}).corner == Corner::kJoint);
  CHECK(max_aggregate({0.6, 0.4, 0.25, 0.25}).corner == Corner::kUser1Solo);
  CHECK(max_aggregate(kSdFixed).corner == Corner::kJoint);
  CHECK(max_aggregate(kTinFixed).corner == Corner::kUser1Solo);
  CHECK(parse_corner(to_string(Corner::kJoint)) == Corner::kJoint);
}

TEST_CASE("ray exit agrees with the sampled frontier") {
  const auto r = build_region(kTinFixed);
  for (double theta = 0.05; theta < 1.55; theta += 0.1) {
    const double u1 = std::cos(theta), u2 = std::sin(theta);
    const double t = *ray_exit(r, u1, u2);
    const double x = t * u1;
    CHECK(*frontier_height(r, x) == doctest::Approx(t * u2).epsilon(1e-9));
    CHECK(contains(r, {x * (1 - 1e-9), t * u2 * (1 - 1e-9)}));
    CHECK_FALSE(contains(r, {x * (1 + 1e-9), t * u2 * (1 + 1e-9)}));
  }
  CHECK(*ray_exit(r, 1, 0) == doctest::Approx(kTinFixed.p_1_1));
  CHECK(*ray_exit(r, 0, 1) == doctest::Approx(kTinFixed.p_2_2));
  CHECK_THROWS_AS(ray_exit(r, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(ray_exit(r, -1, 1), InvalidArgument);
}

TEST_CASE("closure over power splits") {
  SystemConfig base;
  base.power_policy = PowerPolicy::kQueueAdaptive;
  const auto entries = closure(base, 201);
  REQUIRE(entries.size() == 201);
  CHECK(entries.front().p1 == 0.0);
  CHECK(entries.back().p1 == 200.0);
  // Every member region is inside the union and the envelope dominates each frontier.
  const auto env = closure_envelope(entries, 256);
  for (const auto& e : entries) {
    for (const auto& pt : boundary(e.region, 64)) {
      CHECK(closure_contains(entries, pt, 1e-12));
    }
  }
  for (const auto& pt : env) {
    const auto h = closure_frontier_height(base, pt.lambda1);
    REQUIRE(h);
    CHECK(*h >= pt.lambda2 - 1e-12);
    CHECK(*h <= pt.lambda2 + 5e-3);
  }
  CHECK_FALSE(closure_contains(entries, {0.8, 0.0}, 0.0));
  CHECK(closure_contains(entries, {0.7, 0.0}, 0.0));
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(boundary(build_region(kTinFixed), 1), InvalidArgument);
  CHECK_THROWS_AS(contains(build_region(kTinFixed), {-0.1, 0.1}), InvalidArgument);
  CHECK_THROWS_AS(contains(build_region(kTinFixed), {std::nan(""), 0.1}), InvalidArgument);
  CHECK_THROWS_AS(closure(SystemConfig{}, 1), InvalidArgument);
}

}  // TEST_SUITE
