#include <cmath>
#include <random>

#include <doctest.h>

#include "bcstab/channel_model.h"

using namespace bcstab;

namespace {

SystemConfig make(double g1, double g2, double p1, double p2, Scheme scheme,
                  PowerPolicy policy) {
  SystemConfig c;
  c.gamma1 = g1;
  c.gamma2 = g2;
  c.p1 = p1;
  c.p2 = p2;
  c.p_total = p1 + p2;
  c.scheme = scheme;
  c.power_policy = policy;
  return c;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

// Direct transcription of the outage formulas, kept separate from the library.
double oracle_solo(double g, double d, double a, double p) {
  return p > 0 ? std::exp(-g * std::pow(d, a) / p) : 0.0;
}

double oracle_tin(double g, double d, double a, double own, double other) {
  return own > g * other ? std::exp(-g * std::pow(d, a) / (own - g * other)) : 0.0;
}

double oracle_sd(const SystemConfig& c) {
  const double d1a = std::pow(c.d1, c.alpha);
  if (c.p2 <= c.gamma2 * c.p1) return 0.0;
  if (c.p2 <= c.p1 * c.gamma2 * (1 + c.gamma1) / c.gamma1) {
    return std::exp(-c.gamma2 * d1a / (c.p2 - c.gamma2 * c.p1));
  }
  return std::exp(-c.gamma1 * d1a / c.p1);
}

}  // namespace

TEST_SUITE("channel_model") {

TEST_CASE("solo probabilities reproduce the fixed and full-power table") {
  struct Row {
    double g1, g2;
    PowerPolicy policy;
    double want1, want2;
  };
  const Row rows[] = {{0.5, 0.4, PowerPolicy::kFixed, 0.5353, 0.5203},
                      {0.5, 0.4, PowerPolicy::kQueueAdaptive, 0.7788, 0.6757},
                      {1.2, 0.7, PowerPolicy::kFixed, 0.2231, 0.3188},
                      {1.2, 0.7, PowerPolicy::kQueueAdaptive, 0.5488, 0.5036}};
  for (const auto& r : rows) {
    const auto c = make(r.g1, r.g2, 80, 120, Scheme::kTin, r.policy);
    CHECK(round4(success_solo(c, User::k1)) == doctest::Approx(r.want1).epsilon(1e-12));
    CHECK(round4(success_solo(c, User::k2)) == doctest::Approx(r.want2).epsilon(1e-12));
  }
}

TEST_CASE("joint probabilities reproduce the superposition table") {
  const auto tin_a = make(0.5, 0.4, 80, 120, Scheme::kTin, PowerPolicy::kFixed);
  const auto sd_a = make(0.5, 0.4, 80, 120, Scheme::kSd, PowerPolicy::kFixed);
  const auto tin_b = make(1.2, 0.7, 80, 120, Scheme::kTin, PowerPolicy::kFixed);
  const auto sd_b = make(1.2, 0.7, 80, 120, Scheme::kSd, PowerPolicy::kFixed);
  CHECK(round4(success_joint_tin(tin_a, User::k1)) == doctest::Approx(0.0821));
  CHECK(round4(success_joint_tin(tin_a, User::k2)) == doctest::Approx(0.4103));
  CHECK(round4(success_joint_sd(sd_a)) == doctest::Approx(0.5353));
  CHECK(round4(success_profile(sd_a).p_2_12) == doctest::Approx(0.4103));
  CHECK(success_joint_tin(tin_b, User::k1) == 0.0);
  CHECK(round4(success_joint_tin(tin_b, User::k2)) == doctest::Approx(0.1172));
  CHECK(round4(success_joint_sd(sd_b)) == doctest::Approx(0.2231));
  CHECK(round4(success_profile(sd_b).p_2_12) == doctest::Approx(0.1172));
}

TEST_CASE("profile assembly for full-power successive decoding") {
  const auto c = make(1.2, 0.7, 80, 120, Scheme::kSd, PowerPolicy::kQueueAdaptive);
  const auto p = success_profile(c);
  CHECK(round4(p.p_1_1) == doctest::Approx(0.5488));
  CHECK(round4(p.p_2_2) == doctest::Approx(0.5036));
  CHECK(round4(p.p_1_12) == doctest::Approx(0.2231));
  CHECK(round4(p.p_2_12) == doctest::Approx(0.1172));
}

TEST_CASE("limits of the outage formula") {
  CHECK(outage_free_probability(0.5, 10, 2, 0.0) == 0.0);
  CHECK(outage_free_probability(3.0, 50, 4, 1e300) == doctest::Approx(1.0));
  CHECK_THROWS_AS(outage_free_probability(0.5, 10, 2, -1.0), InvalidArgument);
}

TEST_CASE("interference-as-noise indicator is strict") {
  auto c = make(0.5, 0.4, 100, 40, Scheme::kTin, PowerPolicy::kFixed);
  CHECK(success_joint_tin(c, User::k2) == 0.0);  // 40 == 0.4 * 100
  c = make(0.5, 0.4, 100, 41, Scheme::kTin, PowerPolicy::kFixed);
  CHECK(success_joint_tin(c, User::k2) > 0.0);
  c = make(0.5, 0.4, 50, 100, Scheme::kTin, PowerPolicy::kFixed);
  CHECK(success_joint_tin(c, User::k1) == 0.0);  // 50 == 0.5 * 100
  c = make(0.5, 0.4, 51, 100, Scheme::kTin, PowerPolicy::kFixed);
  CHECK(success_joint_tin(c, User::k1) > 0.0);
}

TEST_CASE("feasibility indicator survives underflow of the probability") {
  // Margin 0.05 leaves exp(-1000), which is zero in double precision.
  auto c = make(1.0, 0.5, 100.05, 100.0, Scheme::kTin, PowerPolicy::kFixed);
  CHECK(tin_joint_feasible(c, User::k1));
  CHECK(success_joint_tin(c, User::k1) == 0.0);
  c = make(1.0, 0.5, 100.0, 100.0, Scheme::kTin, PowerPolicy::kFixed);
  CHECK_FALSE(tin_joint_feasible(c, User::k1));
  CHECK(tin_joint_feasible(c, User::k2));
}

TEST_CASE("successive decoding branches") {
  CHECK(success_joint_sd(make(0.5, 0.4, 150, 50, Scheme::kSd, PowerPolicy::kFixed)) == 0.0);
  // Branch 2 strictly between the two knots.
  const auto mid = make(0.5, 0.4, 80, 60, Scheme::kSd, PowerPolicy::kFixed);
  CHECK(success_joint_sd(mid) == doctest::Approx(std::exp(-0.4 * 100 / (60 - 32))));
  CHECK(sd_interference_free_threshold(make(0.5, 0.4, 80, 120, Scheme::kSd,
                                            PowerPolicy::kFixed)) == doctest::Approx(96.0));
  CHECK_THROWS_AS(success_joint_sd(make(0.5, 0.4, 80, 120, Scheme::kTin, PowerPolicy::kFixed)),
                  InvalidArgument);
}

TEST_CASE("successive decoding is continuous at the interference-free knot") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> g(0.05, 3.0), p(1.0, 300.0);
  for (int i = 0; i < 1000; ++i) {
    auto c = make(g(rng), g(rng), p(rng), 1.0, Scheme::kSd, PowerPolicy::kFixed);
    const double knot = sd_interference_free_threshold(c);
    c.p2 = knot;
    c.p_total = c.p1 + c.p2;
    const double at = success_joint_sd(c);
    c.p2 = std::nextafter(knot, 2 * knot);
    c.p_total = c.p1 + c.p2;
    const double above = success_joint_sd(c);
    CHECK(std::abs(at - above) < 1e-12);
  }
}

TEST_CASE("library matches an independent transcription on random configs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> g(0.05, 3.0), d(1.0, 30.0), a(1.5, 4.0),
      total(1.0, 1000.0), frac(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    SystemConfig c;
    c.gamma1 = g(rng);
    c.gamma2 = g(rng);
    c.d1 = d(rng);
    c.d2 = d(rng);
    c.alpha = a(rng);
    c.p_total = total(rng);
    c = c.with_split(c.p_total * frac(rng));
    c.scheme = i % 2 ? Scheme::kSd : Scheme::kTin;
    c.power_policy = i % 3 ? PowerPolicy::kFixed : PowerPolicy::kQueueAdaptive;
    const bool pc = c.power_policy == PowerPolicy::kQueueAdaptive;
    const auto got = success_profile(c);
    CHECK(got.p_1_1 == doctest::Approx(oracle_solo(c.gamma1, c.d1, c.alpha,
                                                   pc ? c.p_total : c.p1)).epsilon(1e-12));
    CHECK(got.p_2_2 == doctest::Approx(oracle_solo(c.gamma2, c.d2, c.alpha,
                                                   pc ? c.p_total : c.p2)).epsilon(1e-12));
    CHECK(got.p_2_12 ==
          doctest::Approx(oracle_tin(c.gamma2, c.d2, c.alpha, c.p2, c.p1)).epsilon(1e-12));
    const double j1 = c.scheme == Scheme::kSd ? oracle_sd(c)
                                              : oracle_tin(c.gamma1, c.d1, c.alpha, c.p1, c.p2);
    CHECK(got.p_1_12 == doctest::Approx(std::min(j1, got.p_1_1)).epsilon(1e-12));
    // Profile invariants.
    CHECK(got.p_1_12 <= got.p_1_1);
    CHECK(got.p_2_12 <= got.p_2_2);
    for (double v : {got.p_1_1, got.p_2_2, got.p_1_12, got.p_2_12}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("variable-power joint success equals the budget-form expression") {
  // With p1 = P - p2 the interference margin p2 - g2 p1 equals (1 + g2) p2 - g2 P.
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    SystemConfig c;
    c.power_policy = PowerPolicy::kQueueAdaptive;
    c = c.with_split(c.p_total * frac(rng));
    const double margin = (1 + c.gamma2) * c.p2 - c.gamma2 * c.p_total;
    const double want = margin > 0 ? std::exp(-c.gamma2 * 196.0 / margin) : 0.0;
    CHECK(success_joint_tin(c, User::k2) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("monotonicity in power, threshold and distance") {
  SystemConfig c;
  double prev = -1.0;
  for (double p = 1; p < 1e4; p *= 1.5) {
    const double v = outage_free_probability(c.gamma1, c.d1, c.alpha, p);
    CHECK(v > prev);
    prev = v;
  }
  prev = 2.0;
  for (double g = 0.01; g < 10; g *= 1.5) {
    const double v = outage_free_probability(g, c.d1, c.alpha, 80);
    CHECK(v < prev);
    prev = v;
  }
  prev = 2.0;
  for (double d = 0.5; d < 40; d *= 1.3) {
    const double v = outage_free_probability(0.5, d, 2, 80);
    CHECK(v < prev);
    prev = v;
  }
  // More of the budget on user 2 never hurts user 2 under TIN.
  prev = -1.0;
  for (int k = 0; k <= 200; ++k) {
    const double v = success_joint_tin(c.with_split(200.0 - k), User::k2);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("Monte Carlo channel draws agree with the closed forms") {
  // Independent oracle: draw exponential gains and evaluate the SINR events.
  std::mt19937_64 rng(2024);
  std::exponential_distribution<double> expo(1.0);
  const int n = 400000;
  for (const auto& [g1, g2] : {std::pair{0.5, 0.4}, std::pair{1.2, 0.7}}) {
    for (Scheme scheme : {Scheme::kTin, Scheme::kSd}) {
      for (PowerPolicy policy : {PowerPolicy::kFixed, PowerPolicy::kQueueAdaptive}) {
        const auto c = make(g1, g2, 80, 120, scheme, policy);
        const double pe1 = policy == PowerPolicy::kFixed ? c.p1 : c.p_total;
        const double pe2 = policy == PowerPolicy::kFixed ? c.p2 : c.p_total;
        const double l1 = std::pow(c.d1, -c.alpha), l2 = std::pow(c.d2, -c.alpha);
        int s11 = 0, s22 = 0, s112 = 0, s212 = 0;
        for (int i = 0; i < n; ++i) {
          const double h1 = expo(rng) * l1, h2 = expo(rng) * l2;
          s11 += h1 * pe1 >= g1;
          s22 += h2 * pe2 >= g2;
          s212 += h2 * c.p2 / (h2 * c.p1 + 1) >= g2;
          if (scheme == Scheme::kTin) {
            s112 += h1 * c.p1 / (h1 * c.p2 + 1) >= g1;
          } else {
            s112 += h1 * c.p2 / (h1 * c.p1 + 1) >= g2 && h1 * c.p1 >= g1;
          }
        }
        const auto want = success_profile(c);
        const auto within = [&](int hits, double p) {
          const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
          return std::abs(static_cast<double>(hits) / n - p) <= 3 * se + 1e-12;
        };
        CAPTURE(g1);
        CAPTURE(to_string(scheme));
        CAPTURE(to_string(policy));
        CHECK(within(s11, want.p_1_1));
        CHECK(within(s22, want.p_2_2));
        CHECK(within(s112, want.p_1_12));
        CHECK(within(s212, want.p_2_12));
      }
    }
  }
}

TEST_CASE("validation rejects malformed configs") {
  SystemConfig c;
  CHECK_NOTHROW(validate(c));
  auto bad = c;
  bad.gamma1 = 0;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("gamma1"), InvalidArgument);
  bad = c;
  bad.d2 = std::nan("");
  CHECK_THROWS_AS(validate(bad), InvalidArgument);
  bad = c;
  bad.p2 = 100;
  try {
    validate(bad);
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    CHECK(e.field() == "p1");
  }
  bad = c;
  bad.scheme = Scheme::kSd;
  bad.strong_user = User::k2;
  CHECK_THROWS_AS(validate(bad), InvalidArgument);
  bad.scheme = Scheme::kTin;
  CHECK_NOTHROW(validate(bad));
  CHECK_THROWS_AS(success_solo(SystemConfig{.alpha = -1}, User::k1), InvalidArgument);
}

TEST_CASE("profile validation") {
  CHECK_NOTHROW(validate(SuccessProfile{0.5, 0.5, 0.5, 0.5}));
  CHECK_THROWS_AS(validate(SuccessProfile{0.5, 0.5, 0.6, 0.1}), InvalidArgument);
  CHECK_THROWS_AS(validate(SuccessProfile{1.5, 0.5, 0.1, 0.1}), InvalidArgument);
  CHECK_THROWS_AS(validate(SuccessProfile{0.5, 0.5, -0.1, 0.1}), InvalidArgument);
}

TEST_CASE("interference-as-noise feasibility") {
  CHECK(tin_feasibility(0.5, 0.4));
  CHECK_FALSE(tin_feasibility(1.2, 0.9));
  // At the product-one edge the predicate holds but the open interval
  // gamma1 < p1/p2 < 1/gamma2 is empty, so no split serves both users.
  CHECK(tin_feasibility(2.0, 0.5));
  SystemConfig c;
  c.gamma1 = 2.0;
  c.gamma2 = 0.5;
  for (int k = 0; k <= 1000; ++k) {
    const auto s = c.with_split(200.0 * k / 1000);
    CHECK((success_joint_tin(s, User::k1) == 0.0 || success_joint_tin(s, User::k2) == 0.0));
  }
}

TEST_CASE("string conversions round-trip") {
  for (Scheme s : {Scheme::kTin, Scheme::kSd}) CHECK(parse_scheme(to_string(s)) == s);
  for (PowerPolicy p : {PowerPolicy::kFixed, PowerPolicy::kQueueAdaptive}) {
    CHECK(parse_policy(to_string(p)) == p);
  }
  CHECK(parse_policy("pc") == PowerPolicy::kQueueAdaptive);
  CHECK_THROWS_AS(parse_scheme("noma"), InvalidArgument);
}

}  // TEST_SUITE
