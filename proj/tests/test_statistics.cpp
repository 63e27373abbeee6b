#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "qsv/errors.hpp"
#include "qsv/rng.hpp"
#include "qsv/statistics.hpp"

using namespace qsv;
using Catch::Matchers::WithinAbs;

namespace {

/// Independent inversion oracle: walk a fine epsilon grid and return the
/// first value whose bound reaches delta. Deliberately avoids the bisection
/// code path it cross-checks.
double grid_inversion(std::size_t n, std::size_t m, double delta,
                      double lambda2, double step = 1e-7) {
  const double x = static_cast<double>(m) / static_cast<double>(n);
  const double target = std::log(1.0 / delta) / static_cast<double>(n);
  for (double eps = step; eps < 1.0; eps += step) {
    const double y = 1.0 - (1.0 - lambda2) * eps;
    if (y >= x || y <= 0.0) continue;
    if (kl_divergence(x, y) >= target) return eps;
  }
  return std::nan("");
}

}  // namespace

TEST_CASE("kl divergence values") {
  REQUIRE(kl_divergence(0.3, 0.3) == 0.0);
  REQUIRE_THAT(kl_divergence(1.0, 0.5), WithinAbs(std::log(2.0), 1e-12));
  // frozen from a 40-digit evaluation of x ln(x/y) + (1-x) ln((1-x)/(1-y))
  REQUIRE_THAT(kl_divergence(0.99, 0.9621), WithinAbs(0.0149770220929, 1e-10));
  REQUIRE_THAT(kl_divergence(0.0, 0.25),
               WithinAbs(std::log(1.0 / 0.75), 1e-12));
}

TEST_CASE("kl divergence domain") {
  REQUIRE_THROWS_AS(kl_divergence(0.5, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(kl_divergence(0.5, 1.0), std::domain_error);
  REQUIRE_THROWS_AS(kl_divergence(-0.1, 0.5), std::domain_error);
}

TEST_CASE("kl divergence is positive definite and grows away from x") {
  for (double x : {0.1, 0.5, 0.9, 1.0}) {
    double previous = 0.0;
    for (double gap = 0.01; gap < 0.09; gap += 0.01) {
      const double y = x - gap;
      if (y <= 0.0) break;
      const double d = kl_divergence(x, y);
      REQUIRE(d > previous);  // monotone in the gap, and > 0
      previous = d;
    }
  }
}

TEST_CASE("confidence bound") {
  // m = n collapses to the all-accept power law.
  const double direct = std::pow(1.0 - (1.0 - 0.3) * 0.02, 50);
  REQUIRE_THAT(confidence_bound(50, 50, 0.3, 0.02),
               WithinAbs(direct, 1e-12));

  REQUIRE_THAT(confidence_bound(200, 200, 1.0 / 3.0, 0.0223005588469),
               WithinAbs(0.05, 1e-9));

  // Frequency exactly at the threshold: the vacuous bound 1.
  REQUIRE_THAT(confidence_bound(100, 80, 0.0, 0.2), WithinAbs(1.0, 1e-12));

  REQUIRE_THROWS_AS(confidence_bound(100, 50, 0.0, 0.2), NoClaimError);
}

TEST_CASE("infidelity at confidence: frozen cases") {
  REQUIRE_THAT(infidelity_at_confidence(200, 200, 0.05, 1.0 / 3.0),
               WithinAbs(0.0223005588469, 1e-9));
  REQUIRE_THAT(infidelity_at_confidence(200, 198, 0.05, 1.0 / 3.0),
               WithinAbs(0.0568532136116, 1e-9));
  // A heavily rejected record still supports a weak claim once n is large
  // enough for the divergence to reach ln(1/delta)/n below epsilon = 1.
  REQUIRE_THAT(infidelity_at_confidence(200, 100, 0.05, 1.0 / 3.0),
               WithinAbs(0.878845218786, 1e-9));
  // ... but not at small n.
  REQUIRE_THROWS_AS(infidelity_at_confidence(10, 5, 0.05, 1.0 / 3.0),
                    NoClaimError);
  REQUIRE_THROWS_AS(infidelity_at_confidence(200, 0, 0.05, 1.0 / 3.0),
                    NoClaimError);
}

TEST_CASE("infidelity at confidence matches the grid oracle") {
  for (auto [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{
           {200, 198}, {100, 97}, {500, 490}}) {
    const double oracle = grid_inversion(n, m, 0.05, 1.0 / 3.0);
    REQUIRE_THAT(infidelity_at_confidence(n, m, 0.05, 1.0 / 3.0),
                 WithinAbs(oracle, 1e-6));
  }
}

TEST_CASE("all-accept case matches the closed form") {
  for (std::size_t n : {1ul, 5ul, 50ul, 200ul, 1000ul}) {
    for (double lambda2 : {0.0, 1.0 / 3.0, 0.589}) {
      const double closed =
          (1.0 - std::pow(0.05, 1.0 / static_cast<double>(n))) /
          (1.0 - lambda2);
      if (closed >= 1.0) {
        REQUIRE_THROWS_AS(infidelity_at_confidence(n, n, 0.05, lambda2),
                          NoClaimError);
      } else {
        REQUIRE_THAT(infidelity_at_confidence(n, n, 0.05, lambda2),
                     WithinAbs(closed, 1e-10));
      }
    }
  }
}

TEST_CASE("round trip over a randomized sweep") {
  SplitMix64 rng(77);
  std::size_t claims = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 999);
    const std::size_t rejects =
        static_cast<std::size_t>(rng.uniform() * (0.05 * n));
    const std::size_t m = n - std::min(n, rejects);
    const double delta = 0.001 + 0.5 * rng.uniform();
    const double lambda2 = 0.95 * rng.uniform();
    try {
      const double eps = infidelity_at_confidence(n, m, delta, lambda2);
      REQUIRE_THAT(confidence_bound(n, m, lambda2, eps),
                   WithinAbs(delta, 1e-9));
      ++claims;
    } catch (const NoClaimError&) {
    }
  }
  REQUIRE(claims > 500);
}

TEST_CASE("epsilon shrinks with more accepts and more data") {
  double previous = 1.0;
  for (std::size_t m = 190; m <= 200; ++m) {
    const double eps = infidelity_at_confidence(200, m, 0.05, 1.0 / 3.0);
    REQUIRE(eps < previous);
    previous = eps;
  }
  // fixed accept frequency 0.95, growing n
  previous = 1.0;
  for (std::size_t n : {100ul, 200ul, 400ul, 800ul}) {
    const double eps =
        infidelity_at_confidence(n, n - n / 20, 0.05, 1.0 / 3.0);
    REQUIRE(eps <= previous);
    previous = eps;
  }
}

TEST_CASE("required measurements") {
  const SampleComplexity global = required_measurements(0.01, 0.05, 0.0);
  REQUIRE_THAT(global.exact, WithinAbs(298.0728522, 1e-6));
  REQUIRE(global.minimum == 299);
  REQUIRE_THAT(global.asymptotic, WithinAbs(299.5732274, 1e-6));

  const SampleComplexity bi = required_measurements(0.01, 0.05, 1.0 / 3.0);
  REQUIRE_THAT(bi.exact, WithinAbs(447.860305, 1e-5));
  REQUIRE(bi.minimum == 448);

  const SampleComplexity uni = required_measurements(0.01, 0.05, 3.0 / 7.0);
  REQUIRE_THAT(uni.exact, WithinAbs(522.7538511, 1e-5));
  REQUIRE(uni.minimum == 523);
  REQUIRE_THAT(uni.asymptotic, WithinAbs(524.2531479, 1e-5));
}

TEST_CASE("global bound") {
  REQUIRE_THAT(global_bound(0.01, 0.05).asymptotic,
               WithinAbs(299.5732274, 1e-6));
  REQUIRE_THAT(global_bound(0.1, 0.05).asymptotic,
               WithinAbs(29.95732274, 1e-7));
  REQUIRE_THAT(global_bound(0.5, std::exp(-1.0)).asymptotic,
               WithinAbs(2.0, 1e-12));
}

TEST_CASE("exact and asymptotic counts converge as epsilon shrinks") {
  const SampleComplexity tiny = required_measurements(1e-6, 0.05, 0.3);
  REQUIRE_THAT(tiny.exact / tiny.asymptotic, WithinAbs(1.0, 1e-4));
}

TEST_CASE("ideal inverse infidelity curve") {
  const auto bi = inverse_infidelity_curve(1.0 / 3.0, 0.05, 200);
  // n = 1, 2 support no claim for lambda2 = 1/3; the curve starts at 3.
  REQUIRE(bi.front().n == 3);
  REQUIRE(bi.back().n == 200);
  REQUIRE_THAT(bi.back().inv_epsilon, WithinAbs(1.0 / 0.0223005588469, 1e-6));

  const auto global = inverse_infidelity_curve(0.0, 0.05, 10);
  REQUIRE(global.front().n == 1);
  REQUIRE_THAT(global.front().inv_epsilon, WithinAbs(1.0 / 0.95, 1e-12));
}

TEST_CASE("record curve matches the ideal curve on an all-accept record") {
  const std::vector<std::uint8_t> bits(50, 1);
  const auto from_record = inverse_infidelity_curve(bits, 1.0 / 3.0, 0.05);
  const auto ideal = inverse_infidelity_curve(1.0 / 3.0, 0.05, 50);
  REQUIRE(from_record.size() == ideal.size());
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    REQUIRE(from_record[i].n == ideal[i].n);
    REQUIRE_THAT(from_record[i].inv_epsilon,
                 WithinAbs(ideal[i].inv_epsilon, 1e-9));
  }
}

TEST_CASE("record curve omits no-claim prefixes") {
  // Reject everything early: no prefix ever supports a claim.
  const std::vector<std::uint8_t> rejected(20, 0);
  REQUIRE(inverse_infidelity_curve(rejected, 1.0 / 3.0, 0.05).empty());
}

TEST_CASE("fit slope") {
  std::vector<CurvePoint> exact;
  for (std::size_t n = 1; n <= 30; ++n) {
    exact.push_back({n, 0.2225 * static_cast<double>(n)});
  }
  REQUIRE_THAT(fit_slope(exact), WithinAbs(0.2225, 1e-12));

  REQUIRE_THROWS_AS(fit_slope(std::vector<CurvePoint>{{1, 1.0}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      fit_slope(std::vector<CurvePoint>{{3, 1.0}, {3, 2.0}}),
      std::invalid_argument);
}

TEST_CASE("first-25 fitted slopes of the ideal curves") {
  const double lambda_lo = 0.5889869382012379;
  const auto lo = inverse_infidelity_curve(lambda_lo, 0.05, 25);
  const auto uni = inverse_infidelity_curve(3.0 / 7.0, 0.05, 25);
  const auto bi = inverse_infidelity_curve(1.0 / 3.0, 0.05, 25);
  REQUIRE_THAT(fit_slope(lo), WithinAbs(0.136622341, 1e-6));
  REQUIRE_THAT(fit_slope(uni), WithinAbs(0.189668174, 1e-6));
  REQUIRE_THAT(fit_slope(bi), WithinAbs(0.221006277, 1e-6));
}

TEST_CASE("asymptotic slopes") {
  REQUIRE_THAT(asymptotic_slope(0.5889869382012379, 0.05),
               WithinAbs(0.1371995306, 1e-9));
  REQUIRE_THAT(asymptotic_slope(3.0 / 7.0, 0.05),
               WithinAbs(0.1907475433, 1e-9));
  REQUIRE_THAT(asymptotic_slope(1.0 / 3.0, 0.05),
               WithinAbs(0.2225388005, 1e-9));
}

TEST_CASE("ideal curve slope approaches the asymptotic slope") {
  const auto tail = inverse_infidelity_curve(1.0 / 3.0, 0.05, 1000);
  std::vector<CurvePoint> window(tail.end() - 500, tail.end());
  REQUIRE_THAT(fit_slope(window),
               WithinAbs(asymptotic_slope(1.0 / 3.0, 0.05), 1e-3));
}

TEST_CASE("verdicts") {
  const VerificationVerdict claim = make_verdict(200, 200, 0.05, 1.0 / 3.0);
  REQUIRE(claim.has_claim());
  REQUIRE_THAT(*claim.epsilon, WithinAbs(0.0223005588469, 1e-9));
  REQUIRE_THAT(claim.accept_frequency(), WithinAbs(1.0, 1e-15));

  const VerificationVerdict none = make_verdict(10, 5, 0.05, 1.0 / 3.0);
  REQUIRE_FALSE(none.has_claim());
}
