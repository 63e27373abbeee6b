#include "qsv/statistics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qsv/errors.hpp"

namespace qsv {

namespace {

void check_probability(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in (0, 1)");
  }
}

void check_lambda2(double lambda2) {
  if (!(lambda2 >= 0.0 && lambda2 < 1.0)) {
    throw std::domain_error("lambda2 must lie in [0, 1)");
  }
}

/// kl_divergence extended to y <= 0 (the epsilon -> 1 limit of a lambda2 = 0
/// strategy), where the divergence from any x > 0 is infinite.
double divergence_to_threshold(double x, double y) {
  if (y <= 0.0) {
    return x > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return kl_divergence(x, y);
}

}  // namespace

double kl_divergence(double x, double y) {
  if (!(y > 0.0 && y < 1.0)) {
    throw std::domain_error("kl_divergence: y must lie strictly in (0, 1)");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("kl_divergence: x must lie in [0, 1]");
  }
  double d = 0.0;
  if (x > 0.0) d += x * std::log(x / y);
  if (x < 1.0) d += (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
  return d;
}

double confidence_bound(std::size_t n, std::size_t m, double lambda2,
                        double epsilon) {
  if (n == 0 || m > n) {
    throw std::domain_error("confidence_bound: need 0 < n and m <= n");
  }
  check_lambda2(lambda2);
  check_probability(epsilon, "epsilon");
  const double x = static_cast<double>(m) / static_cast<double>(n);
  const double threshold = 1.0 - (1.0 - lambda2) * epsilon;
  if (x < threshold) {
    throw NoClaimError(
        "confidence_bound: accept frequency is below the threshold "
        "1-(1-lambda2)epsilon; the record supports no claim at this epsilon");
  }
  return std::exp(-kl_divergence(x, threshold) * static_cast<double>(n));
}

double infidelity_at_confidence(std::size_t n, std::size_t m, double delta,
                                double lambda2) {
  if (n == 0 || m > n) {
    throw std::domain_error(
        "infidelity_at_confidence: need 0 < n and m <= n");
  }
  check_lambda2(lambda2);
  check_probability(delta, "delta");

  const double x = static_cast<double>(m) / static_cast<double>(n);
  const double target = std::log(1.0 / delta) / static_cast<double>(n);
  // Validity boundary: epsilon where the threshold meets the observed
  // frequency. D = 0 there, and D grows monotonically with epsilon beyond
  // it, so [boundary, 1] brackets the root whenever one exists.
  const double eps_boundary = (1.0 - x) / (1.0 - lambda2);
  if (eps_boundary >= 1.0) {
    throw NoClaimError(
        "infidelity_at_confidence: accept frequency stays below the claim "
        "threshold for every epsilon < 1");
  }
  if (divergence_to_threshold(x, lambda2) <= target) {
    // Even the weakest admissible claim (epsilon -> 1) lacks the required
    // divergence at this n.
    throw NoClaimError(
        "infidelity_at_confidence: record cannot reach confidence 1-delta "
        "for any epsilon < 1");
  }
  double lo = eps_boundary;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double d = divergence_to_threshold(
        x, 1.0 - (1.0 - lambda2) * mid);
    (d >= target ? hi : lo) = mid;
  }
  return hi;
}

SampleComplexity required_measurements(double epsilon, double delta,
                                       double lambda2) {
  check_probability(epsilon, "epsilon");
  check_probability(delta, "delta");
  check_lambda2(lambda2);
  SampleComplexity out;
  out.exact = std::log(delta) / std::log1p(-(1.0 - lambda2) * epsilon);
  out.minimum = static_cast<std::uint64_t>(std::ceil(out.exact));
  out.asymptotic = std::log(1.0 / delta) / ((1.0 - lambda2) * epsilon);
  return out;
}

SampleComplexity global_bound(double epsilon, double delta) {
  return required_measurements(epsilon, delta, 0.0);
}

std::vector<CurvePoint> inverse_infidelity_curve(double lambda2, double delta,
                                                 std::size_t n_max) {
  check_lambda2(lambda2);
  check_probability(delta, "delta");
  std::vector<CurvePoint> points;
  points.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    // All-accept closed form: D(1||y) = -ln y gives y = delta^(1/n).
    const double eps = (1.0 - std::pow(delta, 1.0 / static_cast<double>(n))) /
                       (1.0 - lambda2);
    if (eps < 1.0) points.push_back({n, 1.0 / eps});
  }
  return points;
}

std::vector<CurvePoint> inverse_infidelity_curve(
    std::span<const std::uint8_t> bits, double lambda2, double delta) {
  std::vector<CurvePoint> points;
  points.reserve(bits.size());
  std::size_t accepts = 0;
  for (std::size_t n = 1; n <= bits.size(); ++n) {
    if (bits[n - 1]) ++accepts;
    try {
      const double eps = infidelity_at_confidence(n, accepts, delta, lambda2);
      points.push_back({n, 1.0 / eps});
    } catch (const NoClaimError&) {
      // omitted, not clamped
    }
  }
  return points;
}

double fit_slope(std::span<const CurvePoint> points) {
  if (points.size() < 2) {
    throw std::invalid_argument("fit_slope: need at least two points");
  }
  double mean_n = 0.0;
  double mean_y = 0.0;
  for (const auto& p : points) {
    mean_n += static_cast<double>(p.n);
    mean_y += p.inv_epsilon;
  }
  mean_n /= static_cast<double>(points.size());
  mean_y /= static_cast<double>(points.size());
  double cov = 0.0;
  double var = 0.0;
  for (const auto& p : points) {
    const double dn = static_cast<double>(p.n) - mean_n;
    cov += dn * (p.inv_epsilon - mean_y);
    var += dn * dn;
  }
  if (var == 0.0) {
    throw std::invalid_argument("fit_slope: degenerate abscissae");
  }
  return cov / var;
}

double asymptotic_slope(double lambda2, double delta) {
  check_lambda2(lambda2);
  check_probability(delta, "delta");
  return (1.0 - lambda2) / std::log(1.0 / delta);
}

VerificationVerdict make_verdict(std::size_t n, std::size_t m, double delta,
                                 double lambda2) {
  VerificationVerdict verdict;
  verdict.n = n;
  verdict.m = m;
  verdict.delta = delta;
  try {
    verdict.epsilon = infidelity_at_confidence(n, m, delta, lambda2);
  } catch (const NoClaimError&) {
    verdict.epsilon.reset();
  }
  return verdict;
}

}  // namespace qsv
