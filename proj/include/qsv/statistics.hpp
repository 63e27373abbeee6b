#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qsv {

/// Binary relative entropy D(x||y) = x ln(x/y) + (1-x) ln((1-x)/(1-y)).
/// Natural logarithm throughout; x in [0,1] with the 0 ln 0 := 0 limits,
/// y strictly interior (throws std::domain_error otherwise).
double kl_divergence(double x, double y);

/// Upper bound on the error probability delta after observing m accepts in
/// n rounds: exp(-n D(m/n || 1 - (1-lambda2) epsilon)).
/// Throws NoClaimError when m/n < 1 - (1-lambda2) epsilon, where the bound
/// says nothing. At equality the bound is the vacuous 1.
double confidence_bound(std::size_t n, std::size_t m, double lambda2,
                        double epsilon);

/// Smallest epsilon for which the observed record certifies
/// "fidelity >= 1 - epsilon with confidence 1 - delta": the root of
/// D(m/n || 1-(1-lambda2) eps) = ln(1/delta)/n on the branch where the
/// accept frequency exceeds the threshold, found by bisection to 1e-12.
/// Claims require epsilon < 1; throws NoClaimError when the record supports
/// none.
double infidelity_at_confidence(std::size_t n, std::size_t m, double delta,
                                double lambda2);

/// Measurement count n = ln(delta) / ln(1 - (1-lambda2) epsilon), reported
/// both exactly and in the small-epsilon asymptotic form
/// ln(1/delta) / ((1-lambda2) epsilon). Figures use the real value; the
/// ceiling is what a verifier would schedule.
struct SampleComplexity {
  double exact = 0.0;
  std::uint64_t minimum = 0;  ///< ceil(exact)
  double asymptotic = 0.0;
};

SampleComplexity required_measurements(double epsilon, double delta,
                                       double lambda2);

/// The lambda2 = 0 case: the globally optimal bound ln(1/delta)/epsilon.
SampleComplexity global_bound(double epsilon, double delta);

struct CurvePoint {
  std::size_t n = 0;
  double inv_epsilon = 0.0;
};

/// Ideal-state curve: the all-accept verdict 1/epsilon for n = 1..n_max.
/// Prefixes supporting no claim (epsilon >= 1) are omitted, not clamped.
std::vector<CurvePoint> inverse_infidelity_curve(double lambda2, double delta,
                                                 std::size_t n_max);

/// Recorded-trial curve: a verdict per prefix length from the cumulative
/// accept counts; no-claim prefixes are omitted.
std::vector<CurvePoint> inverse_infidelity_curve(
    std::span<const std::uint8_t> bits, double lambda2, double delta);

/// Ordinary least-squares slope of inv_epsilon against n (intercept is a
/// free parameter). Throws std::invalid_argument on fewer than two points
/// or degenerate abscissae.
double fit_slope(std::span<const CurvePoint> points);

/// Slope of the n -> theory line (1-lambda2)/ln(1/delta) the ideal curve
/// approaches from below.
double asymptotic_slope(double lambda2, double delta);

/// The statement "fidelity >= 1 - epsilon with confidence 1 - delta", or an
/// explicit no-claim when the record supports none.
struct VerificationVerdict {
  std::size_t n = 0;
  std::size_t m = 0;
  double delta = 0.0;
  std::optional<double> epsilon;  ///< empty on no-claim

  double accept_frequency() const {
    return n == 0 ? 0.0 : static_cast<double>(m) / static_cast<double>(n);
  }
  bool has_claim() const { return epsilon.has_value(); }
};

VerificationVerdict make_verdict(std::size_t n, std::size_t m, double delta,
                                 double lambda2);

}  // namespace qsv
