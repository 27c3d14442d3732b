#include "qpwm/photon_source.hpp"

#include <cmath>
#include <stdexcept>

namespace qpwm {

PhotonSourceSpec PhotonSourceSpec::from_rate(double rate_lambda, double t_det) {
  PhotonSourceSpec s;
  s.rate_lambda = rate_lambda;
  s.t_det = t_det;
  s.lambda_t = rate_lambda * t_det;
  validate(s);
  return s;
}

PhotonSourceSpec PhotonSourceSpec::from_mean_count(double lambda_t, double t_det) {
  PhotonSourceSpec s;
  s.t_det = t_det;
  s.lambda_t = lambda_t;
  s.rate_lambda = t_det > 0.0 ? lambda_t / t_det : 0.0;
  validate(s);
  return s;
}

void validate(const PhotonSourceSpec& spec) {
  if (!(spec.rate_lambda >= 0.0))
    throw std::invalid_argument("photon source: rate_lambda must be >= 0");
  if (!(spec.t_det > 0.0))
    throw std::invalid_argument("photon source: t_det must be > 0");
  double expected = spec.rate_lambda * spec.t_det;
  double scale = std::max(std::abs(expected), std::abs(spec.lambda_t));
  if (std::abs(spec.lambda_t - expected) > 1e-12 * std::max(scale, 1e-300))
    throw std::invalid_argument("photon source: lambda_t must equal rate_lambda * t_det");
}

void validate(const DetectorModel& det) {
  if (!(det.gain_g > 0.0))
    throw std::invalid_argument("detector: gain_g must be > 0");
  if (!(det.noise_sigma >= 0.0))
    throw std::invalid_argument("detector: noise_sigma must be >= 0");
}

static void require_nonnegative_mean(double lambda_t) {
  if (!(lambda_t >= 0.0))
    throw std::domain_error("poisson: lambda_t must be >= 0");
}

double poisson_pmf(std::uint64_t n, double lambda_t) {
  require_nonnegative_mean(lambda_t);
  if (lambda_t == 0.0) return n == 0 ? 1.0 : 0.0;
  double dn = static_cast<double>(n);
  double log_p = dn * std::log(lambda_t) - lambda_t - std::lgamma(dn + 1.0);
  return std::exp(log_p);
}

double poisson_cdf(std::uint64_t n, double lambda_t) {
  require_nonnegative_mean(lambda_t);
  if (lambda_t == 0.0) return 1.0;
  // Sum the series with the multiplicative recurrence; underflow at the low
  // end is handled by starting from the log-domain pmf of the first term.
  double term = std::exp(-lambda_t);
  double sum = term;
  for (std::uint64_t k = 1; k <= n; ++k) {
    term *= lambda_t / static_cast<double>(k);
    sum += term;
  }
  return std::min(sum, 1.0);
}

std::uint64_t sample_photon_count(double lambda_t, RandomStream& rng) {
  require_nonnegative_mean(lambda_t);
  if (lambda_t == 0.0) return 0;
  if (lambda_t > 500.0) {
    // Poisson additivity: N(lambda) = N(lambda/2) + N(lambda - lambda/2).
    double half = 0.5 * lambda_t;
    std::uint64_t a = sample_photon_count(half, rng);
    return a + sample_photon_count(lambda_t - half, rng);
  }
  double u = rng.next_unit();
  double p = std::exp(-lambda_t);  // representable: lambda_t <= 500
  double cdf = p;
  std::uint64_t n = 0;
  // The walk ends after O(lambda_t + sqrt(lambda_t)) steps with overwhelming
  // probability; the hard cap only guards against u landing in the last ulp.
  const std::uint64_t cap =
      static_cast<std::uint64_t>(lambda_t + 60.0 * std::sqrt(lambda_t + 1.0) + 60.0);
  while (u > cdf && n < cap) {
    ++n;
    p *= lambda_t / static_cast<double>(n);
    cdf += p;
  }
  return n;
}

std::complex<double> poisson_char_fn(double a, double lambda_t) {
  require_nonnegative_mean(lambda_t);
  double mag = std::exp(lambda_t * (std::cos(a) - 1.0));
  double phase = lambda_t * std::sin(a);
  return std::polar(mag, phase);
}

double detector_voltage(std::uint64_t n, const DetectorModel& det, RandomStream& rng) {
  double v = det.gain_g * static_cast<double>(n);
  if (det.noise_sigma > 0.0) v += det.noise_sigma * rng.next_normal();
  return v;
}

}  // namespace qpwm
