#pragma once

#include <complex>
#include <cstdint>

#include "qpwm/random.hpp"

namespace qpwm {

// Poissonian photon source observed over a fixed detection window.
struct PhotonSourceSpec {
  double rate_lambda = 0.0;  // mean photons per second
  double t_det = 1.0;        // detection window [s]
  double lambda_t = 0.0;     // mean photons per window = rate_lambda * t_det

  static PhotonSourceSpec from_rate(double rate_lambda, double t_det);
  static PhotonSourceSpec from_mean_count(double lambda_t, double t_det);
};

// Photodetector producing a voltage proportional to the photon count, with
// optional additive Gaussian noise on the voltage.
struct DetectorModel {
  double gain_g = 1.0;       // volts per photon
  double noise_sigma = 0.0;  // volts; 0 means noiseless
};

// Throw std::invalid_argument if the struct violates its invariants.
void validate(const PhotonSourceSpec& spec);
void validate(const DetectorModel& det);

// P(N = n) for N ~ Poisson(lambda_t). Evaluated in the log domain, so it is
// stable for n well beyond 1e4. lambda_t < 0 throws std::domain_error.
double poisson_pmf(std::uint64_t n, double lambda_t);

// P(N <= n); direct series sum.
double poisson_cdf(std::uint64_t n, double lambda_t);

// One Poisson draw by CDF inversion (sequential search); consumes exactly one
// uniform for moderate means and splits by Poisson additivity for large ones.
// Deterministic given the stream.
std::uint64_t sample_photon_count(double lambda_t, RandomStream& rng);

// Characteristic function E[e^{j n a}] = e^{lambda_t (cos a - 1)} e^{j lambda_t sin a}.
std::complex<double> poisson_char_fn(double a, double lambda_t);

// Detector output g*n + eps, eps ~ Normal(0, noise_sigma^2). With
// noise_sigma = 0 the result is exactly g*n and the stream is not consumed.
double detector_voltage(std::uint64_t n, const DetectorModel& det, RandomStream& rng);

}  // namespace qpwm
