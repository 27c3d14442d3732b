#include "qpwm/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#ifdef QPWM_HAVE_OPENMP
#include <omp.h>
#endif

namespace qpwm {

int max_threads() noexcept {
#ifdef QPWM_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

ModulationSpec make_spec(double period_t, double duty_d, double amplitude_a, double depth_b,
                         double lambda_t, double sawtooth_amp) {
  ModulationSpec s;
  s.period_t = period_t;
  s.duty_d = duty_d;
  s.amplitude_a = amplitude_a;
  s.depth_b = depth_b;
  s.lambda_t = lambda_t;
  s.sawtooth_amp = sawtooth_amp;
  s.v_ref = duty_d * sawtooth_amp;
  return s;
}

void validate(const ModulationSpec& spec) {
  std::string bad;
  auto complain = [&bad](const char* msg) {
    if (!bad.empty()) bad += "; ";
    bad += msg;
  };
  if (!(spec.period_t > 0.0)) complain("period_t must be > 0");
  if (!(spec.duty_d > 0.0 && spec.duty_d < 1.0)) complain("duty_d must be in (0,1)");
  if (!(spec.amplitude_a > 0.0)) complain("amplitude_a must be > 0");
  if (!(spec.depth_b >= 0.0)) complain("depth_b must be >= 0");
  if (!(spec.lambda_t > 0.0)) complain("lambda_t must be > 0");
  if (!(spec.sawtooth_amp > 0.0)) complain("sawtooth_amp must be > 0");
  double expected = spec.duty_d * spec.sawtooth_amp;
  if (!(std::abs(spec.v_ref - expected) <= 1e-12 * std::max(std::abs(expected), 1e-300)))
    complain("v_ref must equal duty_d * sawtooth_amp");
  if (!bad.empty()) throw std::invalid_argument("modulation spec: " + bad);
}

namespace {

// Width as a fraction of the period for a (possibly noise-perturbed,
// hence real-valued) photon count. Returns the raw value; callers clamp.
inline double raw_width_fraction(double n_eff, const ModulationSpec& s) {
  return s.duty_d * (1.0 - s.depth_b) + s.depth_b * s.duty_d * (n_eff / s.lambda_t);
}

}  // namespace

double pulse_width_from_count(std::uint64_t n, const ModulationSpec& spec) {
  double raw = raw_width_fraction(static_cast<double>(n), spec);
  return spec.period_t * std::clamp(raw, 0.0, 1.0);
}

WidthSequence generate_width_sequence(const ModulationSpec& spec, std::uint64_t num_periods,
                                      std::uint64_t seed, const DetectorModel& det,
                                      ExecMode mode) {
  if (num_periods < 1)
    throw std::invalid_argument("generate_width_sequence: num_periods must be >= 1");

  WidthSequence out;
  out.seed = seed;
  out.spec = spec;
  out.widths.resize(num_periods);
  std::vector<unsigned char> clipped(num_periods, 0);

  auto one_period = [&](std::uint64_t i) {
    RandomStream rs(seed, i);
    std::uint64_t n = sample_photon_count(spec.lambda_t, rs);
    double n_eff = static_cast<double>(n);
    if (det.noise_sigma > 0.0)
      n_eff += det.noise_sigma * rs.next_normal() / det.gain_g;
    double raw = raw_width_fraction(n_eff, spec);
    clipped[i] = (raw > 1.0 || raw < 0.0) ? 1 : 0;
    out.widths[i] = spec.period_t * std::clamp(raw, 0.0, 1.0);
  };

  if (mode == ExecMode::Parallel) {
#ifdef QPWM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(num_periods); ++i)
      one_period(static_cast<std::uint64_t>(i));
  } else {
    for (std::uint64_t i = 0; i < num_periods; ++i) one_period(i);
  }

  std::uint64_t count = 0;
  for (unsigned char c : clipped) count += c;
  out.clipped_count = count;
  return out;
}

SampledWaveform synthesize_waveform(const WidthSequence& widths, double sample_rate_fs,
                                    ExecMode mode) {
  const double spp_real = sample_rate_fs * widths.spec.period_t;
  const auto spp = static_cast<std::int64_t>(std::llround(spp_real));
  if (!(sample_rate_fs > 0.0) || spp < 1 ||
      std::abs(spp_real - static_cast<double>(spp)) > 1e-9 * spp_real)
    throw std::invalid_argument(
        "synthesize_waveform: sample_rate_fs * period_t must be a positive integer");

  const auto num_periods = static_cast<std::int64_t>(widths.widths.size());
  SampledWaveform wf;
  wf.sample_rate_fs = sample_rate_fs;
  wf.period_t = widths.spec.period_t;
  wf.samples.assign(static_cast<std::size_t>(num_periods * spp), 0.0);
  const double amp = widths.spec.amplitude_a;

  auto one_period = [&](std::int64_t i) {
    // Local sample m is high iff m/f_s < w; the count of such m is ceil(w*f_s)
    // (equal to w*f_s itself when that product is an integer).
    double cut = widths.widths[static_cast<std::size_t>(i)] * sample_rate_fs;
    auto on = static_cast<std::int64_t>(std::ceil(cut));
    on = std::clamp<std::int64_t>(on, 0, spp);
    double* p = wf.samples.data() + i * spp;
    std::fill(p, p + on, amp);
  };

  if (mode == ExecMode::Parallel) {
#ifdef QPWM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < num_periods; ++i) one_period(i);
  } else {
    for (std::int64_t i = 0; i < num_periods; ++i) one_period(i);
  }
  return wf;
}

double onoff_rate_for_duty(double duty_d) {
  if (!(duty_d > 0.0 && duty_d < 1.0))
    throw std::domain_error("onoff_rate_for_duty: duty must be in (0,1)");
  return -std::log1p(-duty_d);
}

WidthSequence generate_onoff_sequence(double duty_d, double period_t, std::uint64_t num_periods,
                                      std::uint64_t seed, double amplitude_a, ExecMode mode) {
  if (num_periods < 1)
    throw std::invalid_argument("generate_onoff_sequence: num_periods must be >= 1");
  const double lambda_t = onoff_rate_for_duty(duty_d);

  WidthSequence out;
  out.seed = seed;
  out.spec = make_spec(period_t, duty_d, amplitude_a, 0.0, lambda_t);
  out.widths.resize(num_periods);

  auto one_period = [&](std::uint64_t i) {
    RandomStream rs(seed, i);
    // Only the zero/nonzero distinction matters: P(width = 0) = e^{-lambda_t}.
    std::uint64_t n = sample_photon_count(lambda_t, rs);
    out.widths[i] = (n == 0) ? 0.0 : period_t;
  };

  if (mode == ExecMode::Parallel) {
#ifdef QPWM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(num_periods); ++i)
      one_period(static_cast<std::uint64_t>(i));
  } else {
    for (std::uint64_t i = 0; i < num_periods; ++i) one_period(i);
  }
  return out;
}

}  // namespace qpwm
