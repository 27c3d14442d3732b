#pragma once

#include <cstdint>
#include <vector>

#include "qpwm/exec.hpp"
#include "qpwm/photon_source.hpp"

namespace qpwm {

// Parameters of the randomized pulse-width law
//   w = clamp(T*D*(1-b) + b*(n/lambda_t)*T*D, 0, T),   n ~ Poisson(lambda_t).
// The deterministic baseline (b = 0) is classic PWM with duty D, produced by
// comparing a sawtooth of amplitude A_s against the reference v_ref = D*A_s.
struct ModulationSpec {
  double period_t = 1e-3;      // T [s]
  double duty_d = 1.0 / 3.0;   // D in (0,1)
  double amplitude_a = 5.0;    // pulse amplitude A [V]
  double depth_b = 1.0;        // modulation depth b >= 0
  double lambda_t = 2.0;       // mean photon count per period
  double sawtooth_amp = 1.0;   // A_s [V]
  double v_ref = 1.0 / 3.0;    // D * A_s [V]

  double f0() const { return 1.0 / period_t; }
};

// Convenience constructor keeping v_ref = duty * A_s in sync.
ModulationSpec make_spec(double period_t, double duty_d, double amplitude_a,
                         double depth_b, double lambda_t, double sawtooth_amp = 1.0);

// Throws std::invalid_argument naming every violated field.
void validate(const ModulationSpec& spec);

// One random width per period. clipped_count counts the periods whose raw
// (pre-clamp) width fell strictly outside [0, T]; a width that lands exactly
// on a bound is not clipped.
struct WidthSequence {
  std::vector<double> widths;  // seconds, one per period
  std::uint64_t seed = 0;
  ModulationSpec spec;
  std::uint64_t clipped_count = 0;
};

struct SampledWaveform {
  double sample_rate_fs = 0.0;  // Hz; sample_rate_fs * period_t is an integer
  std::vector<double> samples;  // volts
  double period_t = 0.0;
};

// Width for a given photon count (noiseless law, clamped to [0, T]).
double pulse_width_from_count(std::uint64_t n, const ModulationSpec& spec);

// i.i.d. widths over Poisson counts, one per period, deterministic given the
// seed. Detector noise (if any) enters as an equivalent count perturbation
// n_eff = n + eps/g applied before clamping. Period i draws from the
// independent stream (seed, i), so Serial and Parallel modes are bit-identical.
WidthSequence generate_width_sequence(const ModulationSpec& spec, std::uint64_t num_periods,
                                      std::uint64_t seed, const DetectorModel& det = {},
                                      ExecMode mode = ExecMode::Parallel);

// Left-aligned rectangular pulses sampled at f_s: sample m (local to its
// period) is high iff m/f_s < w_i. Requires integer samples per period.
SampledWaveform synthesize_waveform(const WidthSequence& widths, double sample_rate_fs,
                                    ExecMode mode = ExecMode::Parallel);

// Photon rate that makes the on-off scheme hit a target duty: lambda_t = -ln(1-D).
double onoff_rate_for_duty(double duty_d);

// On-off modulation: width 0 when no photon arrives in the period, width T
// otherwise. amplitude_a is carried into the returned spec for synthesis.
WidthSequence generate_onoff_sequence(double duty_d, double period_t, std::uint64_t num_periods,
                                      std::uint64_t seed, double amplitude_a = 1.0,
                                      ExecMode mode = ExecMode::Parallel);

}  // namespace qpwm
