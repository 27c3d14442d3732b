#pragma once

#include <complex>
#include <vector>

#include "qpwm/exec.hpp"
#include "qpwm/modulation.hpp"

namespace qpwm {

// One discrete spectral line. k = 0 is the DC component.
struct HarmonicLine {
  int k = 0;
  double freq = 0.0;   // Hz, = k / period_t
  double power = 0.0;  // V^2 carried by the line (unilateral convention)
};

enum class WidthLaw { Genwidth, OnOff };

// Closed-form spectrum: continuous density sampled on a frequency grid plus
// the discrete lines. The attached clipping probability flags parameter
// ranges where the width law saturates and the formulas become approximate.
struct AnalyticSpectrum {
  std::vector<double> freq;         // Hz, strictly positive and increasing
  std::vector<double> cont;         // V^2/Hz
  std::vector<HarmonicLine> lines;  // k = 0..k_max
  ModulationSpec spec;
  WidthLaw law = WidthLaw::Genwidth;
  double clip_probability = 0.0;
  bool clip_warning = false;  // clip_probability > 1e-3
};

// Fourier coefficient of the deterministic duty-D pulse train:
// c_k = e^{-j k pi D} * A * D * sinc(k D), normalized sinc.
std::complex<double> fourier_coefficient(int k, const ModulationSpec& spec);

// Power of harmonic k >= 1 of the deterministic train: 2|c_k|^2.
double unmodulated_harmonic_power(int k, const ModulationSpec& spec);

// Time-domain average power A^2 * D of the deterministic train.
double average_power(const ModulationSpec& spec);

// DC power plus the first k_terms harmonic powers; approaches average_power.
double fourier_power_partial_sum(const ModulationSpec& spec, int k_terms);

// E_{lambda}(x) = exp(lambda_t*(cos(2 pi x b T D / lambda_t) - 1)), in (0, 1].
double e_factor(double x, const ModulationSpec& spec);

// C_{lambda}(x) = cos(2 pi x T D (1-b) + lambda_t * sin(2 pi x b T D / lambda_t)).
double c_factor(double x, const ModulationSpec& spec);

// Continuous spectral density of the randomized train, f > 0:
// S_cont(f) = A^2 / (2 T pi^2 f^2) * (1 - E^2(f)).
double s_cont(double f, const ModulationSpec& spec);

// Discrete line power at harmonic k >= 1:
// S_disc(k f0) = A^2 / (2 pi^2 k^2) * (E^2 - 2 E C + 1) at x = k f0.
double s_disc_line(int k, const ModulationSpec& spec);

// DC line power (A * E[w]/T)^2. The width law preserves E[w] = T D, so this
// is (A*D)^2 regardless of depth; the overload takes an explicit mean duty.
double dc_power(const ModulationSpec& spec);
double dc_power(double amplitude_a, double mean_duty);

// Continuous density of the on-off scheme (its discrete part vanishes):
// S_cont(f) = A^2 e^{-l} (1-e^{-l}) (1 - cos(2 pi f T)) / (T pi^2 f^2),
// with l = -ln(1-D).
double onoff_s_cont(double f, double duty_d, double period_t, double amplitude_a);

// Probability that the raw width law leaves [0, T] (upper and lower tail).
double clip_probability(const ModulationSpec& spec);

// Assemble continuous samples over f_grid plus lines 0..k_max.
AnalyticSpectrum analytic_spectrum(const ModulationSpec& spec, const std::vector<double>& f_grid,
                                   int k_max, ExecMode mode = ExecMode::Parallel);
AnalyticSpectrum onoff_analytic_spectrum(double duty_d, double period_t, double amplitude_a,
                                         const std::vector<double>& f_grid, int k_max,
                                         ExecMode mode = ExecMode::Parallel);

// Evenly spaced grid f_min, f_min+step, ... capped at f_max (inclusive).
std::vector<double> make_frequency_grid(double f_min, double f_max, double step);

struct PowerBalance {
  double cont_integral = 0.0;  // trapezoid over (0, f_max]
  double line_sum = 0.0;       // harmonics 1..k_max
  double dc = 0.0;
  double total = 0.0;
  double target = 0.0;    // A^2 * E[w]/T
  double fraction = 0.0;  // total / target
};

// Parseval bookkeeping: integrate the continuous part up to f_max, add the
// lines and DC, and compare against the process average power.
PowerBalance power_balance(const AnalyticSpectrum& spectrum, double f_max, int k_max);

}  // namespace qpwm
