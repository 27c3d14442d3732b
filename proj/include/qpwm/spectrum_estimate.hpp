#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpwm/exec.hpp"
#include "qpwm/modulation.hpp"
#include "qpwm/spectrum_analytic.hpp"

namespace qpwm {

enum class Window { Hann, Rectangular };

const char* window_name(Window w);

struct WelchConfig {
  int num_segments = 16;
  Window window = Window::Hann;
  double overlap = 0.0;  // fraction of a segment, in [0, 1)
  double sample_rate_fs = 1e6;
};

// Unilateral Welch PSD. Normalization is incoherent (window power): with bin
// doubling everywhere except DC and Nyquist, sum(bins)*delta_f equals the
// mean square of the analyzed samples.
struct PsdEstimate {
  double delta_f = 0.0;        // Hz; = sample_rate_fs / segment_length
  std::vector<double> bins;    // V^2/Hz, segment_length/2 + 1 entries
  int n_segments_used = 0;
  double sample_rate_fs = 0.0;
  Window window = Window::Hann;
  std::uint64_t input_digest = 0;  // FNV-1a of the input sample bytes
  std::vector<std::string> warnings;
};

// Averaged periodogram over num_segments windowed segments. Segment length is
// derived from the waveform length, the segment count and the overlap; an odd
// length is truncated by one sample (with a warning) so the FFT length stays
// even. Per-segment periodograms are independent; Parallel mode computes them
// concurrently and reduces in fixed order, bit-identical to Serial.
PsdEstimate welch_psd(const SampledWaveform& waveform, const WelchConfig& config,
                      ExecMode mode = ExecMode::Parallel);

// Integrate the spectral excess over the analytic continuous floor in a
// +-band_bins window around each harmonic k*f0, k = 1..k_max. analytic_cont
// must be sampled on the PSD bin grid (same length as psd.bins). Negative
// residuals are floored at zero before integrating.
std::vector<HarmonicLine> extract_harmonic_lines(const PsdEstimate& psd,
                                                 const std::vector<double>& analytic_cont,
                                                 double f0, int k_max, int band_bins = 3);

// 10*log10(unmod/mod), both strictly positive.
double attenuation_db(double unmod_power, double mod_power);

// Ratio of the largest non-DC bin of two estimates on identical grids
// (same delta_f and bin count); the first exclude_dc_bins bins are skipped.
double peak_power_reduction_db(const PsdEstimate& unmod_psd, const PsdEstimate& mod_psd,
                               int exclude_dc_bins = 3);

// Same ratio without the matched-grid requirement: compares peak densities
// across estimates with different resolution bandwidths. Used when the
// reference is a fully resolved single-segment periodogram of a periodic
// signal while the other side is a segment-averaged estimate.
double peak_density_reduction_db(const PsdEstimate& unmod_psd, const PsdEstimate& mod_psd,
                                 int exclude_dc_bins = 3);

}  // namespace qpwm
