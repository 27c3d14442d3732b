#include "qpwm/spectrum_estimate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "qpwm/random.hpp"

namespace qpwm {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW plan creation/destruction is not thread-safe; executing distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct SegmentPlan {
  std::int64_t length = 0;  // even segment length
  std::int64_t step = 0;    // offset between consecutive segments
  bool truncated = false;
};

SegmentPlan plan_segments(std::int64_t n, const WelchConfig& cfg) {
  if (cfg.num_segments < 1)
    throw std::invalid_argument("welch_psd: num_segments must be >= 1");
  if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0))
    throw std::invalid_argument("welch_psd: overlap must be in [0, 1)");
  SegmentPlan p;
  double denom = 1.0 + (cfg.num_segments - 1) * (1.0 - cfg.overlap);
  p.length = static_cast<std::int64_t>(std::floor(static_cast<double>(n) / denom));
  if (p.length % 2 != 0) {
    p.length -= 1;
    p.truncated = true;
  }
  if (p.length < 2)
    throw std::invalid_argument("welch_psd: waveform too short for the requested segmentation");
  p.step = cfg.num_segments == 1
               ? p.length
               : static_cast<std::int64_t>(std::llround(p.length * (1.0 - cfg.overlap)));
  p.step = std::max<std::int64_t>(p.step, 1);
  while (p.step > 1 && (cfg.num_segments - 1) * p.step + p.length > n) --p.step;
  if ((cfg.num_segments - 1) * p.step + p.length > n)
    throw std::invalid_argument("welch_psd: waveform too short for the requested segmentation");
  return p;
}

std::vector<double> make_window(Window w, std::int64_t length) {
  std::vector<double> win(static_cast<std::size_t>(length), 1.0);
  if (w == Window::Hann) {
    for (std::int64_t m = 0; m < length; ++m)
      win[m] = 0.5 * (1.0 - std::cos(2.0 * kPi * m / static_cast<double>(length)));
  }
  return win;
}

}  // namespace

const char* window_name(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

PsdEstimate welch_psd(const SampledWaveform& waveform, const WelchConfig& config, ExecMode mode) {
  const auto n = static_cast<std::int64_t>(waveform.samples.size());
  if (n < config.num_segments)
    throw std::invalid_argument("welch_psd: waveform shorter than the segment count");
  if (!(config.sample_rate_fs > 0.0))
    throw std::invalid_argument("welch_psd: sample_rate_fs must be > 0");

  const SegmentPlan sp = plan_segments(n, config);
  const std::int64_t L = sp.length;
  const std::int64_t nb = L / 2 + 1;
  const int segs = config.num_segments;
  const std::vector<double> win = make_window(config.window, L);

  double win_power = 0.0;
  for (double w : win) win_power += w * w;
  const double scale = 1.0 / (config.sample_rate_fs * win_power);

  // One periodogram per segment, reduced afterwards in segment order so the
  // result does not depend on the execution schedule.
  std::vector<double> seg_power(static_cast<std::size_t>(segs) * nb);
  const double* x = waveform.samples.data();

  auto run_segment = [&](int s, double* in, fftw_complex* out, fftw_plan plan) {
    const double* seg = x + static_cast<std::int64_t>(s) * sp.step;
    for (std::int64_t m = 0; m < L; ++m) in[m] = seg[m] * win[m];
    fftw_execute(plan);
    double* dst = seg_power.data() + static_cast<std::size_t>(s) * nb;
    for (std::int64_t b = 0; b < nb; ++b)
      dst[b] = out[b][0] * out[b][0] + out[b][1] * out[b][1];
  };

  if (mode == ExecMode::Parallel) {
#ifdef QPWM_HAVE_OPENMP
#pragma omp parallel
    {
      double* in = nullptr;
      fftw_complex* out = nullptr;
      fftw_plan plan = nullptr;
      {
        std::lock_guard<std::mutex> lock(planner_mutex());
        in = fftw_alloc_real(static_cast<std::size_t>(L));
        out = fftw_alloc_complex(static_cast<std::size_t>(nb));
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), in, out, FFTW_ESTIMATE);
      }
#pragma omp for schedule(static)
      for (int s = 0; s < segs; ++s) run_segment(s, in, out, plan);
      {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
      }
    }
#else
    mode = ExecMode::Serial;
#endif
  }
  if (mode == ExecMode::Serial) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    double* in = fftw_alloc_real(static_cast<std::size_t>(L));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(nb));
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), in, out, FFTW_ESTIMATE);
    for (int s = 0; s < segs; ++s) run_segment(s, in, out, plan);
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }

  PsdEstimate psd;
  psd.delta_f = config.sample_rate_fs / static_cast<double>(L);
  psd.n_segments_used = segs;
  psd.sample_rate_fs = config.sample_rate_fs;
  psd.window = config.window;
  psd.bins.assign(static_cast<std::size_t>(nb), 0.0);
  for (int s = 0; s < segs; ++s) {
    const double* src = seg_power.data() + static_cast<std::size_t>(s) * nb;
    for (std::int64_t b = 0; b < nb; ++b) psd.bins[b] += src[b];
  }
  for (std::int64_t b = 0; b < nb; ++b) {
    double mult = (b == 0 || b == nb - 1) ? 1.0 : 2.0;  // L is even: last bin is Nyquist
    psd.bins[b] *= scale * mult / segs;
  }

  psd.input_digest = fnv1a64(waveform.samples.data(), waveform.samples.size() * sizeof(double));
  if (sp.truncated)
    psd.warnings.push_back("segment length truncated by one sample to keep it even");
  if (static_cast<std::int64_t>(segs - 1) * sp.step + L < n)
    psd.warnings.push_back("trailing samples beyond the last segment were ignored");
  return psd;
}

std::vector<HarmonicLine> extract_harmonic_lines(const PsdEstimate& psd,
                                                 const std::vector<double>& analytic_cont,
                                                 double f0, int k_max, int band_bins) {
  if (analytic_cont.size() != psd.bins.size())
    throw std::invalid_argument("extract_harmonic_lines: continuous floor not on the PSD grid");
  if (band_bins < 1) throw std::invalid_argument("extract_harmonic_lines: band_bins must be >= 1");
  if (!(f0 > 0.0)) throw std::invalid_argument("extract_harmonic_lines: f0 must be > 0");
  const double df = psd.delta_f;
  const auto nb = static_cast<std::int64_t>(psd.bins.size());
  if (std::abs(f0 - std::round(f0 / df) * df) > df * (1.0 + 1e-9))
    throw std::invalid_argument("extract_harmonic_lines: f0 not aligned to the bin grid");
  if (k_max * f0 > (static_cast<double>(nb) - 1) * df * (1.0 + 1e-12))
    throw std::invalid_argument("extract_harmonic_lines: k_max * f0 beyond Nyquist");

  std::vector<HarmonicLine> lines;
  lines.reserve(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) {
    const double center = k * f0 / df;  // in bins
    auto lo = static_cast<std::int64_t>(std::ceil(center - band_bins - 1e-9));
    auto hi = static_cast<std::int64_t>(std::floor(center + band_bins + 1e-9));
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, nb - 1);
    double power = 0.0;
    for (std::int64_t b = lo; b <= hi; ++b)
      power += std::max(psd.bins[b] - analytic_cont[b], 0.0) * df;
    lines.push_back({k, k * f0, power});
  }
  return lines;
}

double attenuation_db(double unmod_power, double mod_power) {
  if (!(unmod_power > 0.0) || !(mod_power > 0.0))
    throw std::domain_error("attenuation_db: powers must be > 0");
  return 10.0 * std::log10(unmod_power / mod_power);
}

namespace {

double peak_bin(const PsdEstimate& psd, int exclude_dc_bins) {
  const auto nb = static_cast<std::int64_t>(psd.bins.size());
  if (exclude_dc_bins < 0 || exclude_dc_bins >= nb)
    throw std::invalid_argument("peak reduction: exclude_dc_bins out of range");
  double mx = 0.0;
  for (std::int64_t b = exclude_dc_bins; b < nb; ++b) mx = std::max(mx, psd.bins[b]);
  if (!(mx > 0.0)) throw std::domain_error("peak reduction: empty spectrum");
  return mx;
}

}  // namespace

double peak_power_reduction_db(const PsdEstimate& unmod_psd, const PsdEstimate& mod_psd,
                               int exclude_dc_bins) {
  if (unmod_psd.bins.size() != mod_psd.bins.size() ||
      std::abs(unmod_psd.delta_f - mod_psd.delta_f) > 1e-12 * unmod_psd.delta_f)
    throw std::invalid_argument("peak_power_reduction_db: estimates are on different grids");
  return peak_density_reduction_db(unmod_psd, mod_psd, exclude_dc_bins);
}

double peak_density_reduction_db(const PsdEstimate& unmod_psd, const PsdEstimate& mod_psd,
                                 int exclude_dc_bins) {
  return 10.0 * std::log10(peak_bin(unmod_psd, exclude_dc_bins) /
                           peak_bin(mod_psd, exclude_dc_bins));
}

}  // namespace qpwm
