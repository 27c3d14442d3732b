#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qpwm/experiment.hpp"
#include "qpwm/modulation.hpp"
#include "qpwm/random.hpp"
#include "qpwm/spectrum_analytic.hpp"
#include "qpwm/spectrum_estimate.hpp"

using namespace qpwm;

namespace {

constexpr double kPi = 3.14159265358979323846;

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

double closure_sum(const PsdEstimate& psd) {
  double acc = 0.0;
  for (double b : psd.bins) acc += b;
  return acc * psd.delta_f;
}

double mean_square(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

SampledWaveform constant_wave(double level, std::size_t n, double fs) {
  SampledWaveform wf;
  wf.sample_rate_fs = fs;
  wf.period_t = static_cast<double>(n) / fs;
  wf.samples.assign(n, level);
  return wf;
}

SampledWaveform sine_wave(double amp, double freq, std::size_t n, double fs) {
  SampledWaveform wf;
  wf.sample_rate_fs = fs;
  wf.period_t = static_cast<double>(n) / fs;
  wf.samples.resize(n);
  for (std::size_t m = 0; m < n; ++m)
    wf.samples[m] = amp * std::sin(2.0 * kPi * freq * static_cast<double>(m) / fs);
  return wf;
}

}  // namespace

TEST_SUITE("spectrum_estimate") {

TEST_CASE("window names") {
  CHECK(std::string(window_name(Window::Hann)) == "hann");
  CHECK(std::string(window_name(Window::Rectangular)) == "rectangular");
}

TEST_CASE("constant input, rectangular window: everything lands at DC") {
  WelchConfig cfg{1, Window::Rectangular, 0.0, 1000.0};
  PsdEstimate psd = welch_psd(constant_wave(3.0, 4096, 1000.0), cfg);
  REQUIRE(psd.bins.size() == 2049);
  CHECK(rel_err(psd.delta_f, 1000.0 / 4096.0) < 1e-15);
  CHECK(rel_err(psd.bins[0] * psd.delta_f, 9.0) < 1e-12);
  for (std::size_t b = 1; b < psd.bins.size(); ++b) REQUIRE(psd.bins[b] < 1e-18);
  CHECK(rel_err(closure_sum(psd), 9.0) < 1e-12);
}

TEST_CASE("constant input, Hann window: the periodic Hann kernel stops at bin 1") {
  WelchConfig cfg{1, Window::Hann, 0.0, 1000.0};
  PsdEstimate psd = welch_psd(constant_wave(3.0, 4096, 1000.0), cfg);
  // DFT of the periodic Hann window is exactly {L/2, -L/4, 0, 0, ...}, so a
  // constant excites bins 0 and 1 only and their ratio is pinned.
  CHECK(rel_err(closure_sum(psd), 9.0) < 1e-12);
  CHECK(rel_err(psd.bins[1] / psd.bins[0], 0.5) < 1e-10);  // 2 * (1/4)
  for (std::size_t b = 2; b < psd.bins.size(); ++b) REQUIRE(psd.bins[b] < 1e-18);
}

TEST_CASE("bin-centered sinusoid: total power a^2/2 in the right bin") {
  const double fs = 8192.0, amp = 2.0;
  SampledWaveform wf = sine_wave(amp, 50.0, 8192, fs);
  WelchConfig rect{1, Window::Rectangular, 0.0, fs};
  PsdEstimate psd = welch_psd(wf, rect);
  CHECK(rel_err(psd.bins[50] * psd.delta_f, amp * amp / 2.0) < 1e-10);
  CHECK(rel_err(closure_sum(psd), amp * amp / 2.0) < 1e-10);
  for (std::size_t b = 0; b < psd.bins.size(); ++b)
    if (b < 48 || b > 52) REQUIRE(psd.bins[b] * psd.delta_f < 1e-14);

  WelchConfig hann{1, Window::Hann, 0.0, fs};
  PsdEstimate ph = welch_psd(wf, hann);
  double line = (ph.bins[49] + ph.bins[50] + ph.bins[51]) * ph.delta_f;
  CHECK(rel_err(line, amp * amp / 2.0) < 1e-10);
  CHECK(rel_err(closure_sum(ph), amp * amp / 2.0) < 1e-10);
  CHECK(ph.bins[50] > ph.bins[49]);
}

TEST_CASE("white noise: flat density at 2 sigma^2 / fs") {
  const double fs = 1e6, sigma = 1.5;
  SampledWaveform wf;
  wf.sample_rate_fs = fs;
  wf.period_t = 1e-3;
  wf.samples.resize(1000000);
  RandomStream rs(515);
  for (double& v : wf.samples) v = sigma * rs.next_normal();

  WelchConfig cfg{16, Window::Hann, 0.0, fs};
  PsdEstimate psd = welch_psd(wf, cfg);
  double avg = 0.0;
  for (double b : psd.bins) avg += b;
  avg /= static_cast<double>(psd.bins.size());
  CHECK(rel_err(avg, 2.0 * sigma * sigma / fs) < 0.01);
  CHECK(rel_err(closure_sum(psd), mean_square(wf.samples)) < 0.005);
}

TEST_CASE("energy closure holds for synthesized pulse trains") {
  // With a rectangular window the closure Σ bins·Δf = mean square is an
  // algebraic identity (Parseval), so it pins the absolute normalization —
  // the fs·Σw² divisor and the bin doubling — to machine precision even on
  // random trains. A Hann window computes a w²-weighted mean square instead,
  // so on trains whose duty fluctuates at the segment scale the closure
  // carries a few-percent sampling residual; only segment-homogeneous
  // signals close tightly under Hann.
  ExperimentConfig cfg = preset_table1();
  WidthSequence ws = generate_width_sequence(cfg.spec, cfg.num_periods, 1);
  SampledWaveform wave = synthesize_waveform(ws, cfg.sample_rate_fs);
  WelchConfig rect{16, Window::Rectangular, 0.0, cfg.sample_rate_fs};
  CHECK(rel_err(closure_sum(welch_psd(wave, rect)), mean_square(wave.samples)) < 1e-12);
  CHECK(rel_err(closure_sum(welch_psd(wave, cfg.welch())), mean_square(wave.samples)) < 0.08);

  WidthSequence onoff = generate_onoff_sequence(0.5, 1e-3, 1000, 1, 2.0);
  SampledWaveform owave = synthesize_waveform(onoff, 1e6);
  CHECK(rel_err(closure_sum(welch_psd(owave, rect)), mean_square(owave.samples)) < 1e-12);
  CHECK(rel_err(closure_sum(welch_psd(owave, cfg.welch())), mean_square(owave.samples)) < 0.08);

  // Constant widths make every segment statistically identical, so the Hann
  // estimate closes tightly as well.
  ExperimentConfig flat = preset_table1();
  flat.spec = make_spec(1e-3, 1.0 / 3.0, 5.0, 0.0, 2.0);
  WidthSequence fws = generate_width_sequence(flat.spec, flat.num_periods, 1);
  SampledWaveform fwave = synthesize_waveform(fws, flat.sample_rate_fs);
  CHECK(rel_err(closure_sum(welch_psd(fwave, flat.welch())), mean_square(fwave.samples)) < 0.005);
}

TEST_CASE("segment planning: truncation, trailing samples, overlap") {
  SampledWaveform wf = constant_wave(1.0, 1000, 1000.0);
  WelchConfig cfg{3, Window::Rectangular, 0.0, 1000.0};
  PsdEstimate psd = welch_psd(wf, cfg);
  // floor(1000/3) = 333 is odd -> segment length 332.
  CHECK(rel_err(psd.delta_f, 1000.0 / 332.0) < 1e-15);
  CHECK(psd.n_segments_used == 3);
  REQUIRE(psd.warnings.size() == 2);
  CHECK(psd.warnings[0].find("truncated") != std::string::npos);
  CHECK(psd.warnings[1].find("trailing") != std::string::npos);

  WelchConfig half{3, Window::Rectangular, 0.5, 1000.0};
  PsdEstimate ph = welch_psd(constant_wave(1.0, 1000, 1000.0), half);
  CHECK(rel_err(ph.delta_f, 2.0) < 1e-15);  // L = floor(1000/2) = 500
  CHECK(ph.warnings.empty());
}

TEST_CASE("welch rejects unusable requests") {
  SampledWaveform wf = constant_wave(1.0, 100, 100.0);
  CHECK_THROWS_AS(welch_psd(wf, WelchConfig{0, Window::Hann, 0.0, 100.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(welch_psd(wf, WelchConfig{2, Window::Hann, 1.0, 100.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(welch_psd(wf, WelchConfig{2, Window::Hann, -0.1, 100.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(welch_psd(wf, WelchConfig{1, Window::Hann, 0.0, 0.0}),
                  std::invalid_argument);
  SampledWaveform tiny = constant_wave(1.0, 3, 100.0);
  CHECK_THROWS_AS(welch_psd(tiny, WelchConfig{2, Window::Hann, 0.0, 100.0}),
                  std::invalid_argument);
}

TEST_CASE("estimate is deterministic and fingerprints its input") {
  SampledWaveform wf = sine_wave(1.0, 100.0, 20000, 10000.0);
  WelchConfig cfg{4, Window::Hann, 0.0, 10000.0};
  PsdEstimate a = welch_psd(wf, cfg);
  PsdEstimate b = welch_psd(wf, cfg);
  CHECK(a.bins == b.bins);
  CHECK(a.input_digest == b.input_digest);
  CHECK(a.input_digest ==
        fnv1a64(wf.samples.data(), wf.samples.size() * sizeof(double)));
}

TEST_CASE("deterministic train: estimated lines recover 2|c_k|^2") {
  // Depth 0 keeps every width at T*D, so the only systematic effects are the
  // sample quantization of the duty and window leakage.
  ExperimentConfig cfg = preset_table1();
  cfg.spec = make_spec(1e-3, 1.0 / 3.0, 5.0, 0.0, 2.0);
  WidthSequence ws = generate_width_sequence(cfg.spec, cfg.num_periods, 1);
  SampledWaveform wave = synthesize_waveform(ws, cfg.sample_rate_fs);
  PsdEstimate psd = welch_psd(wave, cfg.welch());
  std::vector<double> zeros(psd.bins.size(), 0.0);
  auto lines = extract_harmonic_lines(psd, zeros, 1000.0, 8);
  for (int k = 1; k <= 8; ++k) {
    double want = unmodulated_harmonic_power(k, cfg.spec);
    double got = lines[static_cast<std::size_t>(k - 1)].power;
    INFO("k ", k, " got ", got, " want ", want);
    if (want >= 1e-3)
      CHECK(rel_err(got, want) < 0.02);
    else
      CHECK(got < 1e-3);  // null harmonics: only the duty quantization leaks in
  }

  // A duty whose width is an exact sample count has no quantization error at
  // all and no null harmonics below k = 10.
  ExperimentConfig exact = preset_table1();
  exact.spec = make_spec(1e-3, 0.3, 5.0, 0.0, 2.0);
  WidthSequence ws2 = generate_width_sequence(exact.spec, exact.num_periods, 1);
  SampledWaveform wave2 = synthesize_waveform(ws2, exact.sample_rate_fs);
  PsdEstimate psd2 = welch_psd(wave2, exact.welch());
  std::vector<double> zeros2(psd2.bins.size(), 0.0);
  auto lines2 = extract_harmonic_lines(psd2, zeros2, 1000.0, 8);
  for (int k = 1; k <= 8; ++k) {
    double want = unmodulated_harmonic_power(k, exact.spec);
    CHECK(rel_err(lines2[static_cast<std::size_t>(k - 1)].power, want) < 0.02);
  }
}

TEST_CASE("seed-averaged lines converge to the closed-form values") {
  // Monte Carlo consistency of the full pipeline with s_disc_line: the mean
  // over seeds 1..20 must sit within 0.03 V^2 of the closed form for every
  // harmonic of both reference configurations.
  for (const ExperimentConfig& cfg : {preset_table1(), preset_table2()}) {
    std::vector<double> avg(static_cast<std::size_t>(cfg.k_max), 0.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto lines = estimate_lines(cfg, seed);
      for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += lines[i].power;
    }
    for (int k = 1; k <= cfg.k_max; ++k) {
      double mean = avg[static_cast<std::size_t>(k - 1)] / 20.0;
      double want = s_disc_line(k, cfg.spec);
      INFO("duty ", cfg.spec.duty_d, " k ", k, " mean ", mean, " want ", want);
      CHECK(std::abs(mean - want) < 0.03);
    }
  }
}

TEST_CASE("continuous part tracks the closed form between harmonics") {
  // A 16-segment average has chi-square bin noise with std 1/4 of the mean,
  // so even a perfect closed form leaves a single-realization median
  // |psd - s_cont| / s_cont of about 0.165 (measured 0.14-0.20 over seeds
  // 1..20). Agreement is therefore asserted two ways: the 20-seed-averaged
  // spectrum must sit within 0.15 in the median (it lands near 0.04), and a
  // single realization must be unbiased — mean ratio to s_cont within 5% —
  // with its median below a noise-inclusive 0.30.
  ExperimentConfig cfg = preset_table1();
  std::vector<double> averaged;
  PsdEstimate seed1;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    WidthSequence ws = generate_width_sequence(cfg.spec, cfg.num_periods, seed);
    SampledWaveform wave = synthesize_waveform(ws, cfg.sample_rate_fs);
    PsdEstimate psd = welch_psd(wave, cfg.welch());
    if (seed == 1) seed1 = psd;
    if (averaged.empty()) averaged.assign(psd.bins.size(), 0.0);
    for (std::size_t b = 0; b < psd.bins.size(); ++b) averaged[b] += psd.bins[b] / 20.0;
  }

  auto band_bins = [&](const std::vector<double>& bins, double df) {
    std::vector<std::size_t> keep;
    for (std::size_t b = 1; b < bins.size(); ++b) {
      double f = static_cast<double>(b) * df;
      if (f < 200.0 || f > 8000.0) continue;
      double nearest = std::round(f / 1000.0) * 1000.0;
      if (std::abs(f - nearest) <= 3.0 * df) continue;
      keep.push_back(b);
    }
    return keep;
  };
  auto median_dev = [&](const std::vector<double>& bins, double df) {
    std::vector<double> dev;
    for (std::size_t b : band_bins(bins, df)) {
      double want = s_cont(static_cast<double>(b) * df, cfg.spec);
      dev.push_back(std::abs(bins[b] - want) / want);
    }
    REQUIRE(dev.size() > 300);
    std::nth_element(dev.begin(), dev.begin() + static_cast<std::ptrdiff_t>(dev.size() / 2),
                     dev.end());
    return dev[dev.size() / 2];
  };

  double med_avg = median_dev(averaged, seed1.delta_f);
  INFO("seed-averaged median deviation ", med_avg);
  CHECK(med_avg < 0.15);

  double med_one = median_dev(seed1.bins, seed1.delta_f);
  INFO("single-seed median deviation ", med_one);
  CHECK(med_one < 0.30);

  double ratio = 0.0;
  auto keep = band_bins(seed1.bins, seed1.delta_f);
  for (std::size_t b : keep)
    ratio += seed1.bins[b] / s_cont(static_cast<double>(b) * seed1.delta_f, cfg.spec);
  ratio /= static_cast<double>(keep.size());
  INFO("single-seed mean ratio ", ratio);
  CHECK(std::abs(ratio - 1.0) < 0.05);
}

TEST_CASE("line extraction on a hand-built spectrum") {
  PsdEstimate psd;
  psd.delta_f = 1.0;
  psd.sample_rate_fs = 400.0;
  psd.bins.assign(201, 0.0);
  psd.bins[99] = 1.0;
  psd.bins[100] = 2.0;
  psd.bins[101] = 1.0;
  std::vector<double> floor0(201, 0.0);
  auto lines = extract_harmonic_lines(psd, floor0, 100.0, 1);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].k == 1);
  CHECK(lines[0].freq == 100.0);
  CHECK(rel_err(lines[0].power, 4.0) < 1e-12);

  // A uniform floor is subtracted and negative residuals clamp at zero.
  std::vector<double> floor_half(201, 0.5);
  auto lines2 = extract_harmonic_lines(psd, floor_half, 100.0, 1);
  CHECK(rel_err(lines2[0].power, 0.5 + 1.5 + 0.5) < 1e-12);
}

TEST_CASE("line extraction rejects malformed requests") {
  PsdEstimate psd;
  psd.delta_f = 16.0;
  psd.bins.assign(1001, 0.0);  // covers 0..16 kHz
  std::vector<double> floor_ok(1001, 0.0);
  std::vector<double> floor_bad(5, 0.0);
  CHECK_THROWS_AS(extract_harmonic_lines(psd, floor_bad, 1000.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(extract_harmonic_lines(psd, floor_ok, 1000.0, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(extract_harmonic_lines(psd, floor_ok, -1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(extract_harmonic_lines(psd, floor_ok, 1000.0, 17), std::invalid_argument);
  CHECK_NOTHROW(extract_harmonic_lines(psd, floor_ok, 1000.0, 16));
}

TEST_CASE("attenuation in decibels") {
  CHECK(rel_err(attenuation_db(4.0, 1.0), 6.020599913279624) < 1e-12);
  CHECK(attenuation_db(2.5, 2.5) == 0.0);
  CHECK(attenuation_db(1.0, 4.0) < 0.0);
  CHECK_THROWS_AS(attenuation_db(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(attenuation_db(1.0, -2.0), std::domain_error);
}

TEST_CASE("peak reduction: identity, amplitude scaling, grid checks") {
  WidthSequence ws = generate_width_sequence(make_spec(1e-3, 0.5, 1.0, 0.0, 1.0), 64, 1);
  SampledWaveform wave = synthesize_waveform(ws, 1e5);
  WelchConfig cfg{4, Window::Hann, 0.0, 1e5};
  PsdEstimate a = welch_psd(wave, cfg);
  CHECK(peak_power_reduction_db(a, a) == 0.0);

  SampledWaveform doubled = wave;
  for (double& v : doubled.samples) v *= 2.0;
  PsdEstimate b = welch_psd(doubled, cfg);
  CHECK(rel_err(peak_power_reduction_db(a, b), -6.020599913279624) < 1e-9);

  WelchConfig other{8, Window::Hann, 0.0, 1e5};
  PsdEstimate c = welch_psd(wave, other);
  CHECK_THROWS_AS(peak_power_reduction_db(a, c), std::invalid_argument);
  CHECK_NOTHROW(peak_density_reduction_db(a, c));  // resolution-agnostic variant

  PsdEstimate zeroed = a;
  std::fill(zeroed.bins.begin(), zeroed.bins.end(), 0.0);
  CHECK_THROWS_AS(peak_power_reduction_db(zeroed, a), std::domain_error);
  CHECK_THROWS_AS(peak_power_reduction_db(a, b, 100000), std::invalid_argument);
}

TEST_CASE("peak search skips the DC block") {
  PsdEstimate u;
  u.delta_f = 1.0;
  u.bins = {100.0, 50.0, 25.0, 1.0, 8.0, 1.0};
  PsdEstimate m = u;
  m.bins = {100.0, 50.0, 25.0, 1.0, 2.0, 1.0};
  // With the first three bins excluded the peaks are 8 and 2.
  CHECK(rel_err(peak_power_reduction_db(u, m), 10.0 * std::log10(4.0)) < 1e-12);
}

}  // TEST_SUITE
