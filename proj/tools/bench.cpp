// Serial vs parallel timing for the data-parallel kernels, with an equality
// check: the two modes must produce bit-identical results.
//
// Usage: qpwm_bench [--quick] [repeats]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "qpwm/experiment.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = Clock::now();
    fn();
    auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool equal_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  int repeats = 3;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--quick") quick = true;
    else repeats = std::max(1, std::atoi(argv[i]));
  }

  const std::uint64_t periods = quick ? 2000 : 200000;
  const auto spec = qpwm::make_spec(1e-3, 1.0 / 3.0, 5.0, 1.0, 2.0);
  const double fs = quick ? 1e5 : 1e6;
  const std::uint64_t wave_periods = quick ? 64 : 1000;

  std::printf("threads available: %d\n", qpwm::max_threads());
  std::printf("%-28s %12s %12s %9s %s\n", "kernel", "serial[ms]", "parallel[ms]", "speedup",
              "identical");

  auto report = [&](const char* name, double ts, double tp, bool same) {
    std::printf("%-28s %12.2f %12.2f %8.2fx %s\n", name, ts, tp, ts / tp,
                same ? "yes" : "NO (BUG)");
  };
  int mismatches = 0;

  {
    qpwm::WidthSequence s, p;
    double ts = time_ms([&] { s = qpwm::generate_width_sequence(spec, periods, 7, {},
                                                                qpwm::ExecMode::Serial); },
                        repeats);
    double tp = time_ms([&] { p = qpwm::generate_width_sequence(spec, periods, 7, {},
                                                                qpwm::ExecMode::Parallel); },
                        repeats);
    bool same = equal_bits(s.widths, p.widths) && s.clipped_count == p.clipped_count;
    mismatches += !same;
    report("generate_width_sequence", ts, tp, same);
  }

  qpwm::WidthSequence widths = qpwm::generate_width_sequence(spec, wave_periods, 7);
  {
    qpwm::SampledWaveform s, p;
    double ts = time_ms([&] { s = qpwm::synthesize_waveform(widths, fs,
                                                            qpwm::ExecMode::Serial); },
                        repeats);
    double tp = time_ms([&] { p = qpwm::synthesize_waveform(widths, fs,
                                                            qpwm::ExecMode::Parallel); },
                        repeats);
    bool same = equal_bits(s.samples, p.samples);
    mismatches += !same;
    report("synthesize_waveform", ts, tp, same);
  }

  qpwm::SampledWaveform wave = qpwm::synthesize_waveform(widths, fs);
  {
    qpwm::WelchConfig wc;
    wc.sample_rate_fs = fs;
    wc.num_segments = quick ? 8 : 16;
    qpwm::PsdEstimate s, p;
    double ts = time_ms([&] { s = qpwm::welch_psd(wave, wc, qpwm::ExecMode::Serial); }, repeats);
    double tp = time_ms([&] { p = qpwm::welch_psd(wave, wc, qpwm::ExecMode::Parallel); }, repeats);
    bool same = equal_bits(s.bins, p.bins);
    mismatches += !same;
    report("welch_psd", ts, tp, same);
  }

  {
    auto grid = qpwm::make_frequency_grid(1.0, quick ? 1e4 : 1e6, quick ? 1.0 : 0.5);
    qpwm::AnalyticSpectrum s, p;
    double ts = time_ms([&] { s = qpwm::analytic_spectrum(spec, grid, 8,
                                                          qpwm::ExecMode::Serial); },
                        repeats);
    double tp = time_ms([&] { p = qpwm::analytic_spectrum(spec, grid, 8,
                                                          qpwm::ExecMode::Parallel); },
                        repeats);
    bool same = equal_bits(s.cont, p.cont);
    mismatches += !same;
    report("analytic_spectrum grid", ts, tp, same);
  }

  if (mismatches > 0) {
    std::fprintf(stderr, "FAILURE: %d kernel(s) differ between serial and parallel\n",
                 mismatches);
    return 1;
  }
  return 0;
}
