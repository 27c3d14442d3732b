#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <vector>

#include "qpwm/exec.hpp"
#include "qpwm/modulation.hpp"
#include "qpwm/photon_source.hpp"
#include "qpwm/spectrum_analytic.hpp"
#include "qpwm/spectrum_estimate.hpp"

using namespace qpwm;

// Every data-parallel kernel must be bit-identical to its serial reference:
// per-index random streams and fixed-order reductions make the schedule
// irrelevant. These tests run both modes on the same inputs and require
// exact equality, with OpenMP pinned to several threads when available.

namespace {

struct ThreadPin {
  ThreadPin() {
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
  }
};

const ThreadPin pin;  // applies before any kernel in this translation unit runs

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("thread budget is sane") { CHECK(max_threads() >= 1); }

TEST_CASE("width generation matches serially") {
  ModulationSpec spec = make_spec(1e-3, 1.0 / 3.0, 5.0, 1.0, 2.0);
  WidthSequence s = generate_width_sequence(spec, 100000, 17, {}, ExecMode::Serial);
  WidthSequence p = generate_width_sequence(spec, 100000, 17, {}, ExecMode::Parallel);
  CHECK(s.widths == p.widths);
  CHECK(s.clipped_count == p.clipped_count);

  ModulationSpec deep = make_spec(2e-3, 0.4, 1.0, 2.0, 0.7);
  CHECK(generate_width_sequence(deep, 40000, 3, {}, ExecMode::Serial).widths ==
        generate_width_sequence(deep, 40000, 3, {}, ExecMode::Parallel).widths);

  DetectorModel det{1.5, 0.3};
  CHECK(generate_width_sequence(spec, 40000, 5, det, ExecMode::Serial).widths ==
        generate_width_sequence(spec, 40000, 5, det, ExecMode::Parallel).widths);
}

TEST_CASE("on-off generation matches serially") {
  WidthSequence s = generate_onoff_sequence(0.5, 1e-3, 80000, 23, 2.0, ExecMode::Serial);
  WidthSequence p = generate_onoff_sequence(0.5, 1e-3, 80000, 23, 2.0, ExecMode::Parallel);
  CHECK(s.widths == p.widths);
  CHECK(s.clipped_count == p.clipped_count);
}

TEST_CASE("synthesis matches serially") {
  ModulationSpec spec = make_spec(1e-3, 1.0 / 3.0, 5.0, 1.0, 2.0);
  WidthSequence ws = generate_width_sequence(spec, 2000, 29);
  SampledWaveform s = synthesize_waveform(ws, 1e6, ExecMode::Serial);
  SampledWaveform p = synthesize_waveform(ws, 1e6, ExecMode::Parallel);
  CHECK(s.samples == p.samples);
}

TEST_CASE("welch estimation matches serially") {
  ModulationSpec spec = make_spec(1e-3, 1.0 / 3.0, 5.0, 1.0, 2.0);
  SampledWaveform wave = synthesize_waveform(generate_width_sequence(spec, 1000, 31), 1e6);
  WelchConfig cfg{16, Window::Hann, 0.0, 1e6};
  PsdEstimate s = welch_psd(wave, cfg, ExecMode::Serial);
  PsdEstimate p = welch_psd(wave, cfg, ExecMode::Parallel);
  CHECK(s.bins == p.bins);
  CHECK(s.delta_f == p.delta_f);
  CHECK(s.warnings == p.warnings);
  CHECK(s.input_digest == p.input_digest);

  WelchConfig odd{3, Window::Rectangular, 0.25, 1e6};
  PsdEstimate so = welch_psd(wave, odd, ExecMode::Serial);
  PsdEstimate po = welch_psd(wave, odd, ExecMode::Parallel);
  CHECK(so.bins == po.bins);
  CHECK(so.warnings == po.warnings);
}

TEST_CASE("closed-form assembly matches serially") {
  ModulationSpec spec = make_spec(1e-3, 1.0 / 3.0, 5.0, 1.0, 2.0);
  std::vector<double> grid = make_frequency_grid(50.0, 1e6, 33.0);
  REQUIRE(grid.size() > 30000);
  AnalyticSpectrum s = analytic_spectrum(spec, grid, 12, ExecMode::Serial);
  AnalyticSpectrum p = analytic_spectrum(spec, grid, 12, ExecMode::Parallel);
  CHECK(s.cont == p.cont);
  CHECK(s.freq == p.freq);
  REQUIRE(s.lines.size() == p.lines.size());
  for (std::size_t i = 0; i < s.lines.size(); ++i)
    CHECK(s.lines[i].power == p.lines[i].power);

  AnalyticSpectrum os = onoff_analytic_spectrum(0.5, 1e-3, 2.0, grid, 8, ExecMode::Serial);
  AnalyticSpectrum op = onoff_analytic_spectrum(0.5, 1e-3, 2.0, grid, 8, ExecMode::Parallel);
  CHECK(os.cont == op.cont);
  for (std::size_t i = 0; i < os.lines.size(); ++i)
    CHECK(os.lines[i].power == op.lines[i].power);
}

}  // TEST_SUITE
