#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpwm/modulation.hpp"
#include "qpwm/spectrum_analytic.hpp"
#include "qpwm/spectrum_estimate.hpp"

namespace qpwm {

// Frequency grid for the analytic-spectrum CSV artifacts.
struct FrequencyGridSpec {
  double f_min = 1.0;
  double f_max = 10000.0;
  double step = 1.0;
};

// Everything one experiment needs. Defaults reproduce the primary reference
// scenario: T = 1 ms, D = 1/3, A = 5 V, b = 1, lambda_t = 2, 1000 periods
// sampled at 1 MHz, 16 non-overlapping Hann segments.
struct ExperimentConfig {
  ModulationSpec spec;
  DetectorModel detector;
  WidthLaw law = WidthLaw::Genwidth;
  std::uint64_t num_periods = 1000;
  double sample_rate_fs = 1e6;
  int num_segments = 16;
  Window window = Window::Hann;
  double overlap = 0.0;
  std::uint64_t seed = 1;
  int k_max = 8;
  int seeds_to_average = 1;  // simulated rows use seed..seed+N-1
  FrequencyGridSpec f_grid;
  std::string out_dir = "out";

  WelchConfig welch() const {
    return WelchConfig{num_segments, window, overlap, sample_rate_fs};
  }
};

ExperimentConfig default_config();

// Throws std::invalid_argument listing every violated field.
void validate(const ExperimentConfig& config);

// Flat JSON object with keys mirroring the CLI flags ("period", "duty",
// "amplitude", "lambda-t", "depth-b", "periods", "fs", "segments", "window",
// "overlap", "seed", "kmax", "noise-sigma", "out", "law", "seeds", "f-min",
// "f-max", "f-step"). Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& path);

// Apply one JSON document on top of an existing config (used by parse_config
// and by tests); `origin` names the source in error messages.
void apply_config_json(ExperimentConfig& config, const std::string& json_text,
                       const std::string& origin);

struct RunReport {
  std::vector<HarmonicLine> analytic_lines;     // k = 1..k_max
  std::vector<HarmonicLine> estimated_lines;    // averaged over seeds_to_average
  std::vector<HarmonicLine> unmodulated_lines;  // deterministic train, same duty
  std::vector<double> attenuation_db_analytic;  // NaN where a power vanishes
  double peak_reduction_db = 0.0;               // same-config unmodulated vs modulated
  double clip_probability_analytic = 0.0;
  double clipped_fraction_empirical = 0.0;
  PowerBalance balance;
  std::uint64_t waveform_digest = 0;
  int seeds_averaged = 1;
  std::vector<std::string> warnings;
};

// synthesize -> welch -> extract -> compare; deterministic given the seed.
// Writes widths.csv, psd.csv, analytic_cont.csv, analytic_lines.csv,
// unmod_lines.csv, estimated_lines.csv and report.json into config.out_dir.
RunReport run(const ExperimentConfig& config);

// Harmonic lines k = 1..k_max extracted from one seeded realization.
std::vector<HarmonicLine> estimate_lines(const ExperimentConfig& config, std::uint64_t seed);

enum class ReproduceTarget { Table1, Table2, Fig3, Fig4, Fig5 };

ReproduceTarget parse_reproduce_target(const std::string& name);

// Named presets: emit a three-row harmonic table (unmodulated / analytic /
// simulated) for the table targets, or plottable PSD + overlay CSVs for the
// figure targets.
void reproduce(ReproduceTarget target, std::uint64_t seed, const std::string& out_dir);

// Canned parameter sets behind the reproduce targets.
ExperimentConfig preset_table1();
ExperimentConfig preset_table2();
ExperimentConfig preset_onoff();  // on-off law, D = 0.5, A = 2

}  // namespace qpwm
