// Command-line front end for the randomized-PWM spectral toolkit.
//
// Subcommands:
//   synth      generate a seeded width sequence and sampled waveform (CSV)
//   analytic   closed-form continuous spectrum and harmonic lines (CSV)
//   estimate   Welch PSD of a seeded realization (CSV)
//   run        full pipeline with comparison report (CSV + report.json)
//   reproduce  named preset scenarios: table1 table2 fig3 fig4 fig5
//
// Exit codes: 0 success, 2 usage/config error, 1 runtime error.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "qpwm/csv_io.hpp"
#include "qpwm/experiment.hpp"

namespace {

struct Flags {
  std::string config_path;
  double period = 0, duty = 0, amplitude = 0, lambda_t = 0, depth_b = 0;
  std::uint64_t periods = 0;
  double fs = 0;
  int segments = 0;
  std::string window;
  double overlap = 0;
  std::uint64_t seed = 0;
  int kmax = 0;
  int seeds = 0;
  double noise_sigma = 0;
  std::string law;
  std::string out;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; explicit flags override it");
  cmd->add_option("--period", f.period, "pulse period T in seconds");
  cmd->add_option("--duty", f.duty, "duty cycle D in (0,1)");
  cmd->add_option("--amplitude", f.amplitude, "pulse amplitude A in volts");
  cmd->add_option("--lambda-t", f.lambda_t, "mean photon count per period");
  cmd->add_option("--depth-b", f.depth_b, "modulation depth b");
  cmd->add_option("--periods", f.periods, "number of periods to generate");
  cmd->add_option("--fs", f.fs, "sampling rate in Hz (fs*T must be an integer)");
  cmd->add_option("--segments", f.segments, "Welch segment count");
  cmd->add_option("--window", f.window, "Welch window: hann or rectangular")
      ->check(CLI::IsMember({"hann", "rectangular"}));
  cmd->add_option("--overlap", f.overlap, "Welch segment overlap fraction in [0,1)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--kmax", f.kmax, "highest harmonic index to report");
  cmd->add_option("--seeds", f.seeds, "average simulated lines over this many seeds");
  cmd->add_option("--noise-sigma", f.noise_sigma, "detector noise std dev in volts");
  cmd->add_option("--law", f.law, "width law: genwidth or onoff")
      ->check(CLI::IsMember({"genwidth", "onoff"}));
  cmd->add_option("--out", f.out, "output directory");
}

// Flags override the config file, which overrides the defaults.
qpwm::ExperimentConfig build_config(const CLI::App* cmd, const Flags& f) {
  qpwm::ExperimentConfig cfg = qpwm::default_config();
  if (cmd->count("--config") > 0) cfg = qpwm::parse_config(f.config_path);

  double period = cfg.spec.period_t, duty = cfg.spec.duty_d;
  double amplitude = cfg.spec.amplitude_a, depth = cfg.spec.depth_b;
  double lambda_t = cfg.spec.lambda_t;
  if (cmd->count("--period") > 0) period = f.period;
  if (cmd->count("--duty") > 0) duty = f.duty;
  if (cmd->count("--amplitude") > 0) amplitude = f.amplitude;
  if (cmd->count("--lambda-t") > 0) lambda_t = f.lambda_t;
  if (cmd->count("--depth-b") > 0) depth = f.depth_b;
  cfg.spec = qpwm::make_spec(period, duty, amplitude, depth, lambda_t, cfg.spec.sawtooth_amp);

  if (cmd->count("--periods") > 0) cfg.num_periods = f.periods;
  if (cmd->count("--fs") > 0) cfg.sample_rate_fs = f.fs;
  if (cmd->count("--segments") > 0) cfg.num_segments = f.segments;
  if (cmd->count("--window") > 0)
    cfg.window = f.window == "hann" ? qpwm::Window::Hann : qpwm::Window::Rectangular;
  if (cmd->count("--overlap") > 0) cfg.overlap = f.overlap;
  if (cmd->count("--seed") > 0) cfg.seed = f.seed;
  if (cmd->count("--kmax") > 0) cfg.k_max = f.kmax;
  if (cmd->count("--seeds") > 0) cfg.seeds_to_average = f.seeds;
  if (cmd->count("--noise-sigma") > 0) cfg.detector.noise_sigma = f.noise_sigma;
  if (cmd->count("--law") > 0)
    cfg.law = f.law == "onoff" ? qpwm::WidthLaw::OnOff : qpwm::WidthLaw::Genwidth;
  if (cmd->count("--out") > 0) cfg.out_dir = f.out;
  qpwm::validate(cfg);
  return cfg;
}

qpwm::WidthSequence generate(const qpwm::ExperimentConfig& cfg) {
  if (cfg.law == qpwm::WidthLaw::Genwidth)
    return qpwm::generate_width_sequence(cfg.spec, cfg.num_periods, cfg.seed, cfg.detector);
  return qpwm::generate_onoff_sequence(cfg.spec.duty_d, cfg.spec.period_t, cfg.num_periods,
                                       cfg.seed, cfg.spec.amplitude_a);
}

int cmd_synth(const qpwm::ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  auto widths = generate(cfg);
  auto wave = qpwm::synthesize_waveform(widths, cfg.sample_rate_fs);
  qpwm::write_width_csv(cfg.out_dir + "/widths.csv", widths);
  qpwm::write_waveform_csv(cfg.out_dir + "/waveform.csv", wave, cfg.spec, cfg.seed);
  std::cout << "wrote " << cfg.out_dir << "/widths.csv and waveform.csv ("
            << wave.samples.size() << " samples)\n";
  return 0;
}

int cmd_analytic(const qpwm::ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  auto grid = qpwm::make_frequency_grid(cfg.f_grid.f_min, cfg.f_grid.f_max, cfg.f_grid.step);
  qpwm::AnalyticSpectrum spectrum =
      cfg.law == qpwm::WidthLaw::Genwidth
          ? qpwm::analytic_spectrum(cfg.spec, grid, cfg.k_max)
          : qpwm::onoff_analytic_spectrum(cfg.spec.duty_d, cfg.spec.period_t,
                                          cfg.spec.amplitude_a, grid, cfg.k_max);
  std::string meta = qpwm::spec_header_fields(cfg.spec);
  qpwm::write_cont_csv(cfg.out_dir + "/analytic_cont.csv", spectrum.freq, spectrum.cont, meta);
  qpwm::write_lines_csv(cfg.out_dir + "/analytic_lines.csv", spectrum.lines, meta);
  std::vector<qpwm::HarmonicLine> unmod;
  for (int k = 1; k <= cfg.k_max; ++k)
    unmod.push_back({k, k * cfg.spec.f0(), qpwm::unmodulated_harmonic_power(k, cfg.spec)});
  qpwm::write_lines_csv(cfg.out_dir + "/unmod_lines.csv", unmod, meta + " depth_b=0");
  if (spectrum.clip_warning)
    std::cerr << "warning: clipping probability " << qpwm::format_g6(spectrum.clip_probability)
              << " exceeds 1e-3; closed-form spectra are approximate\n";
  std::cout << "wrote " << cfg.out_dir << "/analytic_cont.csv and analytic_lines.csv\n";
  return 0;
}

int cmd_estimate(const qpwm::ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  auto widths = generate(cfg);
  auto wave = qpwm::synthesize_waveform(widths, cfg.sample_rate_fs);
  auto psd = qpwm::welch_psd(wave, cfg.welch());
  for (const auto& w : psd.warnings) std::cerr << "warning: " << w << '\n';
  qpwm::write_psd_csv(cfg.out_dir + "/psd.csv", psd);
  std::cout << "wrote " << cfg.out_dir << "/psd.csv (" << psd.bins.size() << " bins, delta_f="
            << qpwm::format_g6(psd.delta_f) << " Hz)\n";
  return 0;
}

int cmd_run(const qpwm::ExperimentConfig& cfg) {
  qpwm::RunReport report = qpwm::run(cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "report written to " << cfg.out_dir << "/report.json\n";
  std::cout << "k analytic estimated unmodulated\n";
  for (std::size_t i = 0; i < report.analytic_lines.size(); ++i)
    std::cout << report.analytic_lines[i].k << ' '
              << qpwm::format_g6(report.analytic_lines[i].power) << ' '
              << qpwm::format_g6(report.estimated_lines[i].power) << ' '
              << qpwm::format_g6(report.unmodulated_lines[i].power) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral toolkit for photon-count randomized pulse-width modulation"};
  app.require_subcommand(1);

  Flags f;
  CLI::App* synth = app.add_subcommand("synth", "generate widths and waveform CSVs");
  CLI::App* analytic = app.add_subcommand("analytic", "closed-form spectrum CSVs");
  CLI::App* estimate = app.add_subcommand("estimate", "Welch PSD of one realization");
  CLI::App* runcmd = app.add_subcommand("run", "full pipeline with report");
  for (CLI::App* cmd : {synth, analytic, estimate, runcmd}) add_common_flags(cmd, f);

  CLI::App* repro = app.add_subcommand("reproduce", "emit a named preset scenario");
  std::string target;
  std::uint64_t repro_seed = 1;
  std::string repro_out = "out";
  repro->add_option("target", target, "table1, table2, fig3, fig4 or fig5")->required();
  repro->add_option("--seed", repro_seed, "random seed");
  repro->add_option("--out", repro_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (repro->parsed()) {
      qpwm::reproduce(qpwm::parse_reproduce_target(target), repro_seed, repro_out);
      std::cout << "wrote " << target << " artifacts to " << repro_out << '\n';
      return 0;
    }
    const CLI::App* active = synth->parsed()      ? synth
                             : analytic->parsed() ? analytic
                             : estimate->parsed() ? estimate
                                                  : runcmd;
    qpwm::ExperimentConfig cfg = build_config(active, f);
    if (synth->parsed()) return cmd_synth(cfg);
    if (analytic->parsed()) return cmd_analytic(cfg);
    if (estimate->parsed()) return cmd_estimate(cfg);
    return cmd_run(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
