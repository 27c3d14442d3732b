#include "qpwm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "qpwm/csv_io.hpp"

namespace qpwm {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Continuous floor sampled on the PSD bin grid (zero at DC, where the density
// formulas do not apply).
std::vector<double> cont_floor_on_grid(const ExperimentConfig& cfg, const PsdEstimate& psd) {
  std::vector<double> cont(psd.bins.size(), 0.0);
  for (std::size_t b = 1; b < cont.size(); ++b) {
    double f = static_cast<double>(b) * psd.delta_f;
    cont[b] = cfg.law == WidthLaw::Genwidth
                  ? s_cont(f, cfg.spec)
                  : onoff_s_cont(f, cfg.spec.duty_d, cfg.spec.period_t, cfg.spec.amplitude_a);
  }
  return cont;
}

WidthSequence generate_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.law == WidthLaw::Genwidth)
    return generate_width_sequence(cfg.spec, cfg.num_periods, seed, cfg.detector);
  return generate_onoff_sequence(cfg.spec.duty_d, cfg.spec.period_t, cfg.num_periods, seed,
                                 cfg.spec.amplitude_a);
}

// The deterministic train against which the randomized one is compared: same
// duty and amplitude, zero modulation depth.
ExperimentConfig unmodulated_variant(const ExperimentConfig& cfg) {
  ExperimentConfig ref = cfg;
  ref.law = WidthLaw::Genwidth;
  ref.spec = make_spec(cfg.spec.period_t, cfg.spec.duty_d, cfg.spec.amplitude_a, 0.0,
                       cfg.spec.lambda_t, cfg.spec.sawtooth_amp);
  return ref;
}

AnalyticSpectrum spectrum_for(const ExperimentConfig& cfg, const std::vector<double>& grid,
                              int k_max) {
  if (cfg.law == WidthLaw::Genwidth) return analytic_spectrum(cfg.spec, grid, k_max);
  return onoff_analytic_spectrum(cfg.spec.duty_d, cfg.spec.period_t, cfg.spec.amplitude_a, grid,
                                 k_max);
}

json lines_to_json(const std::vector<HarmonicLine>& lines) {
  json arr = json::array();
  for (const auto& l : lines)
    arr.push_back({{"k", l.k}, {"freq_hz", l.freq}, {"power_v2", l.power}});
  return arr;
}

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

void validate(const ExperimentConfig& config) {
  std::string bad;
  auto complain = [&bad](const std::string& msg) {
    if (!bad.empty()) bad += "; ";
    bad += msg;
  };
  try {
    validate(config.spec);
  } catch (const std::invalid_argument& e) {
    complain(e.what());
  }
  try {
    validate(config.detector);
  } catch (const std::invalid_argument& e) {
    complain(e.what());
  }
  if (config.num_periods < 1) complain("periods must be >= 1");
  if (config.num_segments < 1) complain("segments must be >= 1");
  if (config.num_periods < static_cast<std::uint64_t>(config.num_segments))
    complain("periods must be >= segments");
  if (!(config.sample_rate_fs > 0.0)) complain("fs must be > 0");
  if (!(config.overlap >= 0.0 && config.overlap < 1.0)) complain("overlap must be in [0,1)");
  if (config.k_max < 1) complain("kmax must be >= 1");
  if (config.seeds_to_average < 1) complain("seeds must be >= 1");
  if (!(config.f_grid.f_min > 0.0) || !(config.f_grid.f_max >= config.f_grid.f_min) ||
      !(config.f_grid.step > 0.0))
    complain("f-grid needs 0 < f-min <= f-max and f-step > 0");
  double spp = config.sample_rate_fs * config.spec.period_t;
  if (std::abs(spp - std::round(spp)) > 1e-9 * spp || std::round(spp) < 1.0)
    complain("fs * period must be a positive integer (integer samples per period)");
  if (config.out_dir.empty()) complain("out directory must not be empty");
  if (!bad.empty()) throw std::invalid_argument("config: " + bad);
}

void apply_config_json(ExperimentConfig& config, const std::string& json_text,
                       const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(origin + ": not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument(origin + ": top level must be an object");

  double period = config.spec.period_t, duty = config.spec.duty_d;
  double amplitude = config.spec.amplitude_a, depth = config.spec.depth_b;
  double lambda_t = config.spec.lambda_t;
  std::string offenders;
  auto offend = [&offenders](const std::string& msg) {
    if (!offenders.empty()) offenders += "; ";
    offenders += msg;
  };

  auto number = [&](const json& v, const char* key, double& dst) {
    if (!v.is_number()) {
      offend(std::string(key) + " must be a number");
      return;
    }
    dst = v.get<double>();
  };
  auto unsigned_int = [&](const json& v, const char* key, std::uint64_t& dst) {
    if (!v.is_number_integer() || v.get<double>() < 0) {
      offend(std::string(key) + " must be a non-negative integer");
      return;
    }
    dst = v.get<std::uint64_t>();
  };
  auto positive_int = [&](const json& v, const char* key, int& dst) {
    if (!v.is_number_integer() || v.get<double>() < 1) {
      offend(std::string(key) + " must be a positive integer");
      return;
    }
    dst = v.get<int>();
  };

  for (const auto& [key, value] : doc.items()) {
    if (key == "period") number(value, "period", period);
    else if (key == "duty") number(value, "duty", duty);
    else if (key == "amplitude") number(value, "amplitude", amplitude);
    else if (key == "lambda-t") number(value, "lambda-t", lambda_t);
    else if (key == "depth-b") number(value, "depth-b", depth);
    else if (key == "periods") unsigned_int(value, "periods", config.num_periods);
    else if (key == "fs") number(value, "fs", config.sample_rate_fs);
    else if (key == "segments") positive_int(value, "segments", config.num_segments);
    else if (key == "overlap") number(value, "overlap", config.overlap);
    else if (key == "seed") unsigned_int(value, "seed", config.seed);
    else if (key == "kmax") positive_int(value, "kmax", config.k_max);
    else if (key == "seeds") positive_int(value, "seeds", config.seeds_to_average);
    else if (key == "noise-sigma") number(value, "noise-sigma", config.detector.noise_sigma);
    else if (key == "f-min") number(value, "f-min", config.f_grid.f_min);
    else if (key == "f-max") number(value, "f-max", config.f_grid.f_max);
    else if (key == "f-step") number(value, "f-step", config.f_grid.step);
    else if (key == "out") {
      if (!value.is_string()) offend("out must be a string");
      else config.out_dir = value.get<std::string>();
    } else if (key == "window") {
      std::string w = value.is_string() ? value.get<std::string>() : "";
      if (w == "hann") config.window = Window::Hann;
      else if (w == "rectangular") config.window = Window::Rectangular;
      else offend("window must be \"hann\" or \"rectangular\"");
    } else if (key == "law") {
      std::string l = value.is_string() ? value.get<std::string>() : "";
      if (l == "genwidth") config.law = WidthLaw::Genwidth;
      else if (l == "onoff") config.law = WidthLaw::OnOff;
      else offend("law must be \"genwidth\" or \"onoff\"");
    } else {
      offend("unknown key \"" + key + "\"");
    }
  }
  if (!offenders.empty()) throw std::invalid_argument(origin + ": " + offenders);
  config.spec = make_spec(period, duty, amplitude, depth, lambda_t, config.spec.sawtooth_amp);
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ExperimentConfig config = default_config();
  apply_config_json(config, text, path);
  validate(config);
  return config;
}

std::vector<HarmonicLine> estimate_lines(const ExperimentConfig& config, std::uint64_t seed) {
  WidthSequence widths = generate_for(config, seed);
  SampledWaveform wave = synthesize_waveform(widths, config.sample_rate_fs);
  PsdEstimate psd = welch_psd(wave, config.welch());
  std::vector<double> cont = cont_floor_on_grid(config, psd);
  return extract_harmonic_lines(psd, cont, config.spec.f0(), config.k_max);
}

RunReport run(const ExperimentConfig& config) {
  validate(config);
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  auto path = [&](const char* name) { return (fs::path(config.out_dir) / name).string(); };

  RunReport report;
  report.seeds_averaged = config.seeds_to_average;

  // First realization: kept as the artifact waveform/PSD.
  WidthSequence widths = generate_for(config, config.seed);
  SampledWaveform wave = synthesize_waveform(widths, config.sample_rate_fs);
  PsdEstimate psd = welch_psd(wave, config.welch());
  std::vector<double> cont_bins = cont_floor_on_grid(config, psd);
  report.waveform_digest = psd.input_digest;
  report.warnings = psd.warnings;
  report.clipped_fraction_empirical =
      static_cast<double>(widths.clipped_count) / static_cast<double>(config.num_periods);

  // Simulated lines, optionally averaged over consecutive seeds.
  report.estimated_lines = extract_harmonic_lines(psd, cont_bins, config.spec.f0(), config.k_max);
  for (int j = 1; j < config.seeds_to_average; ++j) {
    auto lines = estimate_lines(config, config.seed + static_cast<std::uint64_t>(j));
    for (std::size_t i = 0; i < lines.size(); ++i)
      report.estimated_lines[i].power += lines[i].power;
  }
  for (auto& l : report.estimated_lines)
    l.power /= static_cast<double>(config.seeds_to_average);

  // Closed forms.
  std::vector<double> grid =
      make_frequency_grid(config.f_grid.f_min, config.f_grid.f_max, config.f_grid.step);
  AnalyticSpectrum analytic = spectrum_for(config, grid, config.k_max);
  report.clip_probability_analytic = analytic.clip_probability;
  if (analytic.clip_warning)
    report.warnings.push_back(
        "clipping probability exceeds 1e-3; closed-form spectra are approximate");
  for (int k = 1; k <= config.k_max; ++k) {
    report.analytic_lines.push_back(analytic.lines[static_cast<std::size_t>(k)]);
    report.unmodulated_lines.push_back(
        {k, k * config.spec.f0(), unmodulated_harmonic_power(k, config.spec)});
  }
  for (int k = 0; k < config.k_max; ++k) {
    double u = report.unmodulated_lines[static_cast<std::size_t>(k)].power;
    double m = report.analytic_lines[static_cast<std::size_t>(k)].power;
    report.attenuation_db_analytic.push_back(
        (u > 1e-300 && m > 1e-300) ? attenuation_db(u, m) : kNaN);
  }

  // Same-config unmodulated reference for the peak comparison.
  ExperimentConfig ref = unmodulated_variant(config);
  WidthSequence ref_widths = generate_for(ref, config.seed);
  SampledWaveform ref_wave = synthesize_waveform(ref_widths, config.sample_rate_fs);
  PsdEstimate ref_psd = welch_psd(ref_wave, config.welch());
  report.peak_reduction_db = peak_power_reduction_db(ref_psd, psd);

  // Parseval bookkeeping out to 1000 harmonics on its own fine grid.
  double f0 = config.spec.f0();
  std::vector<double> balance_grid = make_frequency_grid(f0 / 20.0, 1000.0 * f0, f0 / 20.0);
  report.balance = power_balance(spectrum_for(config, balance_grid, 8), 1000.0 * f0, 1000);

  // Artifacts.
  write_width_csv(path("widths.csv"), widths);
  write_psd_csv(path("psd.csv"), psd);
  std::string meta = spec_header_fields(config.spec) + " seed=" + std::to_string(config.seed);
  write_cont_csv(path("analytic_cont.csv"), analytic.freq, analytic.cont, meta);
  write_lines_csv(path("analytic_lines.csv"), analytic.lines, meta);
  write_lines_csv(path("unmod_lines.csv"), report.unmodulated_lines, meta + " depth_b=0");
  write_lines_csv(path("estimated_lines.csv"), report.estimated_lines,
                  meta + " seeds=" + std::to_string(config.seeds_to_average) +
                      " input_digest=" + hex_digest(psd.input_digest));

  json rep;
  rep["config"] = {{"period", config.spec.period_t},
                   {"duty", config.spec.duty_d},
                   {"amplitude", config.spec.amplitude_a},
                   {"depth-b", config.spec.depth_b},
                   {"lambda-t", config.spec.lambda_t},
                   {"law", config.law == WidthLaw::Genwidth ? "genwidth" : "onoff"},
                   {"periods", config.num_periods},
                   {"fs", config.sample_rate_fs},
                   {"segments", config.num_segments},
                   {"window", window_name(config.window)},
                   {"overlap", config.overlap},
                   {"seed", config.seed},
                   {"kmax", config.k_max},
                   {"seeds", config.seeds_to_average},
                   {"noise-sigma", config.detector.noise_sigma}};
  rep["analytic_lines"] = lines_to_json(report.analytic_lines);
  rep["estimated_lines"] = lines_to_json(report.estimated_lines);
  rep["unmodulated_lines"] = lines_to_json(report.unmodulated_lines);
  rep["attenuation_db"] = report.attenuation_db_analytic;  // NaN serializes as null
  rep["peak_reduction_db"] = report.peak_reduction_db;
  rep["clip_probability"] = report.clip_probability_analytic;
  rep["clipped_fraction"] = report.clipped_fraction_empirical;
  rep["power_balance"] = {{"cont_integral", report.balance.cont_integral},
                          {"line_sum", report.balance.line_sum},
                          {"dc", report.balance.dc},
                          {"total", report.balance.total},
                          {"target", report.balance.target},
                          {"fraction", report.balance.fraction}};
  rep["waveform_digest"] = hex_digest(report.waveform_digest);
  rep["seeds_averaged"] = report.seeds_averaged;
  rep["warnings"] = report.warnings;

  std::ofstream out(path("report.json"), std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path("report.json"));
  out << rep.dump(2) << '\n';
  if (!out.flush()) throw std::runtime_error("write failed: report.json");
  return report;
}

ReproduceTarget parse_reproduce_target(const std::string& name) {
  if (name == "table1") return ReproduceTarget::Table1;
  if (name == "table2") return ReproduceTarget::Table2;
  if (name == "fig3") return ReproduceTarget::Fig3;
  if (name == "fig4") return ReproduceTarget::Fig4;
  if (name == "fig5") return ReproduceTarget::Fig5;
  throw std::invalid_argument("unknown reproduce target: " + name +
                              " (expected table1, table2, fig3, fig4 or fig5)");
}

ExperimentConfig preset_table1() { return default_config(); }

ExperimentConfig preset_table2() {
  ExperimentConfig cfg = default_config();
  cfg.spec = make_spec(1e-3, 0.25, 5.0, 0.5, 0.3);
  return cfg;
}

ExperimentConfig preset_onoff() {
  ExperimentConfig cfg = default_config();
  cfg.law = WidthLaw::OnOff;
  cfg.spec = make_spec(1e-3, 0.5, 2.0, 0.0, onoff_rate_for_duty(0.5));
  return cfg;
}

namespace {

void reproduce_table(const ExperimentConfig& preset, const char* name, std::uint64_t seed,
                     const std::string& out_dir) {
  ExperimentConfig cfg = preset;
  cfg.seed = seed;
  validate(cfg);
  auto simulated = estimate_lines(cfg, seed);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / (std::string(name) + ".csv"), std::ios::binary);
  if (!out) throw std::runtime_error("cannot open table CSV for writing");
  out << "# target=" << name << " seed=" << seed << ' ' << spec_header_fields(cfg.spec)
      << " segments=" << cfg.num_segments << " window=" << window_name(cfg.window) << '\n';
  out << "row";
  for (int k = 1; k <= cfg.k_max; ++k) out << ",k" << k;
  out << '\n';

  out << "unmodulated";
  for (int k = 1; k <= cfg.k_max; ++k)
    out << ',' << format_g6(unmodulated_harmonic_power(k, cfg.spec));
  out << '\n';
  out << "analytic";
  for (int k = 1; k <= cfg.k_max; ++k) out << ',' << format_g6(s_disc_line(k, cfg.spec));
  out << '\n';
  out << "simulated";
  for (const auto& line : simulated) out << ',' << format_g6(line.power);
  out << '\n';
  if (!out.flush()) throw std::runtime_error("write failed: table CSV");
}

void reproduce_figure(const ExperimentConfig& preset, const char* name, std::uint64_t seed,
                      const std::string& out_dir) {
  ExperimentConfig cfg = preset;
  cfg.seed = seed;
  validate(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const std::string& suffix) {
    return (fs::path(out_dir) / (std::string(name) + suffix)).string();
  };

  WidthSequence widths = generate_for(cfg, seed);
  SampledWaveform wave = synthesize_waveform(widths, cfg.sample_rate_fs);
  PsdEstimate psd = welch_psd(wave, cfg.welch());

  // The figures show the 0..10 kHz range.
  const double f_hi = 10000.0;
  auto keep = static_cast<std::size_t>(std::floor(f_hi / psd.delta_f)) + 1;
  keep = std::min(keep, psd.bins.size());

  PsdEstimate clipped = psd;
  clipped.bins.assign(psd.bins.begin(), psd.bins.begin() + static_cast<std::ptrdiff_t>(keep));
  write_psd_csv(path("_psd.csv"), clipped);

  std::vector<double> freq(keep), cont(keep, 0.0);
  for (std::size_t b = 0; b < keep; ++b) {
    freq[b] = static_cast<double>(b) * psd.delta_f;
    if (b > 0)
      cont[b] = cfg.law == WidthLaw::Genwidth
                    ? s_cont(freq[b], cfg.spec)
                    : onoff_s_cont(freq[b], cfg.spec.duty_d, cfg.spec.period_t,
                                   cfg.spec.amplitude_a);
  }
  write_cont_csv(path("_analytic_cont.csv"), freq, cont,
                 spec_header_fields(cfg.spec) + " seed=" + std::to_string(seed));

  ExperimentConfig ref = unmodulated_variant(cfg);
  WidthSequence ref_widths = generate_for(ref, seed);
  SampledWaveform ref_wave = synthesize_waveform(ref_widths, cfg.sample_rate_fs);
  PsdEstimate ref_psd = welch_psd(ref_wave, cfg.welch());
  PsdEstimate ref_clipped = ref_psd;
  ref_clipped.bins.assign(ref_psd.bins.begin(),
                          ref_psd.bins.begin() + static_cast<std::ptrdiff_t>(keep));
  write_psd_csv(path("_unmod_psd.csv"), ref_clipped);
}

}  // namespace

void reproduce(ReproduceTarget target, std::uint64_t seed, const std::string& out_dir) {
  switch (target) {
    case ReproduceTarget::Table1: reproduce_table(preset_table1(), "table1", seed, out_dir); break;
    case ReproduceTarget::Table2: reproduce_table(preset_table2(), "table2", seed, out_dir); break;
    case ReproduceTarget::Fig3: reproduce_figure(preset_table1(), "fig3", seed, out_dir); break;
    case ReproduceTarget::Fig4: reproduce_figure(preset_table2(), "fig4", seed, out_dir); break;
    case ReproduceTarget::Fig5: reproduce_figure(preset_onoff(), "fig5", seed, out_dir); break;
  }
}

}  // namespace qpwm
