#include "qpwm/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "qpwm/random.hpp"

namespace qpwm {

std::string format_g6(double x) {
  if (x == 0.0) return "0";  // fold negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string hex_digest(std::uint64_t digest) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

std::string spec_header_fields(const ModulationSpec& spec) {
  std::string s;
  s += "period_t=" + format_g6(spec.period_t);
  s += " duty_d=" + format_g6(spec.duty_d);
  s += " amplitude_a=" + format_g6(spec.amplitude_a);
  s += " depth_b=" + format_g6(spec.depth_b);
  s += " lambda_t=" + format_g6(spec.lambda_t);
  s += " sawtooth_amp=" + format_g6(spec.sawtooth_amp);
  s += " v_ref=" + format_g6(spec.v_ref);
  return s;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: keep '\n' endings everywhere
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_width_csv(const std::string& path, const WidthSequence& widths) {
  auto out = open_out(path);
  out << "# widths seed=" << widths.seed << " clipped_count=" << widths.clipped_count << ' '
      << spec_header_fields(widths.spec) << '\n';
  out << "index,width_seconds\n";
  for (std::size_t i = 0; i < widths.widths.size(); ++i)
    out << i << ',' << format_g6(widths.widths[i]) << '\n';
  finish(out, path);
}

void write_waveform_csv(const std::string& path, const SampledWaveform& waveform,
                        const ModulationSpec& spec, std::uint64_t seed) {
  auto out = open_out(path);
  std::uint64_t digest =
      fnv1a64(waveform.samples.data(), waveform.samples.size() * sizeof(double));
  out << "# waveform seed=" << seed << " sample_rate_fs=" << format_g6(waveform.sample_rate_fs)
      << ' ' << spec_header_fields(spec) << " digest=" << hex_digest(digest) << '\n';
  out << "sample_index,volts\n";
  for (std::size_t i = 0; i < waveform.samples.size(); ++i)
    out << i << ',' << format_g6(waveform.samples[i]) << '\n';
  finish(out, path);
}

void write_psd_csv(const std::string& path, const PsdEstimate& psd) {
  auto out = open_out(path);
  out << "# psd segments=" << psd.n_segments_used << " window=" << window_name(psd.window)
      << " sample_rate_fs=" << format_g6(psd.sample_rate_fs)
      << " delta_f=" << format_g6(psd.delta_f)
      << " input_digest=" << hex_digest(psd.input_digest) << '\n';
  out << "freq_hz,psd_v2_per_hz\n";
  for (std::size_t b = 0; b < psd.bins.size(); ++b)
    out << format_g6(static_cast<double>(b) * psd.delta_f) << ',' << format_g6(psd.bins[b])
        << '\n';
  finish(out, path);
}

void write_lines_csv(const std::string& path, const std::vector<HarmonicLine>& lines,
                     const std::string& comment) {
  auto out = open_out(path);
  out << "# lines " << comment << '\n';
  out << "k,freq_hz,power_v2\n";
  for (const auto& line : lines)
    out << line.k << ',' << format_g6(line.freq) << ',' << format_g6(line.power) << '\n';
  finish(out, path);
}

void write_cont_csv(const std::string& path, const std::vector<double>& freq,
                    const std::vector<double>& cont, const std::string& comment) {
  if (freq.size() != cont.size())
    throw std::invalid_argument("write_cont_csv: freq/cont size mismatch");
  auto out = open_out(path);
  out << "# continuous " << comment << '\n';
  out << "freq_hz,psd_v2_per_hz\n";
  for (std::size_t i = 0; i < freq.size(); ++i)
    out << format_g6(freq[i]) << ',' << format_g6(cont[i]) << '\n';
  finish(out, path);
}

}  // namespace qpwm
