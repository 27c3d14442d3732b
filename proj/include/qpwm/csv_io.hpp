#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpwm/modulation.hpp"
#include "qpwm/spectrum_analytic.hpp"
#include "qpwm/spectrum_estimate.hpp"

namespace qpwm {

// Fixed 6-significant-digit formatting ("%.6g", C locale, "-0" folded to "0").
// Every CSV value goes through this so artifacts are byte-stable across runs.
std::string format_g6(double x);

std::string hex_digest(std::uint64_t digest);

// "key=value" rendering of a modulation spec for CSV header comments.
std::string spec_header_fields(const ModulationSpec& spec);

void write_width_csv(const std::string& path, const WidthSequence& widths);
void write_waveform_csv(const std::string& path, const SampledWaveform& waveform,
                        const ModulationSpec& spec, std::uint64_t seed);
void write_psd_csv(const std::string& path, const PsdEstimate& psd);
void write_lines_csv(const std::string& path, const std::vector<HarmonicLine>& lines,
                     const std::string& comment);
void write_cont_csv(const std::string& path, const std::vector<double>& freq,
                    const std::vector<double>& cont, const std::string& comment);

}  // namespace qpwm
