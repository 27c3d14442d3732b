#include "qpwm/spectrum_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpwm {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Exponent y >= 0 such that E(x) = exp(-y); evaluated through sin^2 so the
// depth-0 and on-grid cases come out exact.
double e_exponent(double x, const ModulationSpec& s) {
  if (s.depth_b == 0.0) return 0.0;
  double a = 2.0 * kPi * x * s.depth_b * s.period_t * s.duty_d / s.lambda_t;
  double sh = std::sin(0.5 * a);
  return 2.0 * s.lambda_t * sh * sh;
}

}  // namespace

std::complex<double> fourier_coefficient(int k, const ModulationSpec& spec) {
  double mag = spec.amplitude_a * spec.duty_d * sinc(k * spec.duty_d);
  return std::polar(1.0, -kPi * k * spec.duty_d) * mag;
}

double unmodulated_harmonic_power(int k, const ModulationSpec& spec) {
  if (k < 1)
    throw std::invalid_argument("unmodulated_harmonic_power: k must be >= 1 (DC is dc_power)");
  // 2|c_k|^2 = 2 A^2 D^2 sinc^2(kD) = 2 A^2 sin^2(pi k D) / (pi k)^2.
  double s = std::sin(kPi * k * spec.duty_d);
  double pk = kPi * k;
  return 2.0 * spec.amplitude_a * spec.amplitude_a * s * s / (pk * pk);
}

double average_power(const ModulationSpec& spec) {
  return spec.amplitude_a * spec.amplitude_a * spec.duty_d;
}

double fourier_power_partial_sum(const ModulationSpec& spec, int k_terms) {
  double sum = dc_power(spec);
  for (int k = 1; k <= k_terms; ++k) sum += unmodulated_harmonic_power(k, spec);
  return sum;
}

double e_factor(double x, const ModulationSpec& spec) {
  return std::exp(-e_exponent(x, spec));
}

double c_factor(double x, const ModulationSpec& spec) {
  double td = spec.period_t * spec.duty_d;
  double a = spec.depth_b == 0.0 ? 0.0 : 2.0 * kPi * x * spec.depth_b * td / spec.lambda_t;
  return std::cos(2.0 * kPi * x * td * (1.0 - spec.depth_b) + spec.lambda_t * std::sin(a));
}

double s_cont(double f, const ModulationSpec& spec) {
  if (!(f > 0.0)) throw std::domain_error("s_cont: f must be > 0");
  if (spec.depth_b == 0.0) return 0.0;  // deterministic train has no continuous part
  double y = e_exponent(f, spec);
  double one_minus_e2 = -std::expm1(-2.0 * y);  // 1 - E^2, exact non-negative
  double a2 = spec.amplitude_a * spec.amplitude_a;
  return a2 / (2.0 * spec.period_t * kPi * kPi * f * f) * one_minus_e2;
}

double s_disc_line(int k, const ModulationSpec& spec) {
  if (k < 1) throw std::invalid_argument("s_disc_line: k must be >= 1 (DC is dc_power)");
  // At depth 0 the bracket reduces algebraically to 2 - 2cos(2 pi k D); return
  // the reduced form so the deterministic limit is exact, not cancellation-limited.
  if (spec.depth_b == 0.0) return unmodulated_harmonic_power(k, spec);
  double x = static_cast<double>(k) / spec.period_t;
  double e = e_factor(x, spec);
  double c = c_factor(x, spec);
  // E^2 - 2EC + 1 rewritten as (E-C)^2 + (1-C)(1+C): a sum of non-negative
  // terms, so the result cannot go negative in floating point.
  double bracket = (e - c) * (e - c) + (1.0 - c) * (1.0 + c);
  double a2 = spec.amplitude_a * spec.amplitude_a;
  return a2 / (2.0 * kPi * kPi * k * k) * bracket;
}

double dc_power(const ModulationSpec& spec) { return dc_power(spec.amplitude_a, spec.duty_d); }

double dc_power(double amplitude_a, double mean_duty) {
  double dc = amplitude_a * mean_duty;
  return dc * dc;
}

double onoff_s_cont(double f, double duty_d, double period_t, double amplitude_a) {
  if (!(f > 0.0)) throw std::domain_error("onoff_s_cont: f must be > 0");
  double lambda_t = onoff_rate_for_duty(duty_d);
  double p0 = std::exp(-lambda_t);  // = 1 - D
  double sh = std::sin(kPi * f * period_t);
  double one_minus_cos = 2.0 * sh * sh;
  double a2 = amplitude_a * amplitude_a;
  return a2 * p0 * (1.0 - p0) * one_minus_cos / (period_t * kPi * kPi * f * f);
}

double clip_probability(const ModulationSpec& spec) {
  if (spec.depth_b == 0.0) return 0.0;
  const double b = spec.depth_b, d = spec.duty_d, l = spec.lambda_t;
  double p = 0.0;
  // Upper tail: raw fraction > 1  <=>  n > l*(1 - d*(1-b)) / (b*d).
  double x_up = l * (1.0 - d * (1.0 - b)) / (b * d);
  double far_tail = l + 40.0 * std::sqrt(l + 1.0) + 40.0;
  if (x_up < 0.0) {
    p += 1.0;  // every count exceeds the bound
  } else if (x_up <= far_tail) {
    p += 1.0 - poisson_cdf(static_cast<std::uint64_t>(std::floor(x_up)), l);
  }
  // Lower tail: raw fraction < 0  <=>  n < l*(b-1)/b (possible only for b > 1).
  if (b > 1.0) {
    double x_lo = l * (b - 1.0) / b;
    auto below = static_cast<std::int64_t>(std::ceil(x_lo)) - 1;
    if (below >= 0) p += poisson_cdf(static_cast<std::uint64_t>(below), l);
  }
  return std::min(p, 1.0);
}

std::vector<double> make_frequency_grid(double f_min, double f_max, double step) {
  if (!(f_min > 0.0) || !(step > 0.0) || !(f_max >= f_min))
    throw std::invalid_argument("frequency grid: need 0 < f_min <= f_max and step > 0");
  auto n = static_cast<std::size_t>(std::floor((f_max - f_min) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = f_min + static_cast<double>(i) * step;
  return grid;
}

namespace {

void check_grid(const std::vector<double>& f_grid) {
  if (f_grid.empty()) throw std::invalid_argument("analytic_spectrum: empty frequency grid");
  double prev = 0.0;
  for (double f : f_grid) {
    if (!(f > prev))
      throw std::invalid_argument("analytic_spectrum: grid must be positive and increasing");
    prev = f;
  }
}

template <class ContFn>
AnalyticSpectrum assemble(const ModulationSpec& spec, WidthLaw law,
                          const std::vector<double>& f_grid, int k_max, ExecMode mode,
                          ContFn cont_at) {
  if (k_max < 1) throw std::invalid_argument("analytic_spectrum: k_max must be >= 1");
  check_grid(f_grid);

  AnalyticSpectrum out;
  out.spec = spec;
  out.law = law;
  out.freq = f_grid;
  out.cont.resize(f_grid.size());

  const auto n = static_cast<std::int64_t>(f_grid.size());
  if (mode == ExecMode::Parallel) {
#ifdef QPWM_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) out.cont[i] = cont_at(f_grid[i]);
  } else {
    for (std::int64_t i = 0; i < n; ++i) out.cont[i] = cont_at(f_grid[i]);
  }

  out.lines.reserve(static_cast<std::size_t>(k_max) + 1);
  out.lines.push_back({0, 0.0, dc_power(spec)});
  for (int k = 1; k <= k_max; ++k) {
    double power = law == WidthLaw::Genwidth ? s_disc_line(k, spec) : 0.0;
    out.lines.push_back({k, static_cast<double>(k) / spec.period_t, power});
  }

  out.clip_probability = law == WidthLaw::Genwidth ? clip_probability(spec) : 0.0;
  out.clip_warning = out.clip_probability > 1e-3;
  return out;
}

}  // namespace

AnalyticSpectrum analytic_spectrum(const ModulationSpec& spec, const std::vector<double>& f_grid,
                                   int k_max, ExecMode mode) {
  return assemble(spec, WidthLaw::Genwidth, f_grid, k_max, mode,
                  [&spec](double f) { return s_cont(f, spec); });
}

AnalyticSpectrum onoff_analytic_spectrum(double duty_d, double period_t, double amplitude_a,
                                         const std::vector<double>& f_grid, int k_max,
                                         ExecMode mode) {
  ModulationSpec spec = make_spec(period_t, duty_d, amplitude_a, 0.0,
                                  onoff_rate_for_duty(duty_d));
  return assemble(spec, WidthLaw::OnOff, f_grid, k_max, mode, [&](double f) {
    return onoff_s_cont(f, duty_d, period_t, amplitude_a);
  });
}

PowerBalance power_balance(const AnalyticSpectrum& spectrum, double f_max, int k_max) {
  const ModulationSpec& spec = spectrum.spec;
  if (!(f_max >= k_max / spec.period_t))
    throw std::invalid_argument("power_balance: f_max must cover k_max harmonics");

  PowerBalance out;
  // Trapezoid over the sampled grid up to f_max, plus the strip between 0 and
  // the first grid point (the density stays finite there; use its first value).
  const auto& f = spectrum.freq;
  const auto& c = spectrum.cont;
  if (!f.empty()) {
    out.cont_integral = f[0] * c[0];
    for (std::size_t i = 0; i + 1 < f.size() && f[i + 1] <= f_max; ++i)
      out.cont_integral += 0.5 * (c[i] + c[i + 1]) * (f[i + 1] - f[i]);
  }
  for (int k = 1; k <= k_max; ++k)
    out.line_sum += spectrum.law == WidthLaw::Genwidth ? s_disc_line(k, spec) : 0.0;
  out.dc = dc_power(spec);
  out.total = out.cont_integral + out.line_sum + out.dc;
  out.target = spec.amplitude_a * spec.amplitude_a * spec.duty_d;
  out.fraction = out.total / out.target;
  return out;
}

}  // namespace qpwm
