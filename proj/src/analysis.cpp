#include "pdc/analysis.hpp"

#include "pdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

#include <boost/math/tools/minima.hpp>

namespace pdc {

namespace {

std::vector<double> normalized_values(const Eigen::VectorXd& s) {
  const double scale = 1.0 / s.norm();
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    out[static_cast<std::size_t>(k)] = s(k) * scale;
  }
  return out;
}

template <class Matrix>
SchmidtSpectrum decompose(const Matrix& m, SpectrumSource source) {
  if (m.size() == 0) {
    throw DataError("cannot decompose an empty matrix");
  }
  if (!m.allFinite()) {
    throw DataError("matrix has non-finite entries");
  }
  const double fro = m.norm();
  if (!(fro > 0.0)) {
    throw DataError("cannot decompose a zero matrix");
  }
  const Matrix scaled = m / fro;
  Eigen::BDCSVD<Matrix> svd(scaled);
  SchmidtSpectrum s;
  s.singular_values = normalized_values(svd.singularValues());
  s.source = source;
  return s;
}

// Reduced state of one arm as a plain density matrix with unit trace.
Eigen::MatrixXcd reduced_state(const Eigen::MatrixXcd& f, bool signal_arm) {
  const Eigen::MatrixXcd u = f / f.norm();
  if (signal_arm) {
    return u * u.adjoint();
  }
  return u.transpose() * u.conjugate();
}

bool same_axis(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > 1e-12 * std::abs(a[k])) {
      return false;
    }
  }
  return true;
}

void check_sweep_settings(const SweepSettings& s) {
  s.geometry.validate(true);
  s.pump.validate();
  if (s.grid_points < 2) {
    throw ConfigError("grid_points", "need at least 2 points per axis");
  }
  if (s.half_span < 0.0) {
    throw ConfigError("grid_span", "must be >= 0");
  }
}

SweepResult empty_result(std::string parameter, std::size_t n) {
  SweepResult r;
  r.parameter = std::move(parameter);
  r.values.reserve(n);
  return r;
}

void record(SweepResult& r, double value, const JointSpectralAmplitude& jsa, double brightness, double side_lobes,
            double d_eff) {
  r.values.push_back(value);
  r.purity.push_back(jsa_purity(jsa, SpectrumSource::jsa));
  r.sqrt_jsi_purity.push_back(jsa_purity(jsa, SpectrumSource::sqrt_jsi));
  r.jsi_purity.push_back(jsa_purity(jsa, SpectrumSource::jsi));
  r.relative_brightness.push_back(brightness);
  r.side_lobe_level.push_back(side_lobes);
  r.effective_nonlinearity.push_back(d_eff);
}

} // namespace

std::string_view to_string(SpectrumSource s) {
  switch (s) {
  case SpectrumSource::jsa:
    return "jsa";
  case SpectrumSource::sqrt_jsi:
    return "sqrt_jsi";
  case SpectrumSource::jsi:
    return "jsi";
  }
  return "?";
}

SchmidtSpectrum schmidt_decompose(const Eigen::MatrixXcd& m, SpectrumSource source) { return decompose(m, source); }

SchmidtSpectrum schmidt_decompose(const Eigen::MatrixXd& m, SpectrumSource source) { return decompose(m, source); }

double purity(const SchmidtSpectrum& s) {
  double p = 0.0;
  for (double l : s.singular_values) {
    const double l2 = l * l;
    p += l2 * l2;
  }
  return p;
}

double schmidt_number(const SchmidtSpectrum& s) { return 1.0 / purity(s); }

Eigen::MatrixXd sqrt_jsi(const JointSpectralAmplitude& jsa) { return jsa.values.cwiseAbs(); }

Eigen::MatrixXd jsi(const JointSpectralAmplitude& jsa) { return jsa.values.cwiseAbs2(); }

double jsa_purity(const JointSpectralAmplitude& jsa, SpectrumSource source) {
  switch (source) {
  case SpectrumSource::jsa:
    return purity(schmidt_decompose(jsa.values, source));
  case SpectrumSource::sqrt_jsi:
    return purity(schmidt_decompose(sqrt_jsi(jsa), source));
  case SpectrumSource::jsi:
    return purity(schmidt_decompose(jsi(jsa), source));
  }
  return 0.0;
}

InterferenceArms parse_interference_arms(std::string_view s) {
  if (s == "signal-signal") {
    return InterferenceArms::signal_signal;
  }
  if (s == "idler-idler") {
    return InterferenceArms::idler_idler;
  }
  if (s == "signal-idler") {
    return InterferenceArms::signal_idler;
  }
  throw ConfigError("hom-arms", "unknown arms '" + std::string(s) + "' (signal-signal, idler-idler, signal-idler)");
}

std::string_view to_string(InterferenceArms a) {
  switch (a) {
  case InterferenceArms::signal_signal:
    return "signal-signal";
  case InterferenceArms::idler_idler:
    return "idler-idler";
  case InterferenceArms::signal_idler:
    return "signal-idler";
  }
  return "?";
}

HomResult hom_visibility(const JointSpectralAmplitude& a, const JointSpectralAmplitude& b, InterferenceArms arms,
                         bool scan_delay) {
  if (!(a.grid == b.grid)) {
    throw ConfigError("grid", "HOM overlap needs identical grids");
  }
  if (a.values.size() == 0 || b.values.size() == 0) {
    throw DataError("empty joint spectral amplitude");
  }
  const bool a_signal = arms != InterferenceArms::idler_idler;
  const bool b_signal = arms == InterferenceArms::signal_signal;
  if (arms == InterferenceArms::signal_idler && !same_axis(a.grid.signal_axis, a.grid.idler_axis)) {
    throw ConfigError("hom-arms", "signal-idler interference needs identical signal and idler axes");
  }
  const Eigen::MatrixXcd rho_a = reduced_state(a.values, a_signal);
  const Eigen::MatrixXcd rho_b = reduced_state(b.values, b_signal);
  const Eigen::Index n = rho_a.rows();
  const double step = a_signal ? a.grid.signal_step() : a.grid.idler_step();

  // diag[d + n − 1] = Σ_{col − row = d} ρ_A(row, col)·ρ_B(col, row)
  std::vector<std::complex<double>> diag(static_cast<std::size_t>(2 * n - 1), 0.0);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      diag[static_cast<std::size_t>(c - r + n - 1)] += rho_a(r, c) * rho_b(c, r);
    }
  }
  auto overlap = [&](double tau) {
    double v = 0.0;
    for (Eigen::Index d = -(n - 1); d <= n - 1; ++d) {
      const std::complex<double> s = diag[static_cast<std::size_t>(d + n - 1)];
      const double phase = static_cast<double>(d) * step * tau;
      v += s.real() * std::cos(phase) - s.imag() * std::sin(phase);
    }
    return v;
  };

  HomResult best{overlap(0.0), 0.0};
  if (!scan_delay) {
    return best;
  }
  // V(τ) repeats every 2π/step; scan one period symmetric about 0.
  const Eigen::Index half = 4 * n;
  const double dt = kPi / step / static_cast<double>(half);
  for (Eigen::Index k = -half; k <= half; ++k) {
    const double tau = static_cast<double>(k) * dt;
    const double v = overlap(tau);
    if (v > best.visibility) {
      best = {v, tau};
    }
  }
  const auto [tau_min, neg_v] = boost::math::tools::brent_find_minima(
      [&](double tau) { return -overlap(tau); }, best.delay_s - dt, best.delay_s + dt, 40);
  if (-neg_v > best.visibility) {
    best = {-neg_v, tau_min};
  }
  return best;
}

double side_lobe_level(const DomainConfiguration& config, double grating_wavevector, std::size_t samples) {
  if (samples < 3) {
    throw ConfigError("samples", "need at least 3 samples");
  }
  const DomainPmf pmf(config);
  const double w = 8.0 * kPi / pmf.length_m();
  std::vector<double> mag(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double r = -w + 2.0 * w * static_cast<double>(k) / static_cast<double>(samples - 1);
    mag[k] = std::abs(pmf(grating_wavevector + r));
  }
  const auto peak = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
  if (!(mag[peak] > 0.0)) {
    throw DataError("phase-matching function vanishes across the window");
  }
  double lobe = 0.0;
  for (std::size_t k = 1; k + 1 < samples; ++k) {
    if (k != peak && mag[k] > mag[k - 1] && mag[k] >= mag[k + 1]) {
      lobe = std::max(lobe, mag[k]);
    }
  }
  return lobe / mag[peak];
}

std::size_t SweepResult::best_index() const {
  if (purity.empty()) {
    throw DataError("empty sweep");
  }
  return static_cast<std::size_t>(std::max_element(purity.begin(), purity.end()) - purity.begin());
}

SweepResult sweep_sigma(std::span<const double> sigmas_m, double length_m, const SweepSettings& settings) {
  check_sweep_settings(settings);
  if (sigmas_m.empty()) {
    throw ConfigError("sigma", "sweep needs at least one value");
  }
  for (double s : sigmas_m) {
    if (!(s > 0.0)) {
      throw ConfigError("sigma", "sweep values must be > 0");
    }
  }
  const auto& g = settings.geometry;
  const double half_span = settings.half_span > 0.0 ? settings.half_span : default_half_span(settings.pump);
  const auto grid = FrequencyGrid::around(g, half_span, settings.grid_points);
  const double kg = grating_wavevector(settings.model, g);

  auto finish = [&](JointSpectralAmplitude jsa) {
    return settings.filter ? apply_filter(jsa, *settings.filter) : jsa;
  };
  const auto reference =
      finish(build_jsa(periodic_configuration(length_m, g.poling_period_m), settings.pump, settings.model, g, grid));

  SweepResult r = empty_result("sigma_m", sigmas_m.size());
  for (double sigma : sigmas_m) {
    const auto design = track_domains(TargetProfile::gaussian(length_m, sigma), g.poling_period_m, settings.tracking);
    const auto jsa = finish(build_jsa(design, settings.pump, settings.model, g, grid));
    record(r, sigma, jsa, relative_brightness(jsa, reference), side_lobe_level(design, kg),
           effective_nonlinearity(design, kg));
  }
  return r;
}

SweepResult sweep_pulse_duration(std::span<const double> durations_ps, const DomainConfiguration& crystal,
                                 const SweepSettings& settings) {
  check_sweep_settings(settings);
  if (durations_ps.empty()) {
    throw ConfigError("duration", "sweep needs at least one value");
  }
  for (double d : durations_ps) {
    if (!(d > 0.0)) {
      throw ConfigError("duration", "pulse durations must be > 0");
    }
  }
  const auto& g = settings.geometry;
  double half_span = settings.half_span;
  if (!(half_span > 0.0)) {
    PumpEnvelope widest = settings.pump;
    widest.duration_ps = *std::min_element(durations_ps.begin(), durations_ps.end());
    half_span = default_half_span(widest);
  }
  const auto grid = FrequencyGrid::around(g, half_span, settings.grid_points);
  const double kg = grating_wavevector(settings.model, g);
  const auto phi = pmf_matrix(crystal, settings.model, g, grid);
  const auto phi_ref =
      pmf_matrix(periodic_configuration(crystal.total_length_m(), g.poling_period_m), settings.model, g, grid);
  const double side_lobes = side_lobe_level(crystal, kg);
  const double d_eff = effective_nonlinearity(crystal, kg);

  SweepResult r = empty_result("duration_ps", durations_ps.size());
  for (double d : durations_ps) {
    PumpEnvelope env = settings.pump;
    env.duration_ps = d;
    auto jsa = jsa_from_pmf(phi, env, grid);
    auto ref = jsa_from_pmf(phi_ref, env, grid);
    if (settings.filter) {
      jsa = apply_filter(jsa, *settings.filter);
      ref = apply_filter(ref, *settings.filter);
    }
    record(r, d, jsa, relative_brightness(jsa, ref), side_lobes, d_eff);
  }
  return r;
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << r.parameter
      << ",purity,sqrt_jsi_purity,jsi_purity,relative_brightness,side_lobe_level,effective_nonlinearity\n";
  for (std::size_t k = 0; k < r.size(); ++k) {
    out << io::format_double(r.values[k]) << ',' << io::format_double(r.purity[k]) << ','
        << io::format_double(r.sqrt_jsi_purity[k]) << ',' << io::format_double(r.jsi_purity[k]) << ','
        << io::format_double(r.relative_brightness[k]) << ',' << io::format_double(r.side_lobe_level[k]) << ','
        << io::format_double(r.effective_nonlinearity[k]) << '\n';
  }
}

io::KeyValueDoc sweep_summary(const SweepResult& r) {
  io::KeyValueDoc doc;
  const auto best = r.best_index();
  doc.set("parameter", r.parameter);
  doc.set("points", static_cast<double>(r.size()));
  doc.set("best_value", r.values[best]);
  doc.set("best_purity", r.purity[best]);
  doc.set("best_sqrt_jsi_purity", r.sqrt_jsi_purity[best]);
  doc.set("min_purity", *std::min_element(r.purity.begin(), r.purity.end()));
  doc.set("max_relative_brightness", *std::max_element(r.relative_brightness.begin(), r.relative_brightness.end()));
  return doc;
}

} // namespace pdc
