#include "pdc/spectral.hpp"

#include "pdc/error.hpp"
#include "pdc/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pdc {

namespace {

const double kAcoshRoot2 = std::acosh(std::sqrt(2.0));
const double kQuarticHalfWidth = std::pow(2.0 * std::log(2.0), 0.25);

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.size() < 2) {
    throw ConfigError(name, "frequency axis needs at least 2 points");
  }
  const double step = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
  if (!(step > 0.0)) {
    throw ConfigError(name, "frequency axis must be strictly increasing");
  }
  const double scale = std::max(std::abs(axis.front()), std::abs(axis.back()));
  for (std::size_t k = 1; k < axis.size(); ++k) {
    const double d = axis[k] - axis[k - 1];
    if (!(d > 0.0) || std::abs(d - step) > 1e-12 * scale) {
      throw ConfigError(name, "frequency axis must be uniformly spaced");
    }
  }
}

std::vector<double> linspace(double center, double half_span, std::size_t n) {
  std::vector<double> v(n);
  const double step = 2.0 * half_span / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = center - half_span + static_cast<double>(k) * step;
  }
  return v;
}

double squared_norm(const Eigen::MatrixXcd& m) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      s += std::norm(m(i, j));
    }
  }
  return s;
}

} // namespace

FrequencyGrid FrequencyGrid::uniform(double signal_center, double idler_center, double half_span,
                                     std::size_t points) {
  if (points < 2) {
    throw ConfigError("grid_points", "need at least 2 points per axis");
  }
  if (!(half_span > 0.0)) {
    throw ConfigError("grid_span", "half span must be > 0");
  }
  if (!(signal_center - half_span > 0.0) || !(idler_center - half_span > 0.0)) {
    throw ConfigError("grid_span", "grid reaches non-positive frequencies");
  }
  FrequencyGrid g{linspace(signal_center, half_span, points), linspace(idler_center, half_span, points)};
  g.validate();
  return g;
}

FrequencyGrid FrequencyGrid::around(const InteractionGeometry& g, double half_span, std::size_t points) {
  return uniform(g.signal_center, g.idler_center, half_span, points);
}

double FrequencyGrid::signal_step() const {
  return (signal_axis.back() - signal_axis.front()) / static_cast<double>(signal_axis.size() - 1);
}

double FrequencyGrid::idler_step() const {
  return (idler_axis.back() - idler_axis.front()) / static_cast<double>(idler_axis.size() - 1);
}

void FrequencyGrid::validate() const {
  check_axis(signal_axis, "signal_axis");
  check_axis(idler_axis, "idler_axis");
}

PulseShape parse_pulse_shape(std::string_view s) {
  if (s == "sech2") {
    return PulseShape::sech2;
  }
  if (s == "gaussian") {
    return PulseShape::gaussian;
  }
  if (s == "cw") {
    return PulseShape::cw;
  }
  throw ConfigError("pump-shape", "unknown pulse shape '" + std::string(s) + "' (sech2, gaussian, cw)");
}

std::string_view to_string(PulseShape s) {
  switch (s) {
  case PulseShape::sech2:
    return "sech2";
  case PulseShape::gaussian:
    return "gaussian";
  case PulseShape::cw:
    return "cw";
  }
  return "?";
}

double PumpEnvelope::intensity_fwhm() const {
  validate();
  const double tau = duration_ps * 1e-12;
  switch (shape) {
  case PulseShape::sech2: {
    const double t0 = tau / (2.0 * kAcoshRoot2);
    return 4.0 * kAcoshRoot2 / (kPi * t0);
  }
  case PulseShape::gaussian: {
    const double t = tau / (2.0 * std::sqrt(std::log(2.0)));
    return 2.0 * std::sqrt(std::log(2.0)) / t;
  }
  case PulseShape::cw:
    return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

void PumpEnvelope::validate() const {
  if (shape != PulseShape::cw && !(duration_ps > 0.0 && std::isfinite(duration_ps))) {
    throw ConfigError("pulse-ps", "pulse duration must be > 0");
  }
  if (!(center > 0.0)) {
    throw ConfigError("pump-center", "pump centre frequency must be > 0");
  }
}

double pump_amplitude(const PumpEnvelope& env, double omega) {
  env.validate();
  if (!std::isfinite(omega)) {
    throw ConfigError("omega", "frequency must be finite");
  }
  const double detuning = omega - env.center;
  const double tau = env.duration_ps * 1e-12;
  switch (env.shape) {
  case PulseShape::sech2: {
    // Intensity sech²(t/T0) in time, amplitude sech(π·T0·Ω/2) in frequency.
    const double t0 = tau / (2.0 * kAcoshRoot2);
    return 1.0 / std::cosh(0.5 * kPi * t0 * detuning);
  }
  case PulseShape::gaussian: {
    const double t = tau / (2.0 * std::sqrt(std::log(2.0)));
    return std::exp(-0.5 * detuning * detuning * t * t);
  }
  case PulseShape::cw:
    return 1.0;
  }
  return 0.0;
}

SpectralFilter SpectralFilter::from_fwhm(double center_wavelength_m, double fwhm_m, Arms arms) {
  if (!(center_wavelength_m > 0.0)) {
    throw ConfigError("filter-center", "centre wavelength must be > 0");
  }
  if (!(fwhm_m > 0.0)) {
    throw ConfigError("filter-fwhm-nm", "filter FWHM must be > 0");
  }
  SpectralFilter f;
  f.center = omega_from_wavelength(center_wavelength_m);
  const double fwhm_omega = 2.0 * kPi * kSpeedOfLight * fwhm_m / (center_wavelength_m * center_wavelength_m);
  f.sigma = fwhm_omega / (2.0 * kQuarticHalfWidth);
  f.arms = arms;
  return f;
}

double SpectralFilter::fwhm() const { return 2.0 * kQuarticHalfWidth * sigma; }

double SpectralFilter::transmission(double omega) const {
  const double u = (omega - center) / sigma;
  const double u2 = u * u;
  return std::exp(-0.5 * u2 * u2);
}

SpectralFilter::Arms parse_filter_arms(std::string_view s) {
  if (s == "signal") {
    return SpectralFilter::Arms::signal;
  }
  if (s == "idler") {
    return SpectralFilter::Arms::idler;
  }
  if (s == "both") {
    return SpectralFilter::Arms::both;
  }
  throw ConfigError("filter-arms", "unknown filter arms '" + std::string(s) + "' (signal, idler, both)");
}

DomainPmf::DomainPmf(const DomainConfiguration& config) {
  config.validate();
  const auto z = config.boundaries_m();
  length_m_ = z.back();
  const std::size_t n = config.size();
  for (std::size_t b = 0; b <= n; ++b) {
    const int before = b == 0 ? 0 : config.signs[b - 1];
    const int after = b == n ? 0 : config.signs[b];
    if (before != after) {
      walls_.push_back(z[b]);
      jumps_.push_back(static_cast<double>(before - after));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double s = config.signs[j];
    const double a = z[j];
    const double b = z[j + 1];
    moment0_ += s * (b - a);
    moment1_ += s * (b * b - a * a) / 2.0;
    moment2_ += s * (b * b * b - a * a * a) / 6.0;
  }
}

std::complex<double> DomainPmf::operator()(double dk) const {
  if (std::abs(dk) * length_m_ < 1e-6) {
    return {moment0_ - dk * dk * moment2_, dk * moment1_};
  }
  double re = 0.0;
  double im = 0.0;
  for (std::size_t b = 0; b < walls_.size(); ++b) {
    const double phase = dk * walls_[b];
    re += jumps_[b] * std::cos(phase);
    im += jumps_[b] * std::sin(phase);
  }
  // (re + i·im)/(i·dk)
  return {im / dk, -re / dk};
}

PhaseMatchingFunction pmf_from_domains(const DomainConfiguration& config, std::span<const double> dk,
                                       std::string provenance) {
  const DomainPmf pmf(config);
  PhaseMatchingFunction out;
  out.provenance = std::move(provenance);
  out.dk.assign(dk.begin(), dk.end());
  out.values.reserve(dk.size());
  for (double q : dk) {
    if (!std::isfinite(q)) {
      throw ConfigError("dk", "phase mismatch values must be finite");
    }
    out.values.push_back(pmf(q));
  }
  return out;
}

void write_pmf_csv(std::ostream& out, const PhaseMatchingFunction& pmf, double grating_wavevector) {
  out << "dk_residual_per_m,re,im\n";
  for (std::size_t k = 0; k < pmf.dk.size(); ++k) {
    out << io::format_double(pmf.dk[k] - grating_wavevector) << ',' << io::format_double(pmf.values[k].real())
        << ',' << io::format_double(pmf.values[k].imag()) << '\n';
  }
}

AnalyticPmf gaussian_residual_pmf(const DispersionModel& model, const InteractionGeometry& g, double width_m) {
  if (!(width_m > 0.0)) {
    throw ConfigError("pmf_width", "must be > 0");
  }
  const double kg = grating_wavevector(model, g);
  return [model, g, kg, width_m](double ws, double wi) {
    const double r = (phase_mismatch(model, g, ws, wi) - kg) * width_m;
    return std::complex<double>(std::exp(-0.5 * r * r), 0.0);
  };
}

Eigen::MatrixXcd pmf_matrix(const PmfSource& source, const DispersionModel& model, const InteractionGeometry& g,
                            const FrequencyGrid& grid) {
  grid.validate();
  const auto ns = static_cast<Eigen::Index>(grid.n_signal());
  const auto ni = static_cast<Eigen::Index>(grid.n_idler());
  Eigen::MatrixXcd phi(ns, ni);

  if (const auto* analytic = std::get_if<AnalyticPmf>(&source)) {
    for (Eigen::Index r = 0; r < ns; ++r) {
      for (Eigen::Index c = 0; c < ni; ++c) {
        phi(r, c) = (*analytic)(grid.signal_axis[r], grid.idler_axis[c]);
      }
    }
    return phi;
  }

  const DomainPmf domains(std::get<DomainConfiguration>(source));
  std::vector<double> ks(ns);
  std::vector<double> ki(ni);
  for (Eigen::Index r = 0; r < ns; ++r) {
    ks[r] = model.wavenumber(grid.signal_axis[r], g.signal_axis);
  }
  for (Eigen::Index c = 0; c < ni; ++c) {
    ki[c] = model.wavenumber(grid.idler_axis[c], g.idler_axis);
  }
  // Range errors are raised before the parallel region.
  model.wavenumber(grid.signal_axis.front() + grid.idler_axis.front(), g.pump_axis);
  model.wavenumber(grid.signal_axis.back() + grid.idler_axis.back(), g.pump_axis);

#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < ns; ++r) {
    for (Eigen::Index c = 0; c < ni; ++c) {
      const double kp = model.wavenumber(grid.signal_axis[r] + grid.idler_axis[c], g.pump_axis);
      phi(r, c) = domains(kp - ks[r] - ki[c]);
    }
  }
  return phi;
}

JointSpectralAmplitude jsa_from_pmf(const Eigen::MatrixXcd& pmf, const PumpEnvelope& env, const FrequencyGrid& grid) {
  env.validate();
  grid.validate();
  if (pmf.rows() != static_cast<Eigen::Index>(grid.n_signal()) ||
      pmf.cols() != static_cast<Eigen::Index>(grid.n_idler())) {
    throw ConfigError("grid", "PMF matrix does not match the frequency grid");
  }
  JointSpectralAmplitude jsa;
  jsa.grid = grid;
  jsa.values.resize(pmf.rows(), pmf.cols());
  for (Eigen::Index c = 0; c < pmf.cols(); ++c) {
    for (Eigen::Index r = 0; r < pmf.rows(); ++r) {
      jsa.values(r, c) = pmf(r, c) * pump_amplitude(env, grid.signal_axis[r] + grid.idler_axis[c]);
    }
  }
  const double cell = grid.signal_step() * grid.idler_step();
  const double n2 = squared_norm(jsa.values) * cell;
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw DataError("joint spectral amplitude vanishes on the grid");
  }
  jsa.norm = std::sqrt(n2);
  jsa.values /= jsa.norm;
  return jsa;
}

JointSpectralAmplitude build_jsa(const PmfSource& pmf, const PumpEnvelope& env, const DispersionModel& model,
                                 const InteractionGeometry& g, const FrequencyGrid& grid) {
  return jsa_from_pmf(pmf_matrix(pmf, model, g, grid), env, grid);
}

JointSpectralAmplitude apply_filter(const JointSpectralAmplitude& jsa, const SpectralFilter& filter) {
  if (!(filter.sigma > 0.0)) {
    throw ConfigError("filter-fwhm-nm", "filter width must be > 0");
  }
  const bool on_signal = filter.arms != SpectralFilter::Arms::idler;
  const bool on_idler = filter.arms != SpectralFilter::Arms::signal;
  JointSpectralAmplitude out = jsa;
  for (Eigen::Index c = 0; c < out.values.cols(); ++c) {
    const double ti = on_idler ? std::sqrt(filter.transmission(jsa.grid.idler_axis[c])) : 1.0;
    for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
      const double ts = on_signal ? std::sqrt(filter.transmission(jsa.grid.signal_axis[r])) : 1.0;
      out.values(r, c) *= ts * ti;
    }
  }
  const double fraction = squared_norm(out.values) / squared_norm(jsa.values);
  if (!(fraction > 0.0)) {
    throw DataError("filter blocks the entire joint spectrum");
  }
  out.transmitted_fraction = jsa.transmitted_fraction * fraction;
  out.norm = jsa.norm * std::sqrt(fraction);
  if (fraction != 1.0) {
    out.values /= std::sqrt(fraction);
  }
  return out;
}

double relative_brightness(const JointSpectralAmplitude& jsa, const JointSpectralAmplitude& reference) {
  if (!(reference.norm > 0.0)) {
    throw ConfigError("reference", "reference amplitude has no recorded norm");
  }
  if (!(jsa.grid == reference.grid)) {
    throw ConfigError("grid", "brightness comparison needs identical grids");
  }
  const double r = jsa.norm / reference.norm;
  return r * r;
}

double default_half_span(const PumpEnvelope& env, double bandwidths) {
  const double w = env.intensity_fwhm();
  if (!std::isfinite(w)) {
    throw ConfigError("grid_span", "cw pump has no bandwidth; give an explicit grid span");
  }
  return bandwidths * w;
}

void write_jsa_intensity_csv(std::ostream& out, const JointSpectralAmplitude& jsa) {
  for (Eigen::Index r = 0; r < jsa.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < jsa.values.cols(); ++c) {
      if (c > 0) {
        out << ',';
      }
      out << io::format_double(std::norm(jsa.values(r, c)));
    }
    out << '\n';
  }
}

void write_jsa_complex_csv(std::ostream& out, const JointSpectralAmplitude& jsa) {
  out << "signal_index,idler_index,re,im\n";
  for (Eigen::Index r = 0; r < jsa.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < jsa.values.cols(); ++c) {
      out << r << ',' << c << ',' << io::format_double(jsa.values(r, c).real()) << ','
          << io::format_double(jsa.values(r, c).imag()) << '\n';
    }
  }
}

io::KeyValueDoc jsa_sidecar(const JointSpectralAmplitude& jsa) {
  io::KeyValueDoc doc;
  doc.set("rows", std::string("signal"));
  doc.set("columns", std::string("idler"));
  doc.set("signal_start_rad_per_s", jsa.grid.signal_axis.front());
  doc.set("signal_step_rad_per_s", jsa.grid.signal_step());
  doc.set("signal_count", static_cast<double>(jsa.grid.n_signal()));
  doc.set("idler_start_rad_per_s", jsa.grid.idler_axis.front());
  doc.set("idler_step_rad_per_s", jsa.grid.idler_step());
  doc.set("idler_count", static_cast<double>(jsa.grid.n_idler()));
  doc.set("norm", jsa.norm);
  doc.set("transmitted_fraction", jsa.transmitted_fraction);
  doc.set("normalization", std::string("sum |f|^2 domega_s domega_i = 1"));
  return doc;
}

} // namespace pdc
