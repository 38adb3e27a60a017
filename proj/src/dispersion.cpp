#include "pdc/dispersion.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace pdc {

namespace {

constexpr std::array<std::string_view, 3> kAxisNames{"x", "y", "z"};

double to_um(double omega) { return wavelength_from_omega(omega) * 1e6; }

std::pair<double, double> parse_pair(const std::string& value, const std::string& key) {
  const auto parts = io::split(value, ',');
  if (parts.size() != 2) {
    throw DataError(key + ": expected two comma-separated numbers, got '" + value + "'");
  }
  const auto b = io::parse_double(parts[0]);
  const auto c = io::parse_double(parts[1]);
  if (!b || !c) {
    throw DataError(key + ": not a number pair: '" + value + "'");
  }
  return {*b, *c};
}

} // namespace

Axis parse_axis(std::string_view s) {
  for (std::size_t i = 0; i < kAxisNames.size(); ++i) {
    if (s == kAxisNames[i]) {
      return static_cast<Axis>(i);
    }
  }
  throw ConfigError("axis", "unknown polarization axis '" + std::string(s) + "' (expected x, y or z)");
}

std::string_view to_string(Axis a) { return kAxisNames[static_cast<int>(a)]; }

double SellmeierAxis::index_squared(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  double n2 = a - ir_term * l2;
  for (const auto& [b, c] : poles) {
    n2 += b / (l2 - c);
  }
  for (const auto& [d, e] : scaled_poles) {
    n2 += d * l2 / (l2 - e);
  }
  return n2;
}

double SellmeierAxis::index_squared_slope(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  double s = -2.0 * ir_term * lambda_um;
  for (const auto& [b, c] : poles) {
    const double den = l2 - c;
    s -= 2.0 * b * lambda_um / (den * den);
  }
  for (const auto& [d, e] : scaled_poles) {
    const double den = l2 - e;
    s -= 2.0 * d * e * lambda_um / (den * den);
  }
  return s;
}

DispersionModel::DispersionModel(std::string name, std::array<std::optional<SellmeierAxis>, 3> axes,
                                 double valid_min_um, double valid_max_um, double reference_temperature_c)
    : name_(std::move(name)),
      axes_(std::move(axes)),
      valid_min_um_(valid_min_um),
      valid_max_um_(valid_max_um),
      reference_temperature_c_(reference_temperature_c),
      temperature_c_(reference_temperature_c) {
  if (!(valid_min_um_ > 0.0) || !(valid_max_um_ > valid_min_um_)) {
    throw ConfigError("valid_range", "need 0 < valid_min_um < valid_max_um");
  }
  bool any = false;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (!axes_[i]) {
      continue;
    }
    any = true;
    // The index must stay real and at least 1 across the whole validity interval.
    constexpr int kSamples = 256;
    for (int k = 0; k <= kSamples; ++k) {
      const double lam = valid_min_um_ + (valid_max_um_ - valid_min_um_) * k / kSamples;
      const double n2 = axes_[i]->index_squared(lam);
      if (!std::isfinite(n2) || n2 < 1.0) {
        throw ConfigError(std::string(kAxisNames[i]) + ".A",
                          "refractive index not real and >= 1 at " + io::format_double(lam) + " um");
      }
    }
  }
  if (!any) {
    throw ConfigError("axes", "dispersion model defines no axis");
  }
}

DispersionModel DispersionModel::ktp() {
  SellmeierAxis y;
  y.a = 2.09930;
  y.scaled_poles = {{0.922683, 0.0467695}};
  y.ir_term = 0.0138408;
  y.dn_dt = 1.3e-5;

  SellmeierAxis z;
  z.a = 2.12725;
  z.scaled_poles = {{1.18431, 0.0514852}, {0.6603, 100.00507}};
  z.ir_term = 9.68956e-3;
  z.dn_dt = 1.6e-5;

  return DispersionModel("KTP (n_y Koenig-Wong 2004, n_z Fradkin 1999)", {std::nullopt, y, z}, 0.4, 3.5, 25.0);
}

DispersionModel DispersionModel::vacuum() {
  SellmeierAxis unit;
  return DispersionModel("vacuum", {unit, unit, unit}, 0.1, 100.0);
}

DispersionModel DispersionModel::from_key_values(const io::KeyValueDoc& doc, const std::string& source_name) {
  std::array<std::optional<SellmeierAxis>, 3> axes;
  std::string name = "unnamed";
  double vmin = std::numeric_limits<double>::quiet_NaN();
  double vmax = std::numeric_limits<double>::quiet_NaN();
  double tref = 25.0;
  std::optional<double> temperature;
  std::set<std::string> scalar_seen;

  auto number = [&](const std::string& key, const std::string& value) {
    const auto v = io::parse_double(value);
    if (!v) {
      throw DataError(source_name + ": " + key + ": not a number: '" + value + "'");
    }
    return *v;
  };

  for (const auto& [key, value] : doc.entries) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      if (!scalar_seen.insert(key).second) {
        throw DataError(source_name + ": duplicate key '" + key + "'");
      }
      if (key == "name") {
        name = value;
      } else if (key == "valid_min_um") {
        vmin = number(key, value);
      } else if (key == "valid_max_um") {
        vmax = number(key, value);
      } else if (key == "reference_temperature_c") {
        tref = number(key, value);
      } else if (key == "temperature_c") {
        temperature = number(key, value);
      } else {
        throw DataError(source_name + ": unknown key '" + key + "'");
      }
      continue;
    }
    const auto axis_name = key.substr(0, dot);
    const auto field = key.substr(dot + 1);
    Axis ax{};
    try {
      ax = parse_axis(axis_name);
    } catch (const ConfigError&) {
      throw DataError(source_name + ": unknown axis in key '" + key + "'");
    }
    auto& slot = axes[static_cast<int>(ax)];
    if (!slot) {
      slot.emplace();
      slot->a = 0.0;
    }
    if (field == "pole" || field == "scaled_pole") {
      (field == "pole" ? slot->poles : slot->scaled_poles).push_back(parse_pair(value, key));
      continue;
    }
    if (!scalar_seen.insert(key).second) {
      throw DataError(source_name + ": duplicate key '" + key + "'");
    }
    if (field == "A") {
      slot->a = number(key, value);
    } else if (field == "F") {
      slot->ir_term = number(key, value);
    } else if (field == "dn_dT") {
      slot->dn_dt = number(key, value);
    } else {
      throw DataError(source_name + ": unknown key '" + key + "'");
    }
  }
  if (std::isnan(vmin) || std::isnan(vmax)) {
    throw DataError(source_name + ": valid_min_um and valid_max_um are required");
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] && !scalar_seen.count(std::string(kAxisNames[i]) + ".A")) {
      throw DataError(source_name + ": axis " + std::string(kAxisNames[i]) + " is missing its A term");
    }
  }
  DispersionModel model(name, axes, vmin, vmax, tref);
  return temperature ? model.at_temperature(*temperature) : model;
}

DispersionModel DispersionModel::from_file(const std::filesystem::path& path) {
  return from_key_values(io::read_key_values(path), path.string());
}

io::KeyValueDoc DispersionModel::to_key_values() const {
  io::KeyValueDoc doc;
  doc.entries.emplace_back("name", name_);
  doc.entries.emplace_back("valid_min_um", io::format_double(valid_min_um_));
  doc.entries.emplace_back("valid_max_um", io::format_double(valid_max_um_));
  doc.entries.emplace_back("reference_temperature_c", io::format_double(reference_temperature_c_));
  if (temperature_c_ != reference_temperature_c_) {
    doc.entries.emplace_back("temperature_c", io::format_double(temperature_c_));
  }
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (!axes_[i]) {
      continue;
    }
    const std::string p(kAxisNames[i]);
    const auto& ax = *axes_[i];
    doc.entries.emplace_back(p + ".A", io::format_double(ax.a));
    for (const auto& [b, c] : ax.poles) {
      doc.entries.emplace_back(p + ".pole", io::format_double(b) + ", " + io::format_double(c));
    }
    for (const auto& [d, e] : ax.scaled_poles) {
      doc.entries.emplace_back(p + ".scaled_pole", io::format_double(d) + ", " + io::format_double(e));
    }
    doc.entries.emplace_back(p + ".F", io::format_double(ax.ir_term));
    doc.entries.emplace_back(p + ".dn_dT", io::format_double(ax.dn_dt));
  }
  return doc;
}

DispersionModel DispersionModel::at_temperature(double celsius) const {
  if (!std::isfinite(celsius)) {
    throw ConfigError("temperature_c", "must be finite");
  }
  DispersionModel copy = *this;
  copy.temperature_c_ = celsius;
  return copy;
}

const SellmeierAxis& DispersionModel::axis(Axis a) const {
  const auto& slot = axes_[static_cast<int>(a)];
  if (!slot) {
    throw RangeError("dispersion model '" + name_ + "' has no " + std::string(to_string(a)) + " axis");
  }
  return *slot;
}

void DispersionModel::check_range(double lambda_um) const {
  if (!(lambda_um >= valid_min_um_ && lambda_um <= valid_max_um_)) {
    throw RangeError("wavelength " + io::format_double(lambda_um) + " um outside valid range [" +
                     io::format_double(valid_min_um_) + ", " + io::format_double(valid_max_um_) + "] of '" +
                     name_ + "'");
  }
}

double DispersionModel::refractive_index(double lambda_um, Axis a) const {
  const auto& ax = axis(a);
  check_range(lambda_um);
  return std::sqrt(ax.index_squared(lambda_um)) + ax.dn_dt * (temperature_c_ - reference_temperature_c_);
}

double DispersionModel::group_index(double lambda_um, Axis a) const {
  const auto& ax = axis(a);
  check_range(lambda_um);
  const double n0 = std::sqrt(ax.index_squared(lambda_um));
  const double dn_dlambda = ax.index_squared_slope(lambda_um) / (2.0 * n0);
  const double n = n0 + ax.dn_dt * (temperature_c_ - reference_temperature_c_);
  return n - lambda_um * dn_dlambda;
}

double DispersionModel::wavenumber(double omega, Axis a) const {
  return refractive_index(to_um(omega), a) * omega / kSpeedOfLight;
}

double DispersionModel::inverse_group_velocity(double omega, Axis a, GroupVelocityMethod method) const {
  if (method == GroupVelocityMethod::analytic) {
    return group_index(to_um(omega), a) / kSpeedOfLight;
  }
  const double h = 1e-4 * omega;
  return (wavenumber(omega + h, a) - wavenumber(omega - h, a)) / (2.0 * h);
}

InteractionGeometry InteractionGeometry::degenerate(double pump_wavelength_m, Axis pump, Axis signal, Axis idler) {
  InteractionGeometry g;
  g.pump_axis = pump;
  g.signal_axis = signal;
  g.idler_axis = idler;
  g.pump_center = omega_from_wavelength(pump_wavelength_m);
  g.signal_center = 0.5 * g.pump_center;
  g.idler_center = 0.5 * g.pump_center;
  return g;
}

InteractionGeometry InteractionGeometry::with_signal(double pump_wavelength_m, double signal_wavelength_m,
                                                     Axis pump, Axis signal, Axis idler) {
  InteractionGeometry g;
  g.pump_axis = pump;
  g.signal_axis = signal;
  g.idler_axis = idler;
  g.pump_center = omega_from_wavelength(pump_wavelength_m);
  g.signal_center = omega_from_wavelength(signal_wavelength_m);
  g.idler_center = g.pump_center - g.signal_center;
  if (!(g.idler_center > 0.0)) {
    throw ConfigError("signal_wavelength", "signal frequency must be below the pump frequency");
  }
  return g;
}

InteractionGeometry InteractionGeometry::ktp_type2() { return degenerate(774.9e-9, Axis::y, Axis::y, Axis::z); }

void InteractionGeometry::validate(bool require_period) const {
  if (!(pump_center > 0.0 && signal_center > 0.0 && idler_center > 0.0)) {
    throw ConfigError("center_frequency", "pump, signal and idler centre frequencies must be positive");
  }
  const double mismatch = std::abs(pump_center - (signal_center + idler_center));
  if (mismatch > 4.0 * std::numeric_limits<double>::epsilon() * pump_center) {
    throw ConfigError("center_frequency", "pump_center must equal signal_center + idler_center");
  }
  if (require_period && !(poling_period_m > 0.0)) {
    throw ConfigError("poling_period", "must be > 0");
  }
}

double phase_mismatch(const DispersionModel& model, const InteractionGeometry& g, double omega_s, double omega_i) {
  return model.wavenumber(omega_s + omega_i, g.pump_axis) - model.wavenumber(omega_s, g.signal_axis) -
         model.wavenumber(omega_i, g.idler_axis);
}

double grating_wavevector(const DispersionModel& model, const InteractionGeometry& g) {
  g.validate(true);
  const double dk0 = phase_mismatch(model, g, g.signal_center, g.idler_center);
  const double k = 2.0 * kPi / g.poling_period_m;
  return dk0 < 0.0 ? -k : k;
}

double qpm_residual(const DispersionModel& model, const InteractionGeometry& g, double omega_s, double omega_i) {
  return phase_mismatch(model, g, omega_s, omega_i) - grating_wavevector(model, g);
}

double gvm_residual(const DispersionModel& model, const InteractionGeometry& g, GroupVelocityMethod method) {
  g.validate(false);
  const double kp = model.inverse_group_velocity(g.pump_center, g.pump_axis, method);
  const double ks = model.inverse_group_velocity(g.signal_center, g.signal_axis, method);
  const double ki = model.inverse_group_velocity(g.idler_center, g.idler_axis, method);
  return kp - 0.5 * (ks + ki);
}

double poling_period(const DispersionModel& model, const InteractionGeometry& g) {
  g.validate(false);
  const double dk0 = phase_mismatch(model, g, g.signal_center, g.idler_center);
  if (dk0 == 0.0) {
    throw NoPhaseMismatch("phase mismatch vanishes at the centre frequencies; no poling period exists");
  }
  return 2.0 * kPi / std::abs(dk0);
}

InteractionGeometry with_poling_period(const DispersionModel& model, InteractionGeometry g) {
  g.poling_period_m = poling_period(model, g);
  return g;
}

} // namespace pdc
