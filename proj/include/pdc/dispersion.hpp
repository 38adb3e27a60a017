#pragma once

// Material dispersion: Sellmeier refractive indices, wavevectors, the
// three-wave phase mismatch and the quasi-phase-matching period.
//
// Units: wavelengths in µm where named `_um`, angular frequencies in rad/s,
// wavevectors in rad/m, lengths in m unless the name says otherwise.

#include <array>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdc/error.hpp"
#include "pdc/text_io.hpp"

namespace pdc {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = std::numbers::pi;

enum class Axis { x = 0, y = 1, z = 2 };

Axis parse_axis(std::string_view s);
std::string_view to_string(Axis a);

/// Wavelength (m) <-> angular frequency (rad/s).
inline double omega_from_wavelength(double wavelength_m) { return 2.0 * kPi * kSpeedOfLight / wavelength_m; }
inline double wavelength_from_omega(double omega) { return 2.0 * kPi * kSpeedOfLight / omega; }

/// Coefficients of one crystal axis:
///   n²(λ) = A + Σ B/(λ² − C) + Σ D·λ²/(λ² − E) − F·λ²      (λ in µm)
/// plus a constant thermo-optic coefficient dn/dT.
struct SellmeierAxis {
  double a = 1.0;
  std::vector<std::pair<double, double>> poles;        // (B, C)
  std::vector<std::pair<double, double>> scaled_poles; // (D, E)
  double ir_term = 0.0;                                // F
  double dn_dt = 0.0;                                  // 1/K

  double index_squared(double lambda_um) const;
  /// d(n²)/dλ, per µm.
  double index_squared_slope(double lambda_um) const;
};

enum class GroupVelocityMethod { analytic, finite_difference };

class DispersionModel {
public:
  DispersionModel(std::string name, std::array<std::optional<SellmeierAxis>, 3> axes, double valid_min_um,
                  double valid_max_um, double reference_temperature_c = 25.0);

  /// KTP, n_y from König & Wong (2004), n_z from Fradkin et al. (1999).
  static DispersionModel ktp();
  /// n ≡ 1 on all axes.
  static DispersionModel vacuum();
  /// Reads the `key = value` schema described in README.md.
  static DispersionModel from_key_values(const io::KeyValueDoc& doc, const std::string& source_name = "model");
  static DispersionModel from_file(const std::filesystem::path& path);
  io::KeyValueDoc to_key_values() const;

  /// Copy operating at `celsius`; the linear thermo-optic correction is
  /// dn/dT·(T − T_ref) on every axis.
  DispersionModel at_temperature(double celsius) const;

  const std::string& name() const noexcept { return name_; }
  bool has_axis(Axis a) const noexcept { return axes_[static_cast<int>(a)].has_value(); }
  const SellmeierAxis& axis(Axis a) const;
  std::pair<double, double> valid_range_um() const noexcept { return {valid_min_um_, valid_max_um_}; }
  double temperature_c() const noexcept { return temperature_c_; }
  double reference_temperature_c() const noexcept { return reference_temperature_c_; }

  double refractive_index(double lambda_um, Axis a) const;
  /// n_g = n − λ·dn/dλ from the analytic Sellmeier derivative.
  double group_index(double lambda_um, Axis a) const;

  /// k(ω) = n(λ(ω))·ω/c.
  double wavenumber(double omega, Axis a) const;
  /// dk/dω = 1/v_g.
  double inverse_group_velocity(double omega, Axis a,
                                GroupVelocityMethod method = GroupVelocityMethod::analytic) const;

private:
  void check_range(double lambda_um) const;

  std::string name_;
  std::array<std::optional<SellmeierAxis>, 3> axes_;
  double valid_min_um_;
  double valid_max_um_;
  double reference_temperature_c_;
  double temperature_c_;
};

/// Three-wave interaction: polarization axes, centre frequencies and the
/// poling period used for quasi-phase-matching.
struct InteractionGeometry {
  Axis pump_axis = Axis::y;
  Axis signal_axis = Axis::y;
  Axis idler_axis = Axis::z;
  double pump_center = 0.0;
  double signal_center = 0.0;
  double idler_center = 0.0;
  double poling_period_m = 0.0; // 0 until set by poling_period()

  /// Degenerate geometry with signal = idler = pump/2.
  static InteractionGeometry degenerate(double pump_wavelength_m, Axis pump, Axis signal, Axis idler);
  /// Non-degenerate geometry; the idler takes the remaining energy.
  static InteractionGeometry with_signal(double pump_wavelength_m, double signal_wavelength_m, Axis pump,
                                         Axis signal, Axis idler);
  /// Default type-II KTP geometry: 774.9 nm pump, y -> y + z.
  static InteractionGeometry ktp_type2();

  /// Checks energy conservation and, when `require_period`, Λ0 > 0.
  void validate(bool require_period = true) const;
};

/// Δk = k_p(ω_s + ω_i) − k_s(ω_s) − k_i(ω_i), no poling offset.
double phase_mismatch(const DispersionModel& model, const InteractionGeometry& g, double omega_s, double omega_i);

/// Signed grating wavevector ±2π/Λ0, sign matching Δk at the centre frequencies.
double grating_wavevector(const DispersionModel& model, const InteractionGeometry& g);

/// Quasi-phase-matched residual Δk − K_g; zero at the design point.
double qpm_residual(const DispersionModel& model, const InteractionGeometry& g, double omega_s, double omega_i);

/// (1/v_g,p) − ½(1/v_g,s + 1/v_g,i) at the centre frequencies, s/m.
double gvm_residual(const DispersionModel& model, const InteractionGeometry& g,
                    GroupVelocityMethod method = GroupVelocityMethod::analytic);

/// Thrown when Δk vanishes at the centre: no poling is needed or possible.
class NoPhaseMismatch : public Error {
public:
  using Error::Error;
};

/// Λ0 = 2π/|Δk(ω_s0, ω_i0)|, in metres. Ignores g.poling_period_m.
double poling_period(const DispersionModel& model, const InteractionGeometry& g);

/// Geometry with poling_period_m filled from poling_period().
InteractionGeometry with_poling_period(const DispersionModel& model, InteractionGeometry g);

} // namespace pdc
