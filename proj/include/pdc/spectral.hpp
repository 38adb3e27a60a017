#pragma once

// Phase-matching functions, pump envelopes and joint spectral amplitudes.
//
// A JSA is stored as a dense complex matrix: rows index the signal frequency,
// columns the idler frequency.

#include <complex>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pdc/dispersion.hpp"
#include "pdc/domain_design.hpp"
#include "pdc/text_io.hpp"

namespace pdc {

/// Uniform signal and idler frequency axes (rad/s).
struct FrequencyGrid {
  std::vector<double> signal_axis;
  std::vector<double> idler_axis;

  static FrequencyGrid uniform(double signal_center, double idler_center, double half_span, std::size_t points);
  /// Square grid around the geometry's centre frequencies.
  static FrequencyGrid around(const InteractionGeometry& g, double half_span, std::size_t points);

  std::size_t n_signal() const noexcept { return signal_axis.size(); }
  std::size_t n_idler() const noexcept { return idler_axis.size(); }
  double signal_step() const;
  double idler_step() const;
  /// Strictly increasing, uniform to 1e-12 relative, at least 2 points per axis.
  void validate() const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

enum class PulseShape {
  sech2,
  gaussian,
  /// α ≡ 1: continuous-wave limit used for analytic checks.
  cw,
};

PulseShape parse_pulse_shape(std::string_view s);
std::string_view to_string(PulseShape s);

/// Time-bandwidth products (intensity FWHM × intensity FWHM) of transform-limited pulses.
inline constexpr double kSech2TimeBandwidth = 0.31483304429504977; // 4·acosh(√2)²/π²
inline constexpr double kGaussianTimeBandwidth = 0.4412712003053032; // 2·ln2/π

/// Transform-limited pump; `duration_ps` is the intensity FWHM.
struct PumpEnvelope {
  PulseShape shape = PulseShape::sech2;
  double center = 0.0; // rad/s
  double duration_ps = 1.3;

  /// Spectral-intensity FWHM in rad/s (infinite for cw).
  double intensity_fwhm() const;
  void validate() const;
};

/// Peak-normalized real spectral amplitude α(ω); α(center) = 1.
double pump_amplitude(const PumpEnvelope& env, double omega);

/// Quartic filter with intensity transmission exp[−(ω − ω0)⁴/(2σ_f⁴)].
struct SpectralFilter {
  enum class Arms { signal, idler, both };

  double center = 0.0; // rad/s
  double sigma = std::numeric_limits<double>::infinity();
  Arms arms = Arms::both;

  /// FWHM = 2·(2·ln2)^{1/4}·σ_f, converted from a wavelength width at `center_wavelength_m`.
  static SpectralFilter from_fwhm(double center_wavelength_m, double fwhm_m, Arms arms = Arms::both);
  double fwhm() const;
  double transmission(double omega) const;
};

SpectralFilter::Arms parse_filter_arms(std::string_view s);

/// Exact PMF φ(Δk) = ∫ g(z) e^{iΔk z} dz of a ±1 domain configuration,
/// summed domain by domain. Uses a Taylor expansion when |Δk|·l < 1e-6.
class DomainPmf {
public:
  explicit DomainPmf(const DomainConfiguration& config);

  std::complex<double> operator()(double dk) const;
  double length_m() const noexcept { return length_m_; }

private:
  std::vector<double> walls_;  // positions with nonzero sign jump
  std::vector<double> jumps_;  // s_{b-1} − s_b at each wall
  double length_m_ = 0.0;
  double moment0_ = 0.0;       // Σ s_j (z_{j+1} − z_j)
  double moment1_ = 0.0;       // Σ s_j (z_{j+1}² − z_j²)/2
  double moment2_ = 0.0;       // Σ s_j (z_{j+1}³ − z_j³)/6
};

struct PhaseMatchingFunction {
  std::vector<double> dk;                   // rad/m
  std::vector<std::complex<double>> values; // m
  std::string provenance;
};

PhaseMatchingFunction pmf_from_domains(const DomainConfiguration& config, std::span<const double> dk,
                                       std::string provenance = "domains");

/// Two columns of the PMF against the QPM residual: `dk_residual_per_m,re,im`.
void write_pmf_csv(std::ostream& out, const PhaseMatchingFunction& pmf, double grating_wavevector);

/// Analytic PMF evaluated from the signal/idler frequencies.
using AnalyticPmf = std::function<std::complex<double>(double omega_s, double omega_i)>;
/// A domain configuration (evaluated at the full Δk) or an analytic stub.
using PmfSource = std::variant<DomainConfiguration, AnalyticPmf>;

/// Gaussian PMF exp(−(Δk − K_g)²·w²/2) of the QPM residual, width `w` in metres.
AnalyticPmf gaussian_residual_pmf(const DispersionModel& model, const InteractionGeometry& g, double width_m);

struct JointSpectralAmplitude {
  Eigen::MatrixXcd values; // normalized so Σ|f|² dω_s dω_i = 1
  FrequencyGrid grid;
  /// L2 norm √(Σ|f|² dω_s dω_i) of the unnormalized amplitude.
  double norm = 0.0;
  /// Product of filter transmissions applied so far.
  double transmitted_fraction = 1.0;
};

/// φ over the grid, without the pump factor.
Eigen::MatrixXcd pmf_matrix(const PmfSource& pmf, const DispersionModel& model, const InteractionGeometry& g,
                            const FrequencyGrid& grid);

/// f = φ·α(ω_s + ω_i) from a precomputed PMF matrix.
JointSpectralAmplitude jsa_from_pmf(const Eigen::MatrixXcd& pmf, const PumpEnvelope& env, const FrequencyGrid& grid);

JointSpectralAmplitude build_jsa(const PmfSource& pmf, const PumpEnvelope& env, const DispersionModel& model,
                                 const InteractionGeometry& g, const FrequencyGrid& grid);

/// Multiplies by √T(ω) on the selected arms, records the transmitted fraction
/// and renormalizes.
JointSpectralAmplitude apply_filter(const JointSpectralAmplitude& jsa, const SpectralFilter& filter);

/// (‖f‖/‖f_ref‖)² of the unnormalized amplitudes on identical grids.
double relative_brightness(const JointSpectralAmplitude& jsa, const JointSpectralAmplitude& reference);

/// Default grid half-span: `bandwidths` × pump spectral-intensity FWHM.
double default_half_span(const PumpEnvelope& env, double bandwidths = 4.0);

/// |f|² matrix as CSV (rows = signal) plus a `key = value` sidecar with the axes and norm.
void write_jsa_intensity_csv(std::ostream& out, const JointSpectralAmplitude& jsa);
void write_jsa_complex_csv(std::ostream& out, const JointSpectralAmplitude& jsa);
io::KeyValueDoc jsa_sidecar(const JointSpectralAmplitude& jsa);

} // namespace pdc
