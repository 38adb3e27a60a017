#pragma once

// Schmidt decomposition, purity, HOM visibility and the design sweeps.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pdc/dispersion.hpp"
#include "pdc/domain_design.hpp"
#include "pdc/spectral.hpp"
#include "pdc/text_io.hpp"

namespace pdc {

/// Which matrix was decomposed: the complex JSA, |f| or |f|².
enum class SpectrumSource { jsa, sqrt_jsi, jsi };

std::string_view to_string(SpectrumSource s);

struct SchmidtSpectrum {
  /// Nonincreasing, Σλ² = 1.
  std::vector<double> singular_values;
  SpectrumSource source = SpectrumSource::jsa;
};

/// Singular values of the Frobenius-normalized matrix. Throws DataError on a
/// zero or non-finite matrix.
SchmidtSpectrum schmidt_decompose(const Eigen::MatrixXcd& m, SpectrumSource source = SpectrumSource::jsa);
SchmidtSpectrum schmidt_decompose(const Eigen::MatrixXd& m, SpectrumSource source);

/// Σλ⁴
double purity(const SchmidtSpectrum& s);
/// 1/Σλ⁴
double schmidt_number(const SchmidtSpectrum& s);

/// Element-wise |f| and |f|².
Eigen::MatrixXd sqrt_jsi(const JointSpectralAmplitude& jsa);
Eigen::MatrixXd jsi(const JointSpectralAmplitude& jsa);

/// Purity of the decomposed JSA, |f| or |f|².
double jsa_purity(const JointSpectralAmplitude& jsa, SpectrumSource source = SpectrumSource::jsa);

enum class InterferenceArms { signal_signal, idler_idler, signal_idler };

InterferenceArms parse_interference_arms(std::string_view s);
std::string_view to_string(InterferenceArms a);

struct HomResult {
  double visibility = 0.0;
  /// Delay of the photon from B relative to A at the optimum, seconds.
  double delay_s = 0.0;
};

/// Tr(ρ_A ρ_B(τ)) of the heralded single-photon states. With `scan_delay` the
/// overlap is maximized over the relative delay τ (τ = 0 is always a candidate).
/// signal-idler needs identical signal and idler axes.
HomResult hom_visibility(const JointSpectralAmplitude& a, const JointSpectralAmplitude& b, InterferenceArms arms,
                         bool scan_delay = true);

/// Highest secondary local maximum of |φ| relative to the global maximum, over
/// QPM residuals within ±8π/l of `grating_wavevector`. 0 when |φ| has no
/// secondary maximum there.
double side_lobe_level(const DomainConfiguration& config, double grating_wavevector, std::size_t samples = 8001);

struct SweepSettings {
  DispersionModel model = DispersionModel::ktp();
  /// Must carry the poling period.
  InteractionGeometry geometry;
  PumpEnvelope pump;
  std::size_t grid_points = 512;
  /// 0 selects default_half_span() of the widest pump bandwidth in the sweep.
  double half_span = 0.0;
  TrackingOptions tracking;
  std::optional<SpectralFilter> filter;
};

struct SweepResult {
  std::string parameter;
  std::vector<double> values;
  std::vector<double> purity;          // complex JSA
  std::vector<double> sqrt_jsi_purity; // |f|
  std::vector<double> jsi_purity;      // |f|²
  /// Relative to periodic poling of the same length under the same pump.
  std::vector<double> relative_brightness;
  std::vector<double> side_lobe_level;
  std::vector<double> effective_nonlinearity;

  std::size_t size() const noexcept { return values.size(); }
  /// Index of the largest JSA purity.
  std::size_t best_index() const;
};

/// Tracks a Gaussian design per σ (metres) on a crystal of `length_m`.
SweepResult sweep_sigma(std::span<const double> sigmas_m, double length_m, const SweepSettings& settings);

/// One crystal, several pump durations (ps). The PMF matrix is built once on a
/// grid wide enough for the shortest pulse.
SweepResult sweep_pulse_duration(std::span<const double> durations_ps, const DomainConfiguration& crystal,
                                 const SweepSettings& settings);

/// Header row names the swept parameter.
void write_sweep_csv(std::ostream& out, const SweepResult& r);
io::KeyValueDoc sweep_summary(const SweepResult& r);

} // namespace pdc
