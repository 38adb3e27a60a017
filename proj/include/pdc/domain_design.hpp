#pragma once

// Crystal domain configurations: uniform periodic poling and Gaussian-apodized
// designs obtained by tracking a cumulative target amplitude.

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <vector>

namespace pdc {

/// Largest growth rate of |PMF(Δk0)| along z for ±1 domains: 2/π per unit length,
/// reached by first-order periodic poling.
inline constexpr double kMaxAmplitudeSlope = 0.63661977236758134; // 2/π

/// Gaussian nonlinearity target g(z) ∝ exp(−(z − l/2)²/(2σ²)) on [0, l].
/// An infinite sigma is the flat (uniform) target.
struct TargetProfile {
  double length_m = 0.0;
  double sigma_m = std::numeric_limits<double>::infinity();

  static TargetProfile gaussian(double length_m, double sigma_m);
  static TargetProfile flat(double length_m);

  bool is_flat() const noexcept { return sigma_m == std::numeric_limits<double>::infinity(); }
  double center_m() const noexcept { return 0.5 * length_m; }
  /// Peak-normalized g_target(z); 0 outside [0, l].
  double density(double z_m) const;
  void validate() const;
};

/// Ordered domains along z. widths in µm, signs ±1 (orientation of χ⁽²⁾).
struct DomainConfiguration {
  std::vector<double> widths_um;
  std::vector<int> signs;

  std::size_t size() const noexcept { return widths_um.size(); }
  double total_length_um() const;
  double total_length_m() const { return total_length_um() * 1e-6; }
  /// Domain walls in metres, size()+1 entries starting at 0.
  std::vector<double> boundaries_m() const;
  /// Throws ConfigError unless widths > 0, signs ∈ {±1} and sizes agree.
  void validate() const;

  friend bool operator==(const DomainConfiguration&, const DomainConfiguration&) = default;
};

/// Alternating ±1 domains of duty·Λ0 and (1 − duty)·Λ0, starting with +1,
/// truncated at the crystal length.
DomainConfiguration periodic_configuration(double length_m, double period_m, double duty = 0.5);

/// Cumulative target A(z) = (2/π)·∫₀ᶻ g_target: the erf pair
///   (2/π)·σ·√(π/2)·[erf(l/(2√2σ)) + erf((z − l/2)/(√2σ))],
/// in metres, so its steepest slope equals kMaxAmplitudeSlope.
double target_amplitude(const TargetProfile& profile, double z_m);

struct TrackingOptions {
  /// Candidate domains per coherence length Λ0/2.
  int subdomains_per_coherence_length = 1;
  /// Domains narrower than this are absorbed into their neighbours.
  double min_domain_width_um = 0.0;
  /// Largest tolerated |accumulated − target| at any wall, as a multiple of
  /// (π/2)·Λ0/2. Exceeding it means the grid is too coarse.
  double max_deviation_steps = 1.0;
};

/// Greedy sign choice per candidate domain so that the amplitude accumulated
/// at the phase-matched Δk0 = 2π/Λ0 follows i·A(z). Ties go to +1. Equal-sign
/// neighbours are merged.
DomainConfiguration track_domains(const TargetProfile& profile, double period_m, const TrackingOptions& options = {});

/// Complex PMF accumulated over [0, z_k] at every domain wall z_k, evaluated at `dk`.
std::vector<std::complex<double>> accumulated_amplitude(const DomainConfiguration& config, double dk);

/// |φ(Δk0)| relative to periodic duty-0.5 poling of the same length and period 2π/|Δk0|.
double effective_nonlinearity(const DomainConfiguration& config, double dk0);

/// CSV with header `width_um,sign`, one domain per row.
void write_domains_csv(std::ostream& out, const DomainConfiguration& config);
void save_domains_csv(const std::filesystem::path& path, const DomainConfiguration& config);
DomainConfiguration read_domains_csv(std::istream& in, const std::string& source_name = "domains");
DomainConfiguration load_domains_csv(const std::filesystem::path& path);

} // namespace pdc
