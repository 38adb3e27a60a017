#pragma once

// Rate-based estimators: heralding and collection efficiency, squeezing
// strength, brightness and the zero-power visibility extrapolation.

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdc/text_io.hpp"

namespace pdc {

/// Rates in Hz, pump power in mW (NaN when not recorded).
struct RateMeasurement {
  double singles_signal = 0.0;
  double singles_idler = 0.0;
  double coincidences = 0.0;
  double clock_rate = 80.9e6;
  double pump_power_mw = std::numeric_limits<double>::quiet_NaN();
  std::string label;

  bool has_pump_power() const noexcept { return !std::isnan(pump_power_mw); }
  /// Nonnegative rates, C ≤ min(S_s, S_i), clock > 0.
  void validate() const;
};

struct HeraldingEfficiency {
  double signal = 0.0; // C/S_i
  double idler = 0.0;  // C/S_s
  double mean = 0.0;
};

HeraldingEfficiency klyshko_efficiency(const RateMeasurement& m);

/// η/(detector·(1 − loss)): heralding efficiency with detection and known
/// optical loss divided out.
double collection_efficiency(double heralding, double detector_efficiency, double optical_loss);

/// Optional corrections applied before estimating γ; all off by default.
struct GammaOptions {
  double dark_signal_hz = 0.0;
  double dark_idler_hz = 0.0;
  /// Subtract S_s·S_i/clock accidental coincidences.
  bool subtract_accidentals = false;
};

struct SqueezingEstimate {
  double pair_rate = 0.0;                   // N = S_s·S_i/C, Hz
  double pair_probability_per_pulse = 0.0;  // µ = N/clock
  double gamma = 0.0;                       // µ = γ²/(1 − γ²)
  /// τ = γ²/p in 1/mW, when the pump power is known.
  std::optional<double> tau_per_mw;
};

/// Throws DataError for C = 0 or µ ≥ 1.
SqueezingEstimate estimate_gamma(const RateMeasurement& m, const GammaOptions& options = {});

/// Coincidences per mW of pump.
double brightness_per_mw(const RateMeasurement& m);

enum class FitAbscissa { power, gamma, gamma_squared };

FitAbscissa parse_fit_abscissa(std::string_view s);
std::string_view to_string(FitAbscissa a);

struct VisibilityPoint {
  double x = 0.0;
  double visibility = 0.0;
  /// 0 or NaN when no error bar is known.
  double std_error = std::numeric_limits<double>::quiet_NaN();
};

struct VisibilityScan {
  std::vector<VisibilityPoint> points;
  FitAbscissa abscissa = FitAbscissa::power;
};

enum class RepeatError {
  /// Sample standard deviation of the repeats.
  sample_std,
  /// Sample standard deviation divided by √(repeats).
  std_error_of_mean,
};

/// Groups equal abscissas: each point becomes the mean of its repeats with an
/// error bar from their spread. Groups of one keep no error bar.
VisibilityScan aggregate_repeats(std::span<const VisibilityPoint> raw, FitAbscissa abscissa = FitAbscissa::power,
                                 RepeatError error = RepeatError::sample_std);

/// Maps pump power to the chosen abscissa given τ = γ²/p.
double to_abscissa(double pump_power_mw, double tau_per_mw, FitAbscissa abscissa);

struct LinearFit {
  double intercept = 0.0;
  double intercept_error = 0.0;
  double slope = 0.0;
  double slope_error = 0.0;
  double chi_squared = 0.0;
  std::size_t degrees_of_freedom = 0;
  bool weighted = false;

  double at(double x) const noexcept { return intercept + slope * x; }
};

/// Weighted least squares (1/σ²) when every point has an error bar, ordinary
/// least squares otherwise. The intercept is the zero-power visibility.
LinearFit fit_visibility_vs_power(const VisibilityScan& scan);

/// Columns: singles_signal_hz, singles_idler_hz, coincidences_hz, clock_rate_hz,
/// optional pump_power_mw and label.
std::vector<RateMeasurement> read_rates_csv(std::istream& in, const std::string& source_name = "rates");
std::vector<RateMeasurement> load_rates_csv(const std::filesystem::path& path);

/// Columns: pump_power_mw (or x), visibility, optional std_error. Without
/// std_error, repeated abscissas are aggregated.
VisibilityScan read_scan_csv(std::istream& in, const std::string& source_name = "scan");
VisibilityScan load_scan_csv(const std::filesystem::path& path);

io::KeyValueDoc fit_report(const LinearFit& fit, FitAbscissa abscissa);
/// x, visibility, std_error, fitted.
void write_fit_csv(std::ostream& out, const VisibilityScan& scan, const LinearFit& fit);

} // namespace pdc
