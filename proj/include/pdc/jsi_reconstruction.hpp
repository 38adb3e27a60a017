#pragma once

// Joint spectra from time-tagged detections: a dispersive fibre maps photon
// frequency to arrival delay after a trigger, and the 2D delay histogram is
// the JSI.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdc/analysis.hpp"
#include "pdc/spectral.hpp"
#include "pdc/text_io.hpp"

namespace pdc {

struct TimeTag {
  std::uint8_t channel = 0;
  std::int64_t ps = 0;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

struct ChannelRoles {
  std::uint8_t trigger = 0;
  std::uint8_t signal = 1;
  std::uint8_t idler = 2;

  bool known(std::uint8_t c) const noexcept { return c == trigger || c == signal || c == idler; }
};

/// Detection events in time order (ties keep input order), 1 ps resolution.
struct TimeTagStream {
  std::vector<TimeTag> events;
  ChannelRoles roles;
  std::int64_t clock_period_ps = 12500;
  /// Malformed input lines or trailing bytes skipped during ingestion.
  std::size_t rejected = 0;

  std::size_t count(std::uint8_t channel) const;
};

struct IngestOptions {
  ChannelRoles roles;
  /// Used when the file carries no `# clock_period_ps=` comment (and always for binary input).
  std::int64_t clock_period_ps = 12500;
  /// A channel may step back in time by at most this much; such events are
  /// re-sorted. Larger steps are a DataError.
  std::int64_t reorder_tolerance_ps = 0;
};

/// CSV lines `channel,ps`. `#` lines are comments; `# clock_period_ps=N` sets
/// the clock period. An optional `channel,ps` header is accepted.
TimeTagStream read_timetags_csv(std::istream& in, const IngestOptions& options = {},
                                const std::string& source_name = "timetags");
/// 9-byte little-endian records: u8 channel, u64 picoseconds.
TimeTagStream read_timetags_binary(std::istream& in, const IngestOptions& options = {},
                                   const std::string& source_name = "timetags");
/// `.bin` files are binary, everything else CSV.
TimeTagStream ingest_timetags(const std::filesystem::path& path, const IngestOptions& options = {});

void write_timetags_csv(std::ostream& out, const TimeTagStream& s);
void write_timetags_binary(std::ostream& out, const TimeTagStream& s);

/// Linear fibre dispersion λ = λ_ref + Δt/(D·L).
struct DispersionMap {
  double dl_ps_per_nm = 357.1;
  double reference_nm = 1549.8;
  double fiber_length_km = 20.0;

  void validate() const;
};

double time_to_wavelength(double dt_ps, const DispersionMap& map);
double wavelength_to_time(double wavelength_nm, const DispersionMap& map);

struct HistogramSettings {
  std::int64_t bin_width_ps = 50;
  std::int64_t window_ps = 12500;
  std::int64_t signal_offset_ps = 0;
  std::int64_t idler_offset_ps = 0;
  /// Largest trigger-to-photon delay accepted into a triple; 0 means one clock period.
  std::int64_t max_span_ps = 0;

  void validate(std::int64_t clock_period_ps) const;
  std::size_t bins() const { return static_cast<std::size_t>(window_ps / bin_width_ps); }
};

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rows index the signal delay bin, columns the idler delay bin.
struct JsiHistogram {
  CountMatrix counts;
  HistogramSettings settings;
  std::int64_t clock_period_ps = 12500;
  /// Triples binned into the window.
  std::int64_t triples = 0;
  /// Triples whose folded delay fell outside the window.
  std::int64_t dropped = 0;

  /// Stripes wrap around the histogram edges when the window is a full clock period.
  bool wraps() const noexcept { return settings.window_ps == clock_period_ps; }
};

/// After each trigger, the first signal and first idler event before the next
/// trigger form a triple when both follow within max_span. Delays are taken
/// modulo the clock period, shifted by the offsets, and binned from 0.
JsiHistogram build_histogram(const TimeTagStream& stream, const HistogramSettings& settings = {});
/// Bins disjoint segments (split at triggers) in parallel and merges them.
JsiHistogram build_histogram_parallel(const TimeTagStream& stream, const HistogramSettings& settings,
                                      std::size_t segments);
/// Adds counts; histograms must share settings and clock period.
void merge(JsiHistogram& into, const JsiHistogram& other);

/// Expected background counts. Stripe rates are counts per bin step along the
/// stripe, spread across the stripe by the peak's own marginal profile.
struct BackgroundModel {
  double uniform_rate = 0.0;      // per bin
  double diagonal_rate = 0.0;     // trigger darks: both delays shift together
  double signal_stripe_rate = 0.0; // signal darks: random signal delay, per row
  double idler_stripe_rate = 0.0;  // idler darks: random idler delay, per column
  std::size_t peak_row = 0;
  std::size_t peak_col = 0;
  std::size_t mask_radius = 0;

  // Peak marginals used as stripe cross-sections, 2R+1 entries each, summing to 1.
  Eigen::VectorXd signal_profile;   // across rows around peak_row
  Eigen::VectorXd idler_profile;    // across columns around peak_col
  Eigen::VectorXd diagonal_profile; // across (i − j) around the peak

  /// Expected background in every bin of `h`.
  Eigen::MatrixXd expected(const JsiHistogram& h) const;
};

/// Median-based floor and stripe estimates away from the peak. Throws
/// DataError when the peak leaves no region to sample.
BackgroundModel estimate_background(const JsiHistogram& h);
/// counts − expected background, clamped at zero.
Eigen::MatrixXd subtract_background(const JsiHistogram& h, const BackgroundModel& model);

struct PurityOptions {
  SpectrumSource mode = SpectrumSource::sqrt_jsi;
  bool subtract_background = true;
};

/// Purity of the (optionally background-subtracted) histogram, or of its
/// element-wise square root.
double histogram_purity(const JsiHistogram& h, const PurityOptions& options = {});
double matrix_purity(const Eigen::MatrixXd& counts, SpectrumSource mode);

struct ConvergenceTable {
  std::vector<double> durations_ps;
  std::vector<std::int64_t> triples;
  /// NaN where the histogram was empty or could not be background-corrected.
  std::vector<double> purity;
  std::optional<std::size_t> plateau_index;
  double epsilon = 0.005;
};

/// Purity of the data accumulated over each cumulative duration from the first
/// event. The plateau starts at the first interval whose purity changes by less
/// than epsilon from the previous one.
ConvergenceTable convergence_scan(const TimeTagStream& stream, std::span<const double> durations_ps,
                                  const HistogramSettings& settings = {}, const PurityOptions& options = {},
                                  double epsilon = 0.005);

struct SynthesisSettings {
  std::size_t pairs = 1'000'000;
  double jitter_ps = 0.0; // Gaussian σ per detection
  std::int64_t clock_period_ps = 12500;
  /// Background triples per second of synthesized acquisition.
  double trigger_dark_hz = 0.0;
  double signal_dark_hz = 0.0;
  double idler_dark_hz = 0.0;
  double uniform_background_hz = 0.0;
  std::uint64_t seed = 1;
  ChannelRoles roles;

  /// Duration of the pair frames, four clock periods each; background rates
  /// are counted over this time.
  double acquisition_s() const;
  void validate() const;
};

/// Delay of the band centre after the trigger: half a clock period.
std::int64_t synthesis_time_zero_ps(const SynthesisSettings& s);

/// Samples pairs from |f|², maps them to delays through the fibre, adds
/// Poisson background triples, jitter and 1 ps quantization. Deterministic for
/// a given seed.
TimeTagStream synthesize_timetags(const JointSpectralAmplitude& jsa, const DispersionMap& map,
                                  const SynthesisSettings& settings);

/// Counts as a CSV matrix (rows = signal bins).
void write_histogram_csv(std::ostream& out, const CountMatrix& counts);
void write_histogram_csv(std::ostream& out, const Eigen::MatrixXd& counts);
io::KeyValueDoc histogram_sidecar(const JsiHistogram& h, const std::optional<BackgroundModel>& background,
                                  bool background_subtracted);
void write_convergence_csv(std::ostream& out, const ConvergenceTable& t);

} // namespace pdc
