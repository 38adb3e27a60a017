#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <vector>

#include "pdc/analysis.hpp"
#include "pdc/counting.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/domain_design.hpp"
#include "pdc/error.hpp"
#include "pdc/jsi_reconstruction.hpp"
#include "pdc/spectral.hpp"
#include "pdc/text_io.hpp"

namespace fs = std::filesystem;

namespace pdc::cli {
namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  body(out);
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

fs::path output_dir(const Common& c) {
  const fs::path dir = c.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("out", "cannot create " + dir.string() + ": " + ec.message());
  }
  return dir;
}

void positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(field, "must be > 0");
  }
}

// Dispersion model, pump wavelength and poling period.
struct Medium {
  std::string model_path;
  std::optional<double> temperature_c;
  double pump_nm = 774.9;
  double period_um = 0.0;

  void add(CLI::App* app) {
    app->add_option("--model", model_path, "Dispersion model file (default: bundled KTP)");
    app->add_option("--temperature-c", temperature_c, "Crystal temperature");
    app->add_option("--pump-nm", pump_nm, "Pump centre wavelength")->capture_default_str();
    app->add_option("--period-um", period_um, "Poling period; 0 computes it from the model")->capture_default_str();
  }

  DispersionModel model() const {
    auto m = model_path.empty() ? DispersionModel::ktp() : DispersionModel::from_file(model_path);
    return temperature_c ? m.at_temperature(*temperature_c) : m;
  }

  InteractionGeometry geometry(const DispersionModel& m) const {
    positive(pump_nm, "pump-nm");
    if (period_um < 0.0) {
      throw ConfigError("period-um", "must be >= 0");
    }
    auto g = InteractionGeometry::degenerate(pump_nm * 1e-9, Axis::y, Axis::y, Axis::z);
    if (period_um > 0.0) {
      g.poling_period_m = period_um * 1e-6;
      return g;
    }
    return with_poling_period(m, g);
  }
};

// Inline crystal parameters or a domain file.
struct Crystal {
  std::string domains_path;
  double length_mm = 30.0;
  std::optional<double> sigma_mm;
  double sigma_ratio = 4.7;
  bool flat = false;
  int subdomains = 1;
  double min_width_um = 0.0;
  double max_deviation_steps = 1.0;

  void add(CLI::App* app, bool allow_file) {
    if (allow_file) {
      app->add_option("--domains", domains_path, "Domain CSV (width_um,sign); overrides the inline design");
    }
    app->add_option("--length-mm", length_mm, "Crystal length")->capture_default_str();
    app->add_option("--sigma-mm", sigma_mm, "Gaussian target width (default: length/sigma-ratio)");
    app->add_option("--sigma-ratio", sigma_ratio, "length/sigma when --sigma-mm is absent")->capture_default_str();
    app->add_flag("--flat", flat, "Uniform target: periodic poling");
    app->add_option("--subdomains", subdomains, "Candidate domains per coherence length")->capture_default_str();
    app->add_option("--min-width-um", min_width_um, "Smallest domain width")->capture_default_str();
    app->add_option("--max-deviation-steps", max_deviation_steps, "Tracking error bound in (pi/2)*period/2 units")
        ->capture_default_str();
  }

  double length_m() const {
    positive(length_mm, "length-mm");
    return length_mm * 1e-3;
  }

  double sigma_m() const {
    if (sigma_mm) {
      positive(*sigma_mm, "sigma-mm");
      return *sigma_mm * 1e-3;
    }
    positive(sigma_ratio, "sigma-ratio");
    return length_m() / sigma_ratio;
  }

  TrackingOptions tracking() const {
    if (subdomains < 1) {
      throw ConfigError("subdomains", "must be >= 1");
    }
    if (!(min_width_um >= 0.0)) {
      throw ConfigError("min-width-um", "must be >= 0");
    }
    positive(max_deviation_steps, "max-deviation-steps");
    return {subdomains, min_width_um, max_deviation_steps};
  }

  bool from_file() const { return !domains_path.empty(); }

  DomainConfiguration build(const InteractionGeometry& g) const {
    if (from_file()) {
      return load_domains_csv(domains_path);
    }
    if (flat) {
      return periodic_configuration(length_m(), g.poling_period_m);
    }
    return track_domains(TargetProfile::gaussian(length_m(), sigma_m()), g.poling_period_m, tracking());
  }
};

struct Pump {
  std::string shape = "sech2";
  double duration_ps = 1.3;

  void add(CLI::App* app) {
    app->add_option("--pulse", shape, "Pump envelope: sech2 or gaussian")->capture_default_str();
    app->add_option("--duration-ps", duration_ps, "Pump intensity FWHM")->capture_default_str();
  }

  PumpEnvelope envelope(const InteractionGeometry& g) const {
    positive(duration_ps, "duration-ps");
    PumpEnvelope p{parse_pulse_shape(shape), g.pump_center, duration_ps};
    p.validate();
    return p;
  }
};

struct Grid {
  std::size_t points = 256;
  double bandwidths = 4.0;
  double filter_nm = 0.0;
  std::string filter_arms = "both";

  void add(CLI::App* app) {
    app->add_option("--grid", points, "Points per frequency axis")->capture_default_str();
    app->add_option("--bandwidths", bandwidths, "Grid half-span in pump intensity bandwidths")->capture_default_str();
    app->add_option("--filter-nm", filter_nm, "Quartic filter FWHM; 0 disables it")->capture_default_str();
    app->add_option("--filter-arms", filter_arms, "signal, idler or both")->capture_default_str();
  }

  void check() const {
    if (points < 2) {
      throw ConfigError("grid", "must be >= 2");
    }
    positive(bandwidths, "bandwidths");
    if (!(filter_nm >= 0.0)) {
      throw ConfigError("filter-nm", "must be >= 0");
    }
  }

  std::optional<SpectralFilter> filter(const InteractionGeometry& g) const {
    check();
    if (filter_nm == 0.0) {
      return std::nullopt;
    }
    return SpectralFilter::from_fwhm(wavelength_from_omega(g.signal_center), filter_nm * 1e-9,
                                     parse_filter_arms(filter_arms));
  }
};

struct Detection {
  double dl_ps_per_nm = 357.1;
  double reference_nm = 1549.8;
  double fiber_length_km = 20.0;
  std::int64_t clock_period_ps = 12500;

  void add(CLI::App* app) {
    app->add_option("--dl-ps-per-nm", dl_ps_per_nm, "Fibre dispersion-length product")->capture_default_str();
    app->add_option("--reference-nm", reference_nm, "Wavelength at zero delay offset")->capture_default_str();
    app->add_option("--fiber-length-km", fiber_length_km, "Nominal fibre length")->capture_default_str();
    app->add_option("--clock-period-ps", clock_period_ps, "Trigger clock period")->capture_default_str();
  }

  DispersionMap map() const {
    DispersionMap m{dl_ps_per_nm, reference_nm, fiber_length_km};
    m.validate();
    return m;
  }
};

void print_report(const io::KeyValueDoc& doc) { io::write_key_values(std::cout, doc); }

// ---- design

struct DesignArgs {
  Medium medium;
  Crystal crystal;
};

void run_design(const DesignArgs& a, const Common& c) {
  const auto model = a.medium.model();
  const auto g = a.medium.geometry(model);
  const auto config = a.crystal.build(g);
  const auto dir = output_dir(c);
  save_domains_csv(dir / "domains.csv", config);

  const double k = grating_wavevector(model, g);
  io::KeyValueDoc r;
  r.set("target", std::string(a.crystal.flat ? "flat" : "gaussian"));
  r.set("length_mm", config.total_length_m() * 1e3);
  if (!a.crystal.flat) {
    r.set("sigma_mm", a.crystal.sigma_m() * 1e3);
  }
  r.set("poling_period_um", g.poling_period_m * 1e6);
  r.set("domains", static_cast<double>(config.size()));
  r.set("effective_nonlinearity", effective_nonlinearity(config, k));
  r.set("side_lobe_level", side_lobe_level(config, k));
  io::write_key_values(dir / "design_report.txt", r);
  print_report(r);
}

// ---- simulate

struct SimulateArgs {
  Medium medium;
  Crystal crystal;
  Pump pump;
  Grid grid;
  Detection detection;
  std::string emit_timetags;
  std::size_t pairs = 1'000'000;
  double jitter_ps = 0.0;
  double trigger_dark_hz = 0.0;
  double signal_dark_hz = 0.0;
  double idler_dark_hz = 0.0;
  double uniform_background_hz = 0.0;
  std::size_t pmf_points = 2001;
};

void run_simulate(const SimulateArgs& a, const Common& c) {
  const auto model = a.medium.model();
  const auto g = a.medium.geometry(model);
  const auto env = a.pump.envelope(g);
  const auto filter = a.grid.filter(g);
  if (a.pmf_points < 2) {
    throw ConfigError("pmf-points", "must be >= 2");
  }
  const auto config = a.crystal.build(g);
  const auto dir = output_dir(c);

  const double k = grating_wavevector(model, g);
  const double l = config.total_length_m();
  std::vector<double> dk(a.pmf_points);
  for (std::size_t i = 0; i < dk.size(); ++i) {
    dk[i] = k + (-1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(dk.size() - 1)) * 8.0 * kPi / l;
  }
  const auto pmf = pmf_from_domains(config, dk, a.crystal.from_file() ? a.crystal.domains_path : "design");
  write_file(dir / "pmf.csv", [&](std::ostream& o) { write_pmf_csv(o, pmf, k); });

  const auto grid = FrequencyGrid::around(g, default_half_span(env, a.grid.bandwidths), a.grid.points);
  auto jsa = build_jsa(config, env, model, g, grid);
  if (filter) {
    jsa = apply_filter(jsa, *filter);
  }
  write_file(dir / "jsa.csv", [&](std::ostream& o) { write_jsa_intensity_csv(o, jsa); });
  io::write_key_values(dir / "jsa.txt", jsa_sidecar(jsa));

  const auto schmidt = schmidt_decompose(jsa.values);
  io::KeyValueDoc r;
  r.set("domains", static_cast<double>(config.size()));
  r.set("length_mm", l * 1e3);
  r.set("pulse", std::string(to_string(env.shape)));
  r.set("duration_ps", env.duration_ps);
  r.set("grid", static_cast<double>(a.grid.points));
  r.set("purity", purity(schmidt));
  r.set("schmidt_number", schmidt_number(schmidt));
  r.set("sqrt_jsi_purity", jsa_purity(jsa, SpectrumSource::sqrt_jsi));
  r.set("jsi_purity", jsa_purity(jsa, SpectrumSource::jsi));
  r.set("effective_nonlinearity", effective_nonlinearity(config, k));
  if (filter) {
    r.set("filter_fwhm_nm", a.grid.filter_nm);
    r.set("filter_arms", a.grid.filter_arms);
    r.set("transmitted_fraction", jsa.transmitted_fraction);
  }

  if (!a.emit_timetags.empty()) {
    SynthesisSettings s;
    s.pairs = a.pairs;
    s.jitter_ps = a.jitter_ps;
    s.clock_period_ps = a.detection.clock_period_ps;
    s.trigger_dark_hz = a.trigger_dark_hz;
    s.signal_dark_hz = a.signal_dark_hz;
    s.idler_dark_hz = a.idler_dark_hz;
    s.uniform_background_hz = a.uniform_background_hz;
    s.seed = c.seed;
    const auto stream = synthesize_timetags(jsa, a.detection.map(), s);
    const fs::path path = dir / a.emit_timetags;
    const bool binary = path.extension() == ".bin";
    write_file(path, [&](std::ostream& o) {
      binary ? write_timetags_binary(o, stream) : write_timetags_csv(o, stream);
    });
    r.set("timetags", path.filename().string());
    r.set("timetag_events", static_cast<double>(stream.events.size()));
    r.set("seed", static_cast<double>(c.seed));
  }
  io::write_key_values(dir / "simulate_report.txt", r);
  print_report(r);
}

// ---- sweep

struct SweepArgs {
  Medium medium;
  Crystal crystal;
  Pump pump;
  Grid grid;
  std::string parameter = "sigma";
  std::vector<double> sigma_ratios{10.0, 8.0, 6.0, 4.7, 4.0, 3.0, 2.0};
  std::vector<double> durations_ps{0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8};
};

void run_sweep(const SweepArgs& a, const Common& c) {
  const auto model = a.medium.model();
  const auto g = a.medium.geometry(model);
  SweepSettings s;
  s.model = model;
  s.geometry = g;
  s.pump = a.pump.envelope(g);
  s.grid_points = a.grid.points;
  s.filter = a.grid.filter(g);
  s.tracking = a.crystal.tracking();

  SweepResult result;
  if (a.parameter == "sigma") {
    if (a.sigma_ratios.empty()) {
      throw ConfigError("sigma-ratios", "needs at least one value");
    }
    std::vector<double> sigmas;
    for (double r : a.sigma_ratios) {
      positive(r, "sigma-ratios");
      sigmas.push_back(a.crystal.length_m() / r);
    }
    result = sweep_sigma(sigmas, a.crystal.length_m(), s);
  } else if (a.parameter == "duration") {
    if (a.durations_ps.empty()) {
      throw ConfigError("durations-ps", "needs at least one value");
    }
    for (double d : a.durations_ps) {
      positive(d, "durations-ps");
    }
    result = sweep_pulse_duration(a.durations_ps, a.crystal.build(g), s);
  } else {
    throw ConfigError("parameter", "expected sigma or duration, got '" + a.parameter + "'");
  }
  const auto dir = output_dir(c);
  write_file(dir / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, result); });
  const auto summary = sweep_summary(result);
  io::write_key_values(dir / "sweep_summary.txt", summary);
  print_report(summary);
}

// ---- reconstruct

struct ReconstructArgs {
  std::string timetags;
  int trigger_channel = 0;
  int signal_channel = 1;
  int idler_channel = 2;
  std::int64_t clock_period_ps = 12500;
  std::int64_t reorder_tolerance_ps = 0;
  std::int64_t bin_ps = 50;
  std::int64_t window_ps = 12500;
  std::int64_t signal_offset_ps = 0;
  std::int64_t idler_offset_ps = 0;
  std::int64_t max_span_ps = 0;
  std::string mode = "sqrt_jsi";
  bool no_background = false;
  std::size_t intervals = 10;
  double epsilon = 0.005;
  double dl_ps_per_nm = 357.1;
  double reference_nm = 1549.8;
};

std::uint8_t channel(int v, const char* field) {
  if (v < 0 || v > 255) {
    throw ConfigError(field, "must be in [0, 255]");
  }
  return static_cast<std::uint8_t>(v);
}

SpectrumSource parse_mode(const std::string& s) {
  if (s == "sqrt_jsi") {
    return SpectrumSource::sqrt_jsi;
  }
  if (s == "jsi") {
    return SpectrumSource::jsi;
  }
  throw ConfigError("mode", "expected sqrt_jsi or jsi, got '" + s + "'");
}

void run_reconstruct(const ReconstructArgs& a, const Common& c) {
  if (a.timetags.empty()) {
    throw ConfigError("timetags", "a time-tag file is required");
  }
  IngestOptions in;
  in.roles = {channel(a.trigger_channel, "trigger-channel"), channel(a.signal_channel, "signal-channel"),
              channel(a.idler_channel, "idler-channel")};
  in.clock_period_ps = a.clock_period_ps;
  if (a.clock_period_ps <= 0) {
    throw ConfigError("clock-period-ps", "must be > 0");
  }
  if (a.reorder_tolerance_ps < 0) {
    throw ConfigError("reorder-tolerance-ps", "must be >= 0");
  }
  in.reorder_tolerance_ps = a.reorder_tolerance_ps;
  HistogramSettings hs{a.bin_ps, a.window_ps, a.signal_offset_ps, a.idler_offset_ps, a.max_span_ps};
  const PurityOptions po{parse_mode(a.mode), !a.no_background};
  if (a.intervals < 2) {
    throw ConfigError("intervals", "must be >= 2");
  }
  positive(a.epsilon, "epsilon");
  const DispersionMap map{a.dl_ps_per_nm, a.reference_nm, 20.0};
  map.validate();
  if (!fs::exists(a.timetags)) {
    throw ConfigError("timetags", "no such file: " + a.timetags);
  }

  const auto stream = ingest_timetags(a.timetags, in);
  if (stream.rejected > 0) {
    std::cerr << "warning: " << a.timetags << ": " << stream.rejected << " malformed records skipped\n";
  }
  if (stream.events.empty()) {
    throw DataError(a.timetags + ": no events");
  }
  const auto h = build_histogram(stream, hs);
  if (h.triples == 0) {
    throw DataError(a.timetags + ": no trigger/signal/idler triples inside the window");
  }
  const auto dir = output_dir(c);
  write_file(dir / "histogram.csv", [&](std::ostream& o) { write_histogram_csv(o, h.counts); });

  std::optional<BackgroundModel> bg;
  if (po.subtract_background) {
    bg = estimate_background(h);
    const auto corrected = subtract_background(h, *bg);
    write_file(dir / "histogram_subtracted.csv", [&](std::ostream& o) { write_histogram_csv(o, corrected); });
  }
  io::write_key_values(dir / "histogram.txt", histogram_sidecar(h, bg, po.subtract_background));

  const double p = histogram_purity(h, po);
  const double span = static_cast<double>(stream.events.back().ps - stream.events.front().ps) + 1.0;
  std::vector<double> durations;
  for (std::size_t k = 1; k <= a.intervals; ++k) {
    durations.push_back(span * static_cast<double>(k) / static_cast<double>(a.intervals));
  }
  const auto table = convergence_scan(stream, durations, hs, po, a.epsilon);
  write_file(dir / "convergence.csv", [&](std::ostream& o) { write_convergence_csv(o, table); });

  io::KeyValueDoc r;
  r.set("events", static_cast<double>(stream.events.size()));
  r.set("rejected", static_cast<double>(stream.rejected));
  r.set("triples", static_cast<double>(h.triples));
  r.set("dropped", static_cast<double>(h.dropped));
  r.set("bin_width_ps", static_cast<double>(hs.bin_width_ps));
  r.set("bin_width_nm", time_to_wavelength(static_cast<double>(hs.bin_width_ps), map) - map.reference_nm);
  r.set("mode", std::string(to_string(po.mode)));
  r.set("background_subtracted", std::string(po.subtract_background ? "true" : "false"));
  if (bg) {
    r.set("background.uniform_per_bin", bg->uniform_rate);
    r.set("background.diagonal_per_step", bg->diagonal_rate);
    r.set("background.signal_stripe_per_step", bg->signal_stripe_rate);
    r.set("background.idler_stripe_per_step", bg->idler_stripe_rate);
  }
  r.set("purity", p);
  if (table.plateau_index) {
    r.set("plateau_duration_ps", table.durations_ps[*table.plateau_index]);
    r.set("plateau_purity", table.purity[*table.plateau_index]);
  } else {
    r.set("plateau_duration_ps", std::string("none"));
  }
  io::write_key_values(dir / "reconstruct_report.txt", r);
  print_report(r);
}

// ---- rates

struct RatesArgs {
  std::string rates;
  std::string scan;
  std::vector<double> heralding;
  double detector_efficiency = 0.80;
  double optical_loss = 0.079;
  double dark_signal_hz = 0.0;
  double dark_idler_hz = 0.0;
  bool subtract_accidentals = false;
  std::string abscissa = "power";
};

void run_rates(const RatesArgs& a, const Common& c) {
  if (a.rates.empty() && a.scan.empty() && a.heralding.empty()) {
    throw ConfigError("rates", "give --rates, --scan or --heralding");
  }
  positive(a.detector_efficiency, "detector-efficiency");
  if (!(a.optical_loss >= 0.0 && a.optical_loss < 1.0)) {
    throw ConfigError("optical-loss", "must be in [0, 1)");
  }
  if (!(a.dark_signal_hz >= 0.0)) {
    throw ConfigError("dark-signal-hz", "must be >= 0");
  }
  if (!(a.dark_idler_hz >= 0.0)) {
    throw ConfigError("dark-idler-hz", "must be >= 0");
  }
  const auto abscissa = parse_fit_abscissa(a.abscissa);
  for (double h : a.heralding) {
    if (!(h >= 0.0 && h <= 1.0)) {
      throw ConfigError("heralding", "must be in [0, 1]");
    }
  }
  const GammaOptions go{a.dark_signal_hz, a.dark_idler_hz, a.subtract_accidentals};
  const auto dir = output_dir(c);
  const auto f = [](double v) { return io::format_double(v); };

  if (!a.heralding.empty()) {
    write_file(dir / "collection.csv", [&](std::ostream& o) {
      o << "heralding,detector_efficiency,optical_loss,collection_efficiency\n";
      for (double h : a.heralding) {
        const double ce = collection_efficiency(h, a.detector_efficiency, a.optical_loss);
        o << f(h) << ',' << f(a.detector_efficiency) << ',' << f(a.optical_loss) << ',' << f(ce) << '\n';
        std::cout << "collection_efficiency(" << f(h) << ") = " << f(ce) << '\n';
      }
    });
  }

  if (!a.rates.empty()) {
    const auto rows = load_rates_csv(a.rates);
    write_file(dir / "rates_report.csv", [&](std::ostream& o) {
      o << "label,heralding_signal,heralding_idler,collection_signal,collection_idler,pair_rate_hz,"
           "pair_probability,gamma,tau_per_mw,brightness_per_mw\n";
      for (const auto& m : rows) {
        const auto he = klyshko_efficiency(m);
        const auto sq = estimate_gamma(m, go);
        o << m.label << ',' << f(he.signal) << ',' << f(he.idler) << ','
          << f(collection_efficiency(he.signal, a.detector_efficiency, a.optical_loss)) << ','
          << f(collection_efficiency(he.idler, a.detector_efficiency, a.optical_loss)) << ',' << f(sq.pair_rate)
          << ',' << f(sq.pair_probability_per_pulse) << ',' << f(sq.gamma) << ','
          << (sq.tau_per_mw ? f(*sq.tau_per_mw) : std::string()) << ','
          << (m.has_pump_power() ? f(brightness_per_mw(m)) : std::string()) << '\n';
      }
    });
    std::cout << "rates: " << rows.size() << " rows -> rates_report.csv\n";
  }

  if (!a.scan.empty()) {
    auto scan = load_scan_csv(a.scan);
    scan.abscissa = abscissa;
    const auto fit = fit_visibility_vs_power(scan);
    write_file(dir / "fit.csv", [&](std::ostream& o) { write_fit_csv(o, scan, fit); });
    const auto report = fit_report(fit, abscissa);
    io::write_key_values(dir / "fit_report.txt", report);
    print_report(report);
  }
}

} // namespace

void add_design(CLI::App& app, const Common& common) {
  auto args = std::make_shared<DesignArgs>();
  auto* sub = app.add_subcommand("design", "Domain configuration for a flat or Gaussian target");
  sub->configurable();
  args->medium.add(sub);
  args->crystal.add(sub, false);
  sub->callback([args, &common] { run_design(*args, common); });
}

void add_simulate(CLI::App& app, const Common& common) {
  auto args = std::make_shared<SimulateArgs>();
  auto* sub = app.add_subcommand("simulate", "PMF, JSA and purity of one crystal and pump");
  sub->configurable();
  args->medium.add(sub);
  args->crystal.add(sub, true);
  args->pump.add(sub);
  args->grid.add(sub);
  args->detection.add(sub);
  sub->add_option("--pmf-points", args->pmf_points, "Samples of the PMF across ±8π/l")->capture_default_str();
  sub->add_option("--emit-timetags", args->emit_timetags, "Also synthesize a time-tag file (.bin or .csv)");
  sub->add_option("--pairs", args->pairs, "Pairs to synthesize")->capture_default_str();
  sub->add_option("--jitter-ps", args->jitter_ps, "Gaussian timing jitter per detection")->capture_default_str();
  sub->add_option("--trigger-dark-hz", args->trigger_dark_hz, "Trigger dark-count triples per second");
  sub->add_option("--signal-dark-hz", args->signal_dark_hz, "Signal dark-count triples per second");
  sub->add_option("--idler-dark-hz", args->idler_dark_hz, "Idler dark-count triples per second");
  sub->add_option("--uniform-background-hz", args->uniform_background_hz, "Uncorrelated triples per second");
  sub->callback([args, &common] { run_simulate(*args, common); });
}

void add_sweep(CLI::App& app, const Common& common) {
  auto args = std::make_shared<SweepArgs>();
  auto* sub = app.add_subcommand("sweep", "Purity and brightness against sigma or pump duration");
  sub->configurable();
  args->medium.add(sub);
  args->crystal.add(sub, true);
  args->pump.add(sub);
  args->grid.add(sub);
  sub->add_option("--parameter", args->parameter, "sigma or duration")->capture_default_str();
  sub->add_option("--sigma-ratios", args->sigma_ratios, "Values of length/sigma")->capture_default_str();
  sub->add_option("--durations-ps", args->durations_ps, "Pump durations")->capture_default_str();
  sub->callback([args, &common] { run_sweep(*args, common); });
}

void add_reconstruct(CLI::App& app, const Common& common) {
  auto args = std::make_shared<ReconstructArgs>();
  auto* sub = app.add_subcommand("reconstruct", "JSI histogram, background and purity from time tags");
  sub->configurable();
  sub->add_option("--timetags", args->timetags, "Time-tag file: CSV channel,ps or .bin records");
  sub->add_option("--trigger-channel", args->trigger_channel)->capture_default_str();
  sub->add_option("--signal-channel", args->signal_channel)->capture_default_str();
  sub->add_option("--idler-channel", args->idler_channel)->capture_default_str();
  sub->add_option("--clock-period-ps", args->clock_period_ps, "Used when the file does not state it")
      ->capture_default_str();
  sub->add_option("--reorder-tolerance-ps", args->reorder_tolerance_ps)->capture_default_str();
  sub->add_option("--bin-ps", args->bin_ps, "Histogram bin width")->capture_default_str();
  sub->add_option("--window-ps", args->window_ps, "Histogram span")->capture_default_str();
  sub->add_option("--signal-offset-ps", args->signal_offset_ps)->capture_default_str();
  sub->add_option("--idler-offset-ps", args->idler_offset_ps)->capture_default_str();
  sub->add_option("--max-span-ps", args->max_span_ps, "Largest trigger-to-photon delay; 0 = one period")
      ->capture_default_str();
  sub->add_option("--mode", args->mode, "sqrt_jsi or jsi")->capture_default_str();
  sub->add_flag("--no-background", args->no_background, "Skip background subtraction");
  sub->add_option("--intervals", args->intervals, "Cumulative intervals in the convergence scan")
      ->capture_default_str();
  sub->add_option("--epsilon", args->epsilon, "Plateau threshold")->capture_default_str();
  sub->add_option("--dl-ps-per-nm", args->dl_ps_per_nm)->capture_default_str();
  sub->add_option("--reference-nm", args->reference_nm)->capture_default_str();
  sub->callback([args, &common] { run_reconstruct(*args, common); });
}

void add_rates(CLI::App& app, const Common& common) {
  auto args = std::make_shared<RatesArgs>();
  auto* sub = app.add_subcommand("rates", "Heralding, collection efficiency, gamma and visibility fit");
  sub->configurable();
  sub->add_option("--rates", args->rates, "CSV of singles, coincidences, clock and pump power");
  sub->add_option("--scan", args->scan, "CSV of pump power and visibility");
  sub->add_option("--heralding", args->heralding, "Heralding efficiencies to convert");
  sub->add_option("--detector-efficiency", args->detector_efficiency)->capture_default_str();
  sub->add_option("--optical-loss", args->optical_loss)->capture_default_str();
  sub->add_option("--dark-signal-hz", args->dark_signal_hz)->capture_default_str();
  sub->add_option("--dark-idler-hz", args->dark_idler_hz)->capture_default_str();
  sub->add_flag("--subtract-accidentals", args->subtract_accidentals);
  sub->add_option("--abscissa", args->abscissa, "power, gamma or gamma_squared")->capture_default_str();
  sub->callback([args, &common] { run_rates(*args, common); });
}

} // namespace pdc::cli
