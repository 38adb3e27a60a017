#include "pdc/counting.hpp"

#include "pdc/error.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

namespace pdc {

namespace {

bool has_error_bar(const VisibilityPoint& p) { return std::isfinite(p.std_error) && p.std_error > 0.0; }

void check_fraction(double v, const char* field, bool allow_zero) {
  if (!std::isfinite(v) || v > 1.0 || v < 0.0 || (!allow_zero && v == 0.0)) {
    throw ConfigError(field, allow_zero ? "must lie in [0, 1]" : "must lie in (0, 1]");
  }
}

} // namespace

void RateMeasurement::validate() const {
  for (double v : {singles_signal, singles_idler, coincidences}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DataError(label + (label.empty() ? "" : ": ") + "rates must be finite and nonnegative");
    }
  }
  if (coincidences > std::min(singles_signal, singles_idler)) {
    throw DataError(label + (label.empty() ? "" : ": ") + "coincidences exceed a singles rate");
  }
  if (!(clock_rate > 0.0) || !std::isfinite(clock_rate)) {
    throw DataError(label + (label.empty() ? "" : ": ") + "clock rate must be > 0");
  }
}

HeraldingEfficiency klyshko_efficiency(const RateMeasurement& m) {
  m.validate();
  if (!(m.singles_signal > 0.0) || !(m.singles_idler > 0.0)) {
    throw DataError("heralding efficiency needs nonzero singles");
  }
  HeraldingEfficiency h;
  h.signal = m.coincidences / m.singles_idler;
  h.idler = m.coincidences / m.singles_signal;
  h.mean = 0.5 * (h.signal + h.idler);
  return h;
}

double collection_efficiency(double heralding, double detector_efficiency, double optical_loss) {
  check_fraction(heralding, "heralding", false);
  check_fraction(detector_efficiency, "detector_efficiency", false);
  if (!std::isfinite(optical_loss) || optical_loss < 0.0 || optical_loss >= 1.0) {
    throw ConfigError("optical_loss", "must lie in [0, 1)");
  }
  return heralding / (detector_efficiency * (1.0 - optical_loss));
}

SqueezingEstimate estimate_gamma(const RateMeasurement& m, const GammaOptions& options) {
  m.validate();
  if (options.dark_signal_hz < 0.0 || options.dark_idler_hz < 0.0) {
    throw ConfigError("dark_rate", "must be >= 0");
  }
  const double s_s = m.singles_signal - options.dark_signal_hz;
  const double s_i = m.singles_idler - options.dark_idler_hz;
  double c = m.coincidences;
  if (options.subtract_accidentals) {
    c -= s_s * s_i / m.clock_rate;
  }
  if (!(c > 0.0) || !(s_s > 0.0) || !(s_i > 0.0)) {
    throw DataError("no true coincidences left to estimate the pair rate");
  }
  SqueezingEstimate e;
  e.pair_rate = s_s * s_i / c;
  e.pair_probability_per_pulse = e.pair_rate / m.clock_rate;
  const double mu = e.pair_probability_per_pulse;
  if (mu >= 1.0) {
    throw DataError("mean pair number per pulse >= 1: rates are unphysical for this estimator");
  }
  const double gamma2 = mu / (1.0 + mu);
  e.gamma = std::sqrt(gamma2);
  if (m.has_pump_power()) {
    if (!(m.pump_power_mw > 0.0)) {
      throw DataError("pump power must be > 0");
    }
    e.tau_per_mw = gamma2 / m.pump_power_mw;
  }
  return e;
}

double brightness_per_mw(const RateMeasurement& m) {
  m.validate();
  if (!m.has_pump_power() || !(m.pump_power_mw > 0.0)) {
    throw DataError("brightness needs a pump power > 0");
  }
  return m.coincidences / m.pump_power_mw;
}

FitAbscissa parse_fit_abscissa(std::string_view s) {
  if (s == "power") {
    return FitAbscissa::power;
  }
  if (s == "gamma") {
    return FitAbscissa::gamma;
  }
  if (s == "gamma2") {
    return FitAbscissa::gamma_squared;
  }
  throw ConfigError("abscissa", "unknown abscissa '" + std::string(s) + "' (power, gamma, gamma2)");
}

std::string_view to_string(FitAbscissa a) {
  switch (a) {
  case FitAbscissa::power:
    return "power";
  case FitAbscissa::gamma:
    return "gamma";
  case FitAbscissa::gamma_squared:
    return "gamma2";
  }
  return "?";
}

VisibilityScan aggregate_repeats(std::span<const VisibilityPoint> raw, FitAbscissa abscissa, RepeatError error) {
  std::map<double, std::vector<double>> groups;
  for (const auto& p : raw) {
    if (!std::isfinite(p.x) || !std::isfinite(p.visibility)) {
      throw DataError("scan points must be finite");
    }
    groups[p.x].push_back(p.visibility);
  }
  VisibilityScan scan;
  scan.abscissa = abscissa;
  for (const auto& [x, v] : groups) {
    VisibilityPoint p;
    p.x = x;
    double sum = 0.0;
    for (double y : v) {
      sum += y;
    }
    p.visibility = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double y : v) {
        ss += (y - p.visibility) * (y - p.visibility);
      }
      p.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1));
      if (error == RepeatError::std_error_of_mean) {
        p.std_error /= std::sqrt(static_cast<double>(v.size()));
      }
    }
    scan.points.push_back(p);
  }
  return scan;
}

double to_abscissa(double pump_power_mw, double tau_per_mw, FitAbscissa abscissa) {
  if (pump_power_mw < 0.0) {
    throw ConfigError("pump_power_mw", "must be >= 0");
  }
  switch (abscissa) {
  case FitAbscissa::power:
    return pump_power_mw;
  case FitAbscissa::gamma:
    return std::sqrt(tau_per_mw * pump_power_mw);
  case FitAbscissa::gamma_squared:
    return tau_per_mw * pump_power_mw;
  }
  return 0.0;
}

LinearFit fit_visibility_vs_power(const VisibilityScan& scan) {
  const auto& pts = scan.points;
  if (pts.size() < 2) {
    throw DataError("visibility fit needs at least 2 points");
  }
  for (const auto& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.visibility)) {
      throw DataError("scan points must be finite");
    }
    if (p.visibility < 0.0 || p.visibility > 1.0) {
      throw DataError("visibility " + io::format_double(p.visibility) + " outside [0, 1]");
    }
  }
  LinearFit fit;
  fit.weighted = std::all_of(pts.begin(), pts.end(), has_error_bar);

  std::vector<double> w(pts.size(), 1.0);
  if (fit.weighted) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      w[k] = 1.0 / (pts[k].std_error * pts[k].std_error);
    }
  }
  double sw = 0.0;
  double swx = 0.0;
  double swy = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    sw += w[k];
    swx += w[k] * pts[k].x;
    swy += w[k] * pts[k].visibility;
  }
  const double xm = swx / sw;
  const double ym = swy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  double spread = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double dx = pts[k].x - xm;
    sxx += w[k] * dx * dx;
    sxy += w[k] * dx * (pts[k].visibility - ym);
    spread = std::max(spread, std::abs(dx));
  }
  if (!(spread > 1e-12 * std::max(1.0, std::abs(xm))) || !(sxx > 0.0)) {
    throw DataError("visibility fit needs at least two distinct abscissas");
  }
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double r = pts[k].visibility - fit.at(pts[k].x);
    fit.chi_squared += w[k] * r * r;
  }
  fit.degrees_of_freedom = pts.size() - 2;

  double var_slope = 1.0 / sxx;
  double var_intercept = 1.0 / sw + xm * xm / sxx;
  if (!fit.weighted) {
    const double s2 = fit.degrees_of_freedom > 0 ? fit.chi_squared / static_cast<double>(fit.degrees_of_freedom)
                                                 : std::numeric_limits<double>::quiet_NaN();
    var_slope *= s2;
    var_intercept *= s2;
  }
  fit.slope_error = std::sqrt(var_slope);
  fit.intercept_error = std::sqrt(var_intercept);
  return fit;
}

std::vector<RateMeasurement> read_rates_csv(std::istream& in, const std::string& source_name) {
  const auto t = io::parse_csv(in, source_name);
  const auto cs = t.column("singles_signal_hz");
  const auto ci = t.column("singles_idler_hz");
  const auto cc = t.column("coincidences_hz");
  const auto clock = t.find_column("clock_rate_hz");
  const auto power = t.find_column("pump_power_mw");
  const auto label = t.find_column("label");
  std::vector<RateMeasurement> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    RateMeasurement m;
    m.singles_signal = t.number(r, cs);
    m.singles_idler = t.number(r, ci);
    m.coincidences = t.number(r, cc);
    if (clock) {
      m.clock_rate = t.number(r, *clock);
    }
    if (power && !io::trim(t.rows[r][*power]).empty()) {
      m.pump_power_mw = t.number(r, *power);
    }
    m.label = label ? std::string(io::trim(t.rows[r][*label])) : source_name + ":" + std::to_string(r + 1);
    m.validate();
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<RateMeasurement> load_rates_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return read_rates_csv(in, path.string());
}

VisibilityScan read_scan_csv(std::istream& in, const std::string& source_name) {
  const auto t = io::parse_csv(in, source_name);
  auto cx = t.find_column("pump_power_mw");
  if (!cx) {
    cx = t.column("x");
  }
  const auto cv = t.column("visibility");
  const auto ce = t.find_column("std_error");
  std::vector<VisibilityPoint> raw;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    VisibilityPoint p;
    p.x = t.number(r, *cx);
    p.visibility = t.number(r, cv);
    if (ce && !io::trim(t.rows[r][*ce]).empty()) {
      p.std_error = t.number(r, *ce);
      if (p.std_error < 0.0) {
        throw DataError(source_name + ": row " + std::to_string(r + 1) + ": std_error must be >= 0");
      }
    }
    raw.push_back(p);
  }
  if (ce) {
    return VisibilityScan{std::move(raw), FitAbscissa::power};
  }
  return aggregate_repeats(raw);
}

VisibilityScan load_scan_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return read_scan_csv(in, path.string());
}

io::KeyValueDoc fit_report(const LinearFit& fit, FitAbscissa abscissa) {
  io::KeyValueDoc doc;
  doc.set("abscissa", std::string(to_string(abscissa)));
  doc.set("weighted", std::string(fit.weighted ? "true" : "false"));
  doc.set("intercept", fit.intercept);
  doc.set("intercept_error", fit.intercept_error);
  doc.set("slope", fit.slope);
  doc.set("slope_error", fit.slope_error);
  doc.set("chi_squared", fit.chi_squared);
  doc.set("degrees_of_freedom", static_cast<double>(fit.degrees_of_freedom));
  return doc;
}

void write_fit_csv(std::ostream& out, const VisibilityScan& scan, const LinearFit& fit) {
  out << "x,visibility,std_error,fitted\n";
  for (const auto& p : scan.points) {
    out << io::format_double(p.x) << ',' << io::format_double(p.visibility) << ','
        << (has_error_bar(p) ? io::format_double(p.std_error) : std::string()) << ','
        << io::format_double(fit.at(p.x)) << '\n';
  }
}

} // namespace pdc
