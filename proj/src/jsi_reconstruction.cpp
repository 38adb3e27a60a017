#include "pdc/jsi_reconstruction.hpp"

#include "pdc/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

namespace pdc {

namespace {

constexpr std::size_t kRecordBytes = 9;

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Checks per-channel ordering and sorts the merged stream by time.
void finish_stream(TimeTagStream& s, std::int64_t tolerance, const std::string& source_name) {
  std::array<std::int64_t, 256> last;
  last.fill(std::numeric_limits<std::int64_t>::min());
  bool sorted = true;
  std::int64_t prev = std::numeric_limits<std::int64_t>::min();
  for (std::size_t k = 0; k < s.events.size(); ++k) {
    const auto& e = s.events[k];
    auto& l = last[e.channel];
    if (l != std::numeric_limits<std::int64_t>::min() && e.ps < l - tolerance) {
      throw DataError(source_name + ": event " + std::to_string(k + 1) + ": channel " +
                      std::to_string(e.channel) + " goes back in time by " + std::to_string(l - e.ps) + " ps");
    }
    l = std::max(l, e.ps);
    sorted = sorted && e.ps >= prev;
    prev = e.ps;
  }
  if (!sorted) {
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const TimeTag& a, const TimeTag& b) { return a.ps < b.ps; });
  }
}

void check_channel(const ChannelRoles& roles, std::int64_t channel, const std::string& where) {
  if (channel < 0 || channel > 255 || !roles.known(static_cast<std::uint8_t>(channel))) {
    throw DataError(where + ": unknown channel " + std::to_string(channel));
  }
}

void check_roles(const ChannelRoles& r) {
  if (r.trigger == r.signal || r.trigger == r.idler || r.signal == r.idler) {
    throw ConfigError("channels", "trigger, signal and idler channels must differ");
  }
}

struct Triple {
  std::int64_t trigger_ps;
  std::int64_t signal_delay;
  std::int64_t idler_delay;
};

// Applies the triple rule to events[begin, end), which must start at a
// trigger or at the stream start. Calls emit(triple) for every triple.
template <class Emit>
void scan_triples(const TimeTagStream& s, std::size_t begin, std::size_t end, std::int64_t span, Emit&& emit) {
  const auto& roles = s.roles;
  bool open = false;
  std::int64_t t = 0;
  constexpr std::int64_t none = std::numeric_limits<std::int64_t>::min();
  std::int64_t sig = none;
  std::int64_t idl = none;
  auto close = [&] {
    if (open && sig != none && idl != none && sig - t < span && idl - t < span) {
      emit(Triple{t, sig - t, idl - t});
    }
  };
  for (std::size_t k = begin; k < end; ++k) {
    const auto& e = s.events[k];
    if (e.channel == roles.trigger) {
      close();
      open = true;
      t = e.ps;
      sig = none;
      idl = none;
    } else if (!open) {
      continue;
    } else if (e.channel == roles.signal) {
      if (sig == none) {
        sig = e.ps;
      }
    } else if (e.channel == roles.idler) {
      if (idl == none) {
        idl = e.ps;
      }
    }
  }
  close();
}

struct Binner {
  const HistogramSettings& settings;
  std::int64_t period;

  // Returns false when the folded delay lies outside the window.
  bool bin(const Triple& tr, Eigen::Index& row, Eigen::Index& col) const {
    const std::int64_t ds = floor_mod(tr.signal_delay - settings.signal_offset_ps, period);
    const std::int64_t di = floor_mod(tr.idler_delay - settings.idler_offset_ps, period);
    if (ds >= settings.window_ps || di >= settings.window_ps) {
      return false;
    }
    row = static_cast<Eigen::Index>(ds / settings.bin_width_ps);
    col = static_cast<Eigen::Index>(di / settings.bin_width_ps);
    return true;
  }
};

JsiHistogram empty_histogram(const TimeTagStream& s, const HistogramSettings& settings) {
  settings.validate(s.clock_period_ps);
  check_roles(s.roles);
  JsiHistogram h;
  h.settings = settings;
  h.clock_period_ps = s.clock_period_ps;
  const auto n = static_cast<Eigen::Index>(settings.bins());
  h.counts = CountMatrix::Zero(n, n);
  return h;
}

std::int64_t span_of(const HistogramSettings& settings, std::int64_t period) {
  return settings.max_span_ps > 0 ? settings.max_span_ps : period;
}

void fill(JsiHistogram& h, const TimeTagStream& s, std::size_t begin, std::size_t end) {
  const Binner binner{h.settings, h.clock_period_ps};
  scan_triples(s, begin, end, span_of(h.settings, h.clock_period_ps), [&](const Triple& tr) {
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    if (binner.bin(tr, r, c)) {
      ++h.counts(r, c);
      ++h.triples;
    } else {
      ++h.dropped;
    }
  });
}

// Signed index difference, taken around the ring when the histogram wraps.
long offset(long a, long b, long n, bool wrap) {
  long d = a - b;
  if (wrap) {
    d = ((d % n) + n) % n;
    if (d > n / 2) {
      d -= n;
    }
  }
  return d;
}

double median(std::vector<double> v) {
  if (v.empty()) {
    throw DataError("no samples for a median");
  }
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) {
    return upper;
  }
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
}

// Bins at or above half the maximum, walking out from the peak along a line.
long half_width(const Eigen::MatrixXd& m, long i0, long j0, long di, long dj) {
  const double half = 0.5 * m(i0, j0);
  long w = 1;
  for (long sgn : {-1L, 1L}) {
    long i = i0 + sgn * di;
    long j = j0 + sgn * dj;
    while (i >= 0 && j >= 0 && i < m.rows() && j < m.cols() && m(i, j) >= half) {
      ++w;
      i += sgn * di;
      j += sgn * dj;
    }
  }
  return w;
}

Eigen::MatrixXd box_smooth(const Eigen::MatrixXd& m, long r) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      double s = 0.0;
      for (long a = std::max(0L, i - r); a <= std::min<long>(m.rows() - 1, i + r); ++a) {
        for (long b = std::max(0L, j - r); b <= std::min<long>(m.cols() - 1, j + r); ++b) {
          s += m(a, b);
        }
      }
      out(i, j) = s;
    }
  }
  return out;
}

Eigen::VectorXd normalized(Eigen::VectorXd v) {
  const double s = v.sum();
  if (s > 0.0) {
    v /= s;
  } else {
    v.setConstant(1.0 / static_cast<double>(v.size()));
  }
  return v;
}

} // namespace

std::size_t TimeTagStream::count(std::uint8_t channel) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [channel](const TimeTag& e) { return e.channel == channel; }));
}

TimeTagStream read_timetags_csv(std::istream& in, const IngestOptions& options, const std::string& source_name) {
  check_roles(options.roles);
  TimeTagStream s;
  s.roles = options.roles;
  s.clock_period_ps = options.clock_period_ps;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = io::trim(line);
    if (t.empty()) {
      continue;
    }
    if (t.front() == '#') {
      const auto body = io::trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos && io::trim(body.substr(0, eq)) == "clock_period_ps") {
        const auto v = io::parse_int(io::trim(body.substr(eq + 1)));
        if (!v || *v <= 0) {
          throw DataError(source_name + ":" + std::to_string(line_no) + ": bad clock_period_ps");
        }
        s.clock_period_ps = *v;
      }
      continue;
    }
    const auto cells = io::split(t, ',');
    if (!seen_data && cells.size() == 2 && io::trim(cells[0]) == "channel" && io::trim(cells[1]) == "ps") {
      seen_data = true;
      continue;
    }
    seen_data = true;
    if (cells.size() != 2) {
      ++s.rejected;
      continue;
    }
    const auto ch = io::parse_int(io::trim(cells[0]));
    const auto ps = io::parse_int(io::trim(cells[1]));
    if (!ch || !ps || *ps < 0) {
      ++s.rejected;
      continue;
    }
    check_channel(options.roles, *ch, source_name + ":" + std::to_string(line_no));
    s.events.push_back({static_cast<std::uint8_t>(*ch), *ps});
  }
  finish_stream(s, options.reorder_tolerance_ps, source_name);
  return s;
}

TimeTagStream read_timetags_binary(std::istream& in, const IngestOptions& options, const std::string& source_name) {
  check_roles(options.roles);
  TimeTagStream s;
  s.roles = options.roles;
  s.clock_period_ps = options.clock_period_ps;
  std::array<unsigned char, kRecordBytes> rec{};
  std::size_t n = 0;
  while (true) {
    in.read(reinterpret_cast<char*>(rec.data()), kRecordBytes);
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) {
      break;
    }
    if (got < kRecordBytes) {
      ++s.rejected;
      break;
    }
    ++n;
    std::uint64_t ps = 0;
    for (std::size_t b = 0; b < 8; ++b) {
      ps |= static_cast<std::uint64_t>(rec[1 + b]) << (8 * b);
    }
    if (ps > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      ++s.rejected;
      continue;
    }
    check_channel(options.roles, rec[0], source_name + ": record " + std::to_string(n));
    s.events.push_back({rec[0], static_cast<std::int64_t>(ps)});
  }
  finish_stream(s, options.reorder_tolerance_ps, source_name);
  return s;
}

TimeTagStream ingest_timetags(const std::filesystem::path& path, const IngestOptions& options) {
  const bool binary = path.extension() == ".bin";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return binary ? read_timetags_binary(in, options, path.string()) : read_timetags_csv(in, options, path.string());
}

void write_timetags_csv(std::ostream& out, const TimeTagStream& s) {
  out << "# clock_period_ps=" << s.clock_period_ps << "\nchannel,ps\n";
  for (const auto& e : s.events) {
    out << static_cast<int>(e.channel) << ',' << e.ps << '\n';
  }
}

void write_timetags_binary(std::ostream& out, const TimeTagStream& s) {
  std::array<unsigned char, kRecordBytes> rec{};
  for (const auto& e : s.events) {
    rec[0] = e.channel;
    const auto ps = static_cast<std::uint64_t>(e.ps);
    for (std::size_t b = 0; b < 8; ++b) {
      rec[1 + b] = static_cast<unsigned char>((ps >> (8 * b)) & 0xFFu);
    }
    out.write(reinterpret_cast<const char*>(rec.data()), kRecordBytes);
  }
}

void DispersionMap::validate() const {
  if (!(dl_ps_per_nm != 0.0) || !std::isfinite(dl_ps_per_nm)) {
    throw ConfigError("dl_ps_per_nm", "dispersion-length product must be finite and nonzero");
  }
  if (!(reference_nm > 0.0)) {
    throw ConfigError("reference_nm", "must be > 0");
  }
  if (!(fiber_length_km > 0.0)) {
    throw ConfigError("fiber_length_km", "must be > 0");
  }
}

double time_to_wavelength(double dt_ps, const DispersionMap& map) {
  map.validate();
  return map.reference_nm + dt_ps / map.dl_ps_per_nm;
}

double wavelength_to_time(double wavelength_nm, const DispersionMap& map) {
  map.validate();
  return (wavelength_nm - map.reference_nm) * map.dl_ps_per_nm;
}

void HistogramSettings::validate(std::int64_t clock_period_ps) const {
  if (bin_width_ps <= 0) {
    throw ConfigError("bin_width_ps", "must be > 0");
  }
  if (window_ps <= 0 || window_ps % bin_width_ps != 0) {
    throw ConfigError("window_ps", "must be a positive multiple of the bin width");
  }
  if (clock_period_ps <= 0) {
    throw ConfigError("clock_period_ps", "must be > 0");
  }
  if (window_ps > clock_period_ps) {
    throw ConfigError("window_ps", "window " + std::to_string(window_ps) + " ps exceeds the clock period " +
                                       std::to_string(clock_period_ps) + " ps");
  }
  if (max_span_ps < 0) {
    throw ConfigError("max_span_ps", "must be >= 0");
  }
}

JsiHistogram build_histogram(const TimeTagStream& stream, const HistogramSettings& settings) {
  auto h = empty_histogram(stream, settings);
  fill(h, stream, 0, stream.events.size());
  return h;
}

JsiHistogram build_histogram_parallel(const TimeTagStream& stream, const HistogramSettings& settings,
                                      std::size_t segments) {
  auto h = empty_histogram(stream, settings);
  segments = std::max<std::size_t>(1, segments);
  const std::size_t n = stream.events.size();
  std::vector<std::size_t> cuts{0};
  for (std::size_t k = 1; k < segments; ++k) {
    std::size_t c = std::max(cuts.back(), n * k / segments);
    while (c < n && stream.events[c].channel != stream.roles.trigger) {
      ++c;
    }
    cuts.push_back(c);
  }
  cuts.push_back(n);
  std::vector<JsiHistogram> parts(segments, h);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < static_cast<long>(segments); ++k) {
    fill(parts[static_cast<std::size_t>(k)], stream, cuts[static_cast<std::size_t>(k)],
         cuts[static_cast<std::size_t>(k) + 1]);
  }
  for (const auto& p : parts) {
    merge(h, p);
  }
  return h;
}

void merge(JsiHistogram& into, const JsiHistogram& other) {
  const auto& a = into.settings;
  const auto& b = other.settings;
  if (a.bin_width_ps != b.bin_width_ps || a.window_ps != b.window_ps || a.signal_offset_ps != b.signal_offset_ps ||
      a.idler_offset_ps != b.idler_offset_ps || into.clock_period_ps != other.clock_period_ps) {
    throw ConfigError("histogram", "cannot merge histograms with different binning");
  }
  into.counts += other.counts;
  into.triples += other.triples;
  into.dropped += other.dropped;
}

Eigen::MatrixXd BackgroundModel::expected(const JsiHistogram& h) const {
  const long n = h.counts.rows();
  const long r = static_cast<long>(mask_radius);
  const bool wrap = h.wraps();
  const long i0 = static_cast<long>(peak_row);
  const long j0 = static_cast<long>(peak_col);
  Eigen::MatrixXd e = Eigen::MatrixXd::Constant(n, n, uniform_rate);
  for (long i = 0; i < n; ++i) {
    const long di = offset(i, i0, n, wrap);
    for (long j = 0; j < n; ++j) {
      const long dj = offset(j, j0, n, wrap);
      const long dd = offset(i - j, i0 - j0, n, wrap);
      if (std::abs(dj) <= r) {
        e(i, j) += signal_stripe_rate * idler_profile(dj + r);
      }
      if (std::abs(di) <= r) {
        e(i, j) += idler_stripe_rate * signal_profile(di + r);
      }
      if (std::abs(dd) <= r) {
        e(i, j) += diagonal_rate * diagonal_profile(dd + r);
      }
    }
  }
  return e;
}

BackgroundModel estimate_background(const JsiHistogram& h) {
  const long n = h.counts.rows();
  if (n < 3) {
    throw DataError("histogram too small to estimate a background");
  }
  const Eigen::MatrixXd m = h.counts.cast<double>();
  if (!(m.sum() > 0.0)) {
    throw DataError("empty histogram");
  }
  const bool wrap = h.wraps();

  const Eigen::MatrixXd smooth = box_smooth(m, 2);
  Eigen::Index pi = 0;
  Eigen::Index pj = 0;
  smooth.maxCoeff(&pi, &pj);
  const long i0 = pi;
  const long j0 = pj;
  const long width = std::max(half_width(smooth, i0, j0, 1, 0), half_width(smooth, i0, j0, 0, 1));
  const long r = 3 * width;
  const long clear = 2 * r + 1;

  BackgroundModel bg;
  bg.peak_row = static_cast<std::size_t>(i0);
  bg.peak_col = static_cast<std::size_t>(j0);
  bg.mask_radius = static_cast<std::size_t>(r);

  auto in_band = [&](long i, long j) {
    return std::abs(offset(i, i0, n, wrap)) <= r || std::abs(offset(j, j0, n, wrap)) <= r ||
           std::abs(offset(i - j, i0 - j0, n, wrap)) <= r;
  };

  std::vector<double> column_means;
  for (long j = 0; j < n; ++j) {
    double s = 0.0;
    long c = 0;
    for (long i = 0; i < n; ++i) {
      if (!in_band(i, j)) {
        s += m(i, j);
        ++c;
      }
    }
    if (c > 0) {
      column_means.push_back(s / static_cast<double>(c));
    }
  }
  if (column_means.empty()) {
    throw DataError("peak and stripes cover the whole window; cannot sample the background");
  }
  bg.uniform_rate = median(column_means);
  const double band_floor = bg.uniform_rate * static_cast<double>(2 * r + 1);

  std::vector<double> signal_stripe;
  std::vector<double> idler_stripe;
  std::vector<double> diagonal;
  for (long t = 0; t < n; ++t) {
    const long dt_row = offset(t, i0, n, wrap);
    const long dt_col = offset(t, j0, n, wrap);
    // Signal darks: row t, columns around j0.
    if (std::abs(dt_row) > clear && j0 - r >= 0 && j0 + r < n) {
      signal_stripe.push_back(m.row(t).segment(j0 - r, 2 * r + 1).sum() - band_floor);
    }
    // Idler darks: column t, rows around i0.
    if (std::abs(dt_col) > clear && i0 - r >= 0 && i0 + r < n) {
      idler_stripe.push_back(m.col(t).segment(i0 - r, 2 * r + 1).sum() - band_floor);
    }
    // Trigger darks: column t, rows along i − j = i0 − j0.
    if (std::abs(dt_col) > clear) {
      double s = 0.0;
      bool inside = true;
      for (long a = -r; a <= r && inside; ++a) {
        long i = t + (i0 - j0) + a;
        if (wrap) {
          i = ((i % n) + n) % n;
        } else if (i < 0 || i >= n) {
          inside = false;
          break;
        }
        s += m(i, t);
      }
      if (inside) {
        diagonal.push_back(s - band_floor);
      }
    }
  }
  if (signal_stripe.empty() || idler_stripe.empty() || diagonal.empty()) {
    throw DataError("peak occupies the whole window; cannot mask it to sample the stripes");
  }
  bg.signal_stripe_rate = std::max(0.0, median(signal_stripe));
  bg.idler_stripe_rate = std::max(0.0, median(idler_stripe));
  bg.diagonal_rate = std::max(0.0, median(diagonal));
  bg.uniform_rate = std::max(0.0, bg.uniform_rate);

  bg.signal_profile = Eigen::VectorXd::Zero(2 * r + 1);
  bg.idler_profile = Eigen::VectorXd::Zero(2 * r + 1);
  bg.diagonal_profile = Eigen::VectorXd::Zero(2 * r + 1);
  for (long a = -r; a <= r; ++a) {
    for (long b = -r; b <= r; ++b) {
      long i = i0 + a;
      long j = j0 + b;
      if (wrap) {
        i = ((i % n) + n) % n;
        j = ((j % n) + n) % n;
      } else if (i < 0 || j < 0 || i >= n || j >= n) {
        continue;
      }
      const double v = std::max(0.0, m(i, j) - bg.uniform_rate);
      bg.signal_profile(a + r) += v;
      bg.idler_profile(b + r) += v;
      if (std::abs(a - b) <= r) {
        bg.diagonal_profile(a - b + r) += v;
      }
    }
  }
  bg.signal_profile = normalized(bg.signal_profile);
  bg.idler_profile = normalized(bg.idler_profile);
  bg.diagonal_profile = normalized(bg.diagonal_profile);
  return bg;
}

Eigen::MatrixXd subtract_background(const JsiHistogram& h, const BackgroundModel& model) {
  return (h.counts.cast<double>() - model.expected(h)).cwiseMax(0.0);
}

double matrix_purity(const Eigen::MatrixXd& counts, SpectrumSource mode) {
  if ((counts.array() < 0.0).any()) {
    throw DataError("histogram has negative bins");
  }
  switch (mode) {
  case SpectrumSource::jsi:
    return purity(schmidt_decompose(counts, mode));
  case SpectrumSource::sqrt_jsi:
    return purity(schmidt_decompose(Eigen::MatrixXd(counts.cwiseSqrt()), mode));
  case SpectrumSource::jsa:
    break;
  }
  throw ConfigError("mode", "a histogram carries no phase; use jsi or sqrt_jsi");
}

double histogram_purity(const JsiHistogram& h, const PurityOptions& options) {
  if (h.counts.size() == 0 || h.counts.sum() == 0) {
    throw DataError("empty histogram");
  }
  if (!options.subtract_background) {
    return matrix_purity(h.counts.cast<double>(), options.mode);
  }
  const auto corrected = subtract_background(h, estimate_background(h));
  if (!(corrected.sum() > 0.0)) {
    throw DataError("nothing left after background subtraction");
  }
  return matrix_purity(corrected, options.mode);
}

ConvergenceTable convergence_scan(const TimeTagStream& stream, std::span<const double> durations_ps,
                                  const HistogramSettings& settings, const PurityOptions& options, double epsilon) {
  if (durations_ps.size() < 2) {
    throw ConfigError("intervals", "convergence scan needs at least 2 intervals");
  }
  if (!(epsilon > 0.0)) {
    throw ConfigError("epsilon", "must be > 0");
  }
  for (std::size_t k = 0; k < durations_ps.size(); ++k) {
    if (!(durations_ps[k] > 0.0) || (k > 0 && !(durations_ps[k] > durations_ps[k - 1]))) {
      throw ConfigError("intervals", "durations must be positive and increasing");
    }
  }
  auto h = empty_histogram(stream, settings);
  std::vector<Triple> triples;
  scan_triples(stream, 0, stream.events.size(), span_of(settings, stream.clock_period_ps),
               [&](const Triple& t) { triples.push_back(t); });

  ConvergenceTable table;
  table.epsilon = epsilon;
  const std::int64_t start = stream.events.empty() ? 0 : stream.events.front().ps;
  const Binner binner{h.settings, h.clock_period_ps};
  std::size_t next = 0;
  for (double d : durations_ps) {
    const double cutoff = static_cast<double>(start) + d;
    while (next < triples.size() && static_cast<double>(triples[next].trigger_ps) < cutoff) {
      Eigen::Index r = 0;
      Eigen::Index c = 0;
      if (binner.bin(triples[next], r, c)) {
        ++h.counts(r, c);
        ++h.triples;
      } else {
        ++h.dropped;
      }
      ++next;
    }
    double p = std::numeric_limits<double>::quiet_NaN();
    try {
      p = histogram_purity(h, options);
    } catch (const DataError&) {
    }
    table.durations_ps.push_back(d);
    table.triples.push_back(h.triples);
    table.purity.push_back(p);
  }
  for (std::size_t k = 1; k < table.purity.size(); ++k) {
    const double a = table.purity[k - 1];
    const double b = table.purity[k];
    if (std::isfinite(a) && std::isfinite(b) && std::abs(b - a) < epsilon) {
      table.plateau_index = k;
      break;
    }
  }
  return table;
}

double SynthesisSettings::acquisition_s() const {
  return static_cast<double>(pairs) * 4.0 * static_cast<double>(clock_period_ps) * 1e-12;
}

void SynthesisSettings::validate() const {
  check_roles(roles);
  if (clock_period_ps <= 0) {
    throw ConfigError("clock_period_ps", "must be > 0");
  }
  if (!(jitter_ps >= 0.0) || !std::isfinite(jitter_ps)) {
    throw ConfigError("jitter_ps", "must be >= 0");
  }
  for (double r : {trigger_dark_hz, signal_dark_hz, idler_dark_hz, uniform_background_hz}) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ConfigError("dark_rate", "background rates must be finite and >= 0");
    }
  }
}

std::int64_t synthesis_time_zero_ps(const SynthesisSettings& s) { return s.clock_period_ps / 2; }

TimeTagStream synthesize_timetags(const JointSpectralAmplitude& jsa, const DispersionMap& map,
                                  const SynthesisSettings& settings) {
  settings.validate();
  map.validate();
  jsa.grid.validate();
  const auto& g = jsa.grid;
  std::vector<double> weights(static_cast<std::size_t>(jsa.values.size()));
  for (Eigen::Index r = 0; r < jsa.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < jsa.values.cols(); ++c) {
      weights[static_cast<std::size_t>(r * jsa.values.cols() + c)] = std::norm(jsa.values(r, c));
    }
  }
  if (!std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; })) {
    throw DataError("joint spectral amplitude is zero everywhere");
  }

  std::mt19937_64 rng(settings.seed);
  std::discrete_distribution<std::size_t> cell(weights.begin(), weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double period = static_cast<double>(settings.clock_period_ps);
  const double t0 = static_cast<double>(synthesis_time_zero_ps(settings));
  const double ss = g.signal_step();
  const double si = g.idler_step();

  auto delay_of = [&](double omega) {
    return t0 + wavelength_to_time(wavelength_from_omega(omega) * 1e9, map);
  };
  auto sample_pair = [&]() {
    const std::size_t k = cell(rng);
    const auto r = k / static_cast<std::size_t>(jsa.values.cols());
    const auto c = k % static_cast<std::size_t>(jsa.values.cols());
    const double ws = g.signal_axis[r] + (unit(rng) - 0.5) * ss;
    const double wi = g.idler_axis[c] + (unit(rng) - 0.5) * si;
    return std::pair<double, double>{delay_of(ws), delay_of(wi)};
  };

  std::vector<std::pair<double, double>> frames;
  frames.reserve(settings.pairs);
  for (std::size_t k = 0; k < settings.pairs; ++k) {
    frames.push_back(sample_pair());
  }
  const double seconds = settings.acquisition_s();
  auto poisson = [&](double rate) -> std::size_t {
    if (rate <= 0.0) {
      return 0;
    }
    std::poisson_distribution<std::size_t> d(rate * seconds);
    return d(rng);
  };
  const std::size_t n_trigger = poisson(settings.trigger_dark_hz);
  for (std::size_t k = 0; k < n_trigger; ++k) {
    auto [ds, di] = sample_pair();
    const double u = unit(rng) * period;
    frames.emplace_back(ds - u, di - u);
  }
  const std::size_t n_signal = poisson(settings.signal_dark_hz);
  for (std::size_t k = 0; k < n_signal; ++k) {
    frames.emplace_back(unit(rng) * period, sample_pair().second);
  }
  const std::size_t n_idler = poisson(settings.idler_dark_hz);
  for (std::size_t k = 0; k < n_idler; ++k) {
    frames.emplace_back(sample_pair().first, unit(rng) * period);
  }
  const std::size_t n_uniform = poisson(settings.uniform_background_hz);
  for (std::size_t k = 0; k < n_uniform; ++k) {
    const double ds = unit(rng) * period;
    frames.emplace_back(ds, unit(rng) * period);
  }
  std::shuffle(frames.begin(), frames.end(), rng);

  TimeTagStream s;
  s.roles = settings.roles;
  s.clock_period_ps = settings.clock_period_ps;
  s.events.reserve(3 * frames.size());
  const std::int64_t spacing = 4 * settings.clock_period_ps;
  auto place = [&](double delay) {
    if (settings.jitter_ps > 0.0) {
      delay += settings.jitter_ps * jitter(rng);
    }
    return floor_mod(std::llround(delay), settings.clock_period_ps);
  };
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::int64_t trigger = static_cast<std::int64_t>(k + 1) * spacing;
    // trigger jitter moves both delays together
    const double tj = settings.jitter_ps > 0.0 ? settings.jitter_ps * jitter(rng) : 0.0;
    const std::int64_t ds = place(frames[k].first - tj);
    const std::int64_t di = place(frames[k].second - tj);
    s.events.push_back({settings.roles.trigger, trigger});
    if (ds <= di) {
      s.events.push_back({settings.roles.signal, trigger + ds});
      s.events.push_back({settings.roles.idler, trigger + di});
    } else {
      s.events.push_back({settings.roles.idler, trigger + di});
      s.events.push_back({settings.roles.signal, trigger + ds});
    }
  }
  return s;
}

void write_histogram_csv(std::ostream& out, const CountMatrix& counts) {
  for (Eigen::Index r = 0; r < counts.rows(); ++r) {
    for (Eigen::Index c = 0; c < counts.cols(); ++c) {
      if (c > 0) {
        out << ',';
      }
      out << counts(r, c);
    }
    out << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const Eigen::MatrixXd& counts) {
  for (Eigen::Index r = 0; r < counts.rows(); ++r) {
    for (Eigen::Index c = 0; c < counts.cols(); ++c) {
      if (c > 0) {
        out << ',';
      }
      out << io::format_double(counts(r, c));
    }
    out << '\n';
  }
}

io::KeyValueDoc histogram_sidecar(const JsiHistogram& h, const std::optional<BackgroundModel>& background,
                                  bool background_subtracted) {
  io::KeyValueDoc doc;
  doc.set("rows", std::string("signal_delay_bin"));
  doc.set("columns", std::string("idler_delay_bin"));
  doc.set("bin_width_ps", static_cast<double>(h.settings.bin_width_ps));
  doc.set("window_ps", static_cast<double>(h.settings.window_ps));
  doc.set("bins", static_cast<double>(h.settings.bins()));
  doc.set("signal_offset_ps", static_cast<double>(h.settings.signal_offset_ps));
  doc.set("idler_offset_ps", static_cast<double>(h.settings.idler_offset_ps));
  doc.set("clock_period_ps", static_cast<double>(h.clock_period_ps));
  doc.set("triples", static_cast<double>(h.triples));
  doc.set("dropped", static_cast<double>(h.dropped));
  doc.set("background_subtracted", std::string(background_subtracted ? "true" : "false"));
  if (background) {
    doc.set("background.uniform_per_bin", background->uniform_rate);
    doc.set("background.diagonal_per_step", background->diagonal_rate);
    doc.set("background.signal_stripe_per_step", background->signal_stripe_rate);
    doc.set("background.idler_stripe_per_step", background->idler_stripe_rate);
    doc.set("background.peak_row", static_cast<double>(background->peak_row));
    doc.set("background.peak_col", static_cast<double>(background->peak_col));
    doc.set("background.mask_radius_bins", static_cast<double>(background->mask_radius));
  }
  return doc;
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& t) {
  out << "duration_ps,triples,purity,plateau\n";
  for (std::size_t k = 0; k < t.durations_ps.size(); ++k) {
    out << io::format_double(t.durations_ps[k]) << ',' << t.triples[k] << ',' << io::format_double(t.purity[k])
        << ',' << (t.plateau_index && k >= *t.plateau_index ? 1 : 0) << '\n';
  }
}

} // namespace pdc
