#include "pdc/domain_design.hpp"

#include "pdc/dispersion.hpp"
#include "pdc/error.hpp"
#include "pdc/spectral.hpp"
#include "pdc/text_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace pdc {

namespace {

// Walls at 0, step, 2·step, … ending exactly at `length`. A trailing sliver
// shorter than 1e-9 of a step is folded into the last domain.
std::vector<double> uniform_walls(double length, double step) {
  const auto whole = static_cast<std::size_t>(std::floor(length / step * (1.0 + 1e-12)));
  std::vector<double> walls;
  walls.reserve(whole + 2);
  for (std::size_t j = 0; j <= whole; ++j) {
    walls.push_back(static_cast<double>(j) * step);
  }
  if (length - walls.back() > 1e-9 * step) {
    walls.push_back(length);
  } else {
    walls.back() = length;
  }
  return walls;
}

DomainConfiguration from_walls(const std::vector<double>& walls, const std::vector<int>& signs) {
  DomainConfiguration c;
  c.widths_um.reserve(signs.size());
  for (std::size_t j = 0; j + 1 < walls.size(); ++j) {
    c.widths_um.push_back(walls[j + 1] - walls[j]);
  }
  c.signs = signs;
  return c;
}

struct Runs {
  std::vector<double> walls;
  std::vector<int> signs;
};

// Merges runs of equal sign, keeping the original wall positions.
Runs merge_runs(const std::vector<double>& walls, const std::vector<int>& signs) {
  Runs r;
  r.walls.push_back(walls.front());
  for (std::size_t j = 0; j < signs.size(); ++j) {
    if (!r.signs.empty() && r.signs.back() == signs[j]) {
      r.walls.back() = walls[j + 1];
    } else {
      r.signs.push_back(signs[j]);
      r.walls.push_back(walls[j + 1]);
    }
  }
  return r;
}

std::complex<double> domain_phasor(double z0, double z1, double k) {
  const std::complex<double> i(0.0, 1.0);
  return (std::polar(1.0, k * z1) - std::polar(1.0, k * z0)) / (i * k);
}

} // namespace

TargetProfile TargetProfile::gaussian(double length_m, double sigma_m) {
  TargetProfile p{length_m, sigma_m};
  p.validate();
  return p;
}

TargetProfile TargetProfile::flat(double length_m) {
  TargetProfile p{length_m, std::numeric_limits<double>::infinity()};
  p.validate();
  return p;
}

double TargetProfile::density(double z_m) const {
  if (z_m < 0.0 || z_m > length_m) {
    return 0.0;
  }
  if (is_flat()) {
    return 1.0;
  }
  const double u = (z_m - center_m()) / sigma_m;
  return std::exp(-0.5 * u * u);
}

void TargetProfile::validate() const {
  if (!(length_m > 0.0) || !std::isfinite(length_m)) {
    throw ConfigError("length", "crystal length must be positive and finite");
  }
  if (!(sigma_m > 0.0)) {
    throw ConfigError("sigma", "target width must be > 0");
  }
}

double DomainConfiguration::total_length_um() const {
  return std::accumulate(widths_um.begin(), widths_um.end(), 0.0);
}

std::vector<double> DomainConfiguration::boundaries_m() const {
  std::vector<double> b(widths_um.size() + 1, 0.0);
  double acc_um = 0.0;
  for (std::size_t j = 0; j < widths_um.size(); ++j) {
    acc_um += widths_um[j];
    b[j + 1] = acc_um * 1e-6;
  }
  return b;
}

void DomainConfiguration::validate() const {
  if (widths_um.size() != signs.size()) {
    throw ConfigError("domains", "widths and signs differ in length");
  }
  if (widths_um.empty()) {
    throw ConfigError("domains", "configuration has no domains");
  }
  for (std::size_t j = 0; j < widths_um.size(); ++j) {
    if (!(widths_um[j] > 0.0) || !std::isfinite(widths_um[j])) {
      throw ConfigError("domains", "domain " + std::to_string(j) + " has non-positive width");
    }
    if (signs[j] != 1 && signs[j] != -1) {
      throw ConfigError("domains", "domain " + std::to_string(j) + " sign must be +1 or -1");
    }
  }
}

DomainConfiguration periodic_configuration(double length_m, double period_m, double duty) {
  if (!(period_m > 0.0)) {
    throw ConfigError("poling_period", "must be > 0");
  }
  if (!(duty > 0.0 && duty < 1.0)) {
    throw ConfigError("duty", "must lie strictly between 0 and 1");
  }
  if (!(length_m > period_m)) {
    throw ConfigError("length", "crystal must be longer than one poling period");
  }
  const double length_um = length_m * 1e6;
  const double period_um = period_m * 1e6;

  std::vector<double> walls;
  if (duty == 0.5) {
    walls = uniform_walls(length_um, 0.5 * period_um);
  } else {
    walls.push_back(0.0);
    for (std::size_t k = 0;; ++k) {
      const double start = static_cast<double>(k) * period_um;
      const double mid = start + duty * period_um;
      const double end = static_cast<double>(k + 1) * period_um;
      if (mid >= length_um * (1.0 - 1e-12)) {
        break;
      }
      walls.push_back(mid);
      if (end >= length_um * (1.0 - 1e-12)) {
        break;
      }
      walls.push_back(end);
    }
    walls.push_back(length_um);
  }
  std::vector<int> signs(walls.size() - 1);
  for (std::size_t j = 0; j < signs.size(); ++j) {
    signs[j] = (j % 2 == 0) ? 1 : -1;
  }
  return from_walls(walls, signs);
}

double target_amplitude(const TargetProfile& profile, double z_m) {
  profile.validate();
  if (z_m < 0.0 || z_m > profile.length_m) {
    throw RangeError("z: position outside the crystal [0, l]");
  }
  if (profile.is_flat()) {
    return kMaxAmplitudeSlope * z_m;
  }
  const double s = profile.sigma_m;
  const double root2s = std::sqrt(2.0) * s;
  return kMaxAmplitudeSlope * s * std::sqrt(kPi / 2.0) *
         (std::erf(profile.length_m / (2.0 * root2s)) + std::erf((z_m - profile.center_m()) / root2s));
}

DomainConfiguration track_domains(const TargetProfile& profile, double period_m, const TrackingOptions& options) {
  profile.validate();
  if (!(period_m > 0.0)) {
    throw ConfigError("poling_period", "must be > 0");
  }
  if (options.subdomains_per_coherence_length < 1) {
    throw ConfigError("subdomains_per_coherence_length", "must be >= 1");
  }
  if (!(options.min_domain_width_um >= 0.0)) {
    throw ConfigError("min_domain_width_um", "must be >= 0");
  }
  const double length_um = profile.length_m * 1e6;
  const double step_um = 0.5 * period_m * 1e6 / options.subdomains_per_coherence_length;
  if (!(length_um > step_um)) {
    throw ConfigError("length", "crystal shorter than one candidate domain");
  }
  const auto walls = uniform_walls(length_um, step_um);
  const double k = 2.0 * kPi / period_m;
  const std::complex<double> i(0.0, 1.0);

  const double bound = options.max_deviation_steps * (kPi / 2.0) * 0.5 * period_m;
  std::vector<int> signs(walls.size() - 1);
  std::complex<double> acc = 0.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < signs.size(); ++j) {
    const double z0 = walls[j] * 1e-6;
    const double z1 = walls[j + 1] * 1e-6;
    const auto e = domain_phasor(z0, z1, k);
    const auto target = i * target_amplitude(profile, std::min(z1, profile.length_m));
    const double dev_plus = std::abs(acc + e - target);
    const double dev_minus = std::abs(acc - e - target);
    signs[j] = dev_plus <= dev_minus ? 1 : -1;
    acc += static_cast<double>(signs[j]) * e;
    worst = std::max(worst, std::min(dev_plus, dev_minus));
  }
  if (worst > bound) {
    throw ConfigError("subdomains_per_coherence_length",
                      "domain grid too coarse: tracking deviation " + io::format_double(worst) +
                          " m exceeds bound " + io::format_double(bound) + " m");
  }

  auto runs = merge_runs(walls, signs);
  if (options.min_domain_width_um > 0.0) {
    // Flipping a too-narrow domain joins it with its opposite-sign neighbours.
    for (bool changed = true; changed && runs.signs.size() > 1;) {
      changed = false;
      for (std::size_t j = 0; j < runs.signs.size(); ++j) {
        if (runs.walls[j + 1] - runs.walls[j] < options.min_domain_width_um) {
          runs.signs[j] = -runs.signs[j];
          runs = merge_runs(runs.walls, runs.signs);
          changed = true;
          break;
        }
      }
    }
  }
  return from_walls(runs.walls, runs.signs);
}

std::vector<std::complex<double>> accumulated_amplitude(const DomainConfiguration& config, double dk) {
  config.validate();
  const auto walls = config.boundaries_m();
  std::vector<std::complex<double>> out(walls.size(), 0.0);
  for (std::size_t j = 0; j < config.size(); ++j) {
    std::complex<double> piece;
    if (dk == 0.0) {
      piece = walls[j + 1] - walls[j];
    } else {
      piece = domain_phasor(walls[j], walls[j + 1], dk);
    }
    out[j + 1] = out[j] + static_cast<double>(config.signs[j]) * piece;
  }
  return out;
}

double effective_nonlinearity(const DomainConfiguration& config, double dk0) {
  config.validate();
  if (!(std::abs(dk0) > 0.0) || !std::isfinite(dk0)) {
    throw ConfigError("dk0", "phase-matched wavevector must be finite and nonzero");
  }
  const auto reference = periodic_configuration(config.total_length_m(), 2.0 * kPi / std::abs(dk0), 0.5);
  const DomainPmf design(config);
  const DomainPmf ideal(reference);
  return std::abs(design(dk0)) / std::abs(ideal(dk0));
}

void write_domains_csv(std::ostream& out, const DomainConfiguration& config) {
  config.validate();
  out << "width_um,sign\n";
  for (std::size_t j = 0; j < config.size(); ++j) {
    out << io::format_double(config.widths_um[j]) << ',' << config.signs[j] << '\n';
  }
}

void save_domains_csv(const std::filesystem::path& path, const DomainConfiguration& config) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  write_domains_csv(out, config);
}

DomainConfiguration read_domains_csv(std::istream& in, const std::string& source_name) {
  const auto table = io::parse_csv(in, source_name);
  const auto wc = table.column("width_um");
  const auto sc = table.column("sign");
  DomainConfiguration c;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    c.widths_um.push_back(table.number(r, wc));
    const auto s = io::parse_int(table.rows[r][sc]);
    if (!s || (*s != 1 && *s != -1)) {
      throw DataError(source_name + ": row " + std::to_string(r + 1) + ": sign must be 1 or -1");
    }
    c.signs.push_back(static_cast<int>(*s));
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw DataError(source_name + ": " + e.what());
  }
  return c;
}

DomainConfiguration load_domains_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return read_domains_csv(in, path.string());
}

} // namespace pdc
