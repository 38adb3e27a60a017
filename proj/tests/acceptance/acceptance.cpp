// Acceptance run: one PASS/FAIL line per criterion, context lines indented.
// Exit status is the number of failing criteria.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pdc/analysis.hpp"
#include "pdc/counting.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/domain_design.hpp"
#include "pdc/jsi_reconstruction.hpp"
#include "pdc/spectral.hpp"

using namespace pdc;

namespace {

int failures = 0;

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <class... Args>
void context(const char* fmt, Args... args) {
  std::printf("      ");
  std::printf(fmt, args...);
  std::printf("\n");
}

template <class... Args>
void verdict(int id, bool pass, const char* fmt, Args... args) {
  std::printf("[%s] %d ", pass ? "PASS" : "FAIL", id);
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
  if (!pass) {
    ++failures;
  }
}

const DispersionModel& ktp() {
  static const auto m = DispersionModel::ktp();
  return m;
}

const InteractionGeometry& geometry() {
  static const auto g = with_poling_period(ktp(), InteractionGeometry::ktp_type2());
  return g;
}

PumpEnvelope pump(double ps = 1.3) { return {PulseShape::sech2, geometry().pump_center, ps}; }

const DomainConfiguration& akt_crystal() {
  static const auto c = track_domains(TargetProfile::gaussian(0.030, 0.00638), geometry().poling_period_m);
  return c;
}

const DomainConfiguration& ppkt_crystal() {
  static const auto c = periodic_configuration(0.022, geometry().poling_period_m);
  return c;
}

JointSpectralAmplitude jsa_of(const DomainConfiguration& c, std::size_t points) {
  const auto grid = FrequencyGrid::around(geometry(), default_half_span(pump()), points);
  return build_jsa(c, pump(), ktp(), geometry(), grid);
}

const JointSpectralAmplitude& akt_jsa() {
  static const auto j = jsa_of(akt_crystal(), 512);
  return j;
}

std::complex<double> quadrature_pmf(const DomainConfiguration& c, double dk) {
  using boost::math::quadrature::gauss_kronrod;
  const auto z = c.boundaries_m();
  std::complex<double> sum = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double w = z[j + 1] - z[j];
    const double re = gauss_kronrod<double, 61>::integrate([&](double u) { return std::cos(dk * u); }, 0.0, w, 5, 1e-9);
    const double im = gauss_kronrod<double, 61>::integrate([&](double u) { return std::sin(dk * u); }, 0.0, w, 5, 1e-9);
    sum += static_cast<double>(c.signs[j]) * std::exp(std::complex<double>(0.0, dk * z[j])) * std::complex<double>(re, im);
  }
  return sum;
}

void pmf_oracle() {
  Stopwatch clock;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> count(1, 200);
  std::uniform_real_distribution<double> width(5.0, 40.0);
  std::bernoulli_distribution flip(0.5);
  const double k0 = std::abs(grating_wavevector(ktp(), geometry()));
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    DomainConfiguration c;
    const int n = count(rng);
    for (int j = 0; j < n; ++j) {
      c.widths_um.push_back(width(rng));
      c.signs.push_back(flip(rng) ? 1 : -1);
    }
    std::vector<double> dk;
    for (int k = 0; k <= 100; ++k) {
      dk.push_back(-2.0 * k0 + 4.0 * k0 * k / 100.0);
    }
    const auto pmf = pmf_from_domains(c, dk);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < dk.size(); ++k) {
      const auto q = quadrature_pmf(c, dk[k]);
      num += std::norm(pmf.values[k] - q);
      den += std::norm(q);
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  const double t = clock.seconds();
  verdict(1, worst < 1e-8 && t < 30.0,
          "PMF oracle equivalence: worst relative L2 error %.2e over 50 configurations (< 1e-8), %.1f s (< 30 s)",
          worst, t);
}

void akt_purity() {
  Stopwatch clock;
  const double p = jsa_purity(akt_jsa());
  const double t = clock.seconds();
  verdict(2, std::abs(p - 0.987) <= 0.007 && t < 60.0,
          "aKTP theoretical purity: %.4f at 512^2 (target 0.987 +/- 0.007), %.1f s (< 60 s)", p, t);
}

void apodized_vs_periodic() {
  const double a = jsa_purity(akt_jsa());
  const auto pp = jsa_of(ppkt_crystal(), 512);
  const double p = jsa_purity(pp);
  const double lam = wavelength_from_omega(geometry().signal_center);
  double reached = std::numeric_limits<double>::quiet_NaN();
  double at_fwhm = 0.0;
  for (double nm : {7.4, 5.0, 3.0, 2.0, 1.5, 1.0, 0.7, 0.5}) {
    const auto f = apply_filter(pp, SpectralFilter::from_fwhm(lam, nm * 1e-9));
    const double q = jsa_purity(f);
    context("ppKTP with %.1f nm quartic filter: purity %.4f, transmitted %.3f", nm, q, f.transmitted_fraction);
    if (std::isnan(reached) && q >= 0.98) {
      reached = q;
      at_fwhm = nm;
    }
  }
  const bool pass = a - p >= 0.08 && !std::isnan(reached);
  verdict(3, pass,
          "apodized vs periodic: aKTP %.4f - ppKTP(22 mm) %.4f = %.1f points (>= 8); filtered ppKTP %.4f at %.1f nm "
          "(>= 0.98)",
          a, p, 100.0 * (a - p), reached, at_fwhm);
}

void sigma_tradeoff() {
  const double l = 0.030;
  const std::vector<double> ratios{10.0, 8.0, 6.0, 4.7, 4.0, 3.0, 2.0};
  std::vector<double> sigmas;
  for (double r : ratios) {
    sigmas.push_back(l / r);
  }
  SweepSettings s;
  s.geometry = geometry();
  s.pump = pump();
  s.grid_points = 256;
  const auto r = sweep_sigma(sigmas, l, s);
  bool monotone = true;
  for (std::size_t k = 0; k < r.size(); ++k) {
    context("sigma = l/%.1f: brightness %.4f, side lobe %.3e (intensity %.2e), purity %.4f", ratios[k],
            r.relative_brightness[k], r.side_lobe_level[k], r.side_lobe_level[k] * r.side_lobe_level[k],
            r.purity[k]);
    if (k > 0 && r.relative_brightness[k] < r.relative_brightness[k - 1]) {
      monotone = false;
    }
  }
  const double at_half = r.side_lobe_level[6];
  const double at_47 = r.side_lobe_level[3];
  verdict(4, at_half > 1e-2 && at_47 < 1e-3 && monotone,
          "sigma trade-off: side lobe %.3e at l/2 (> 1e-2), %.3e at l/4.7 (< 1e-3), brightness %s", at_half, at_47,
          monotone ? "nondecreasing" : "NOT monotone");
}

void duration_sensitivity() {
  Stopwatch clock;
  std::vector<double> durations;
  for (int k = 0; k <= 10; ++k) {
    durations.push_back(0.8 + 0.1 * k);
  }
  SweepSettings s;
  s.geometry = geometry();
  s.pump = pump();
  s.grid_points = 512;
  const auto r = sweep_pulse_duration(durations, akt_crystal(), s);
  const double t = clock.seconds();
  const std::size_t best = r.best_index();
  for (std::size_t k = 0; k < r.size(); ++k) {
    context("%.1f ps: purity %.4f", durations[k], r.purity[k]);
  }
  const double top = r.purity[5];
  const double short_drop = 100.0 * (top - r.purity[1]);
  const double long_drop = 100.0 * (top - r.purity[9]);
  const bool pass = best == 5 && short_drop >= 4.0 && short_drop <= 8.0 && long_drop > 0.0 && long_drop <= 8.0 &&
                    t < 300.0;
  verdict(5, pass,
          "pulse-duration sensitivity: maximum at %.1f ps (1.3); drop %.2f points at 0.9 ps (6 +/- 2), %.2f at 1.7 ps "
          "(0, 8]; %.1f s (< 300 s)",
          durations[best], short_drop, long_drop, t);
}

void efficiency_arithmetic() {
  const double a = 100.0 * collection_efficiency(0.675, 0.80, 0.079);
  const double b = 100.0 * collection_efficiency(0.572, 0.80, 0.079);
  verdict(6, std::abs(a - 91.8) <= 0.1 && std::abs(b - 77.4) <= 0.1,
          "efficiency arithmetic: %.2f%% (91.8 +/- 0.1), %.2f%% (77.4 +/- 0.1)", a, b);
}

void dispersive_mapping() {
  const DispersionMap m;
  const double d = time_to_wavelength(1.0, m) - m.reference_nm;
  verdict(7, std::abs(d - 0.0028) <= 1e-4, "dispersive mapping: 1 ps -> %.5f nm (0.0028 +/- 1e-4) at D*L = %.1f ps/nm",
          d, m.dl_ps_per_nm);
}

void reconstruction_round_trip() {
  Stopwatch clock;
  const auto& jsa = akt_jsa();
  const double grid = jsa_purity(jsa, SpectrumSource::sqrt_jsi);
  SynthesisSettings s;
  s.pairs = 1'000'000;
  s.seed = 1;
  const auto h = build_histogram(synthesize_timetags(jsa, DispersionMap{}, s));
  const double p = histogram_purity(h);
  context("sqrt-JSI purity: grid %.4f, reconstructed %.4f from %lld triples", grid, p,
          static_cast<long long>(h.triples));

  SynthesisSettings d = s;
  d.pairs = 200'000;
  d.seed = 2;
  d.trigger_dark_hz = 4e7;
  d.signal_dark_hz = 3e7;
  d.idler_dark_hz = 2e7;
  d.uniform_background_hz = 2e8;
  const auto hd = build_histogram(synthesize_timetags(jsa, DispersionMap{}, d));
  const auto bg = estimate_background(hd);
  const double steps = static_cast<double>(d.clock_period_ps) / 50.0;
  auto rel = [&](double got, double hz) {
    const double want = hz * d.acquisition_s() / steps;
    return std::abs(got - want) / want;
  };
  const double e_diag = rel(bg.diagonal_rate, d.trigger_dark_hz);
  const double e_sig = rel(bg.signal_stripe_rate, d.signal_dark_hz);
  const double e_idl = rel(bg.idler_stripe_rate, d.idler_dark_hz);
  const double e_uni = std::abs(bg.uniform_rate - d.uniform_background_hz * d.acquisition_s() / (steps * steps)) /
                       (d.uniform_background_hz * d.acquisition_s() / (steps * steps));
  context("background relative errors: diagonal %.3f, signal stripe %.3f, idler stripe %.3f, floor %.3f", e_diag,
          e_sig, e_idl, e_uni);
  const double t = clock.seconds();
  const double worst = std::max({e_diag, e_sig, e_idl});
  verdict(8, std::abs(p - grid) <= 0.02 && worst <= 0.1 && t < 120.0,
          "reconstruction round trip: |%.4f - %.4f| = %.4f (<= 0.02); worst stripe-rate error %.1f%% (<= 10%%); "
          "%.1f s (< 120 s)",
          p, grid, std::abs(p - grid), 100.0 * worst, t);
}

double coverage(RepeatError error, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.005);
  const std::vector<double> powers{2.0, 4.0, 6.0, 8.0, 10.0};
  int covered = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<VisibilityPoint> raw;
    for (double p : powers) {
      for (int r = 0; r < 5; ++r) {
        raw.push_back({p, 0.980 - 0.002 * p + noise(rng)});
      }
    }
    const auto fit = fit_visibility_vs_power(aggregate_repeats(raw, FitAbscissa::power, error));
    if (std::abs(fit.intercept - 0.980) <= 2.0 * fit.intercept_error) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / trials;
}

void visibility_fit() {
  const double c = coverage(RepeatError::sample_std, 1000, 20240611);
  context("standard-error-of-mean error bars instead: coverage %.3f",
          coverage(RepeatError::std_error_of_mean, 1000, 20240611));
  verdict(9, c >= 0.95,
          "visibility fit: intercept 0.980 within 2 standard errors in %.1f%% of 1000 trials (>= 95%%)", 100.0 * c);
}

} // namespace

int main() {
  std::printf("acceptance run: KTP model '%s', poling period %.4f um\n", ktp().name().c_str(),
              geometry().poling_period_m * 1e6);
  pmf_oracle();
  akt_purity();
  apodized_vs_periodic();
  sigma_tradeoff();
  duration_sensitivity();
  efficiency_arithmetic();
  dispersive_mapping();
  reconstruction_round_trip();
  visibility_fit();
  std::printf("[CONTEXT] 10 not reproducible here: measured four-fold visibility 98.6 +/- 1.1%%, brightness "
              "3900/4900 cc/mW/s and experimental sqrt-JSI purities 91.17%%/94.43%% need the lab hardware; "
              "criteria 1-9 stand in for them\n");
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
