#include "bandex/lowband.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "bandex/errors.hpp"

namespace bandex {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kAmpEps = 1e-10;
constexpr double kPhaseReliableAmp = 1e-7;

double wrap_phase(double phi) {
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi > kPi) phi -= 2.0 * kPi;
  if (phi < -kPi) phi += 2.0 * kPi;
  return phi;
}
}  // namespace

double HarmonicFit::a1() const { return std::hypot(g1, h1); }
double HarmonicFit::a2() const { return std::hypot(g2, h2); }
double HarmonicFit::phi1() const { return std::atan2(-h1, g1); }
double HarmonicFit::phi2() const { return std::atan2(-h2, g2); }

HarmonicFit harmonic_ls_fit(std::span<const double> frame, double w0) {
  const int n = int(frame.size());
  if (n < 16) throw DataError("harmonic fit frame too short");
  if (!(w0 > 0.0 && w0 < kPi / 2.0))
    throw DataError("harmonic fit needs w0 in (0, pi/2)");

  Eigen::MatrixXd b(n, 5);
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; i++) {
    double win = 0.5 * (1.0 - std::cos(2.0 * kPi * double(i) / double(n)));
    b(i, 0) = win;
    b(i, 1) = win * std::cos(w0 * double(i));
    b(i, 2) = win * std::sin(w0 * double(i));
    b(i, 3) = win * std::cos(2.0 * w0 * double(i));
    b(i, 4) = win * std::sin(2.0 * w0 * double(i));
    t(i) = win * frame[std::size_t(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
  if (qr.rank() < 5)
    throw NumericalError(
        "harmonic fit basis is rank deficient (w0 too close to 0)");
  Eigen::VectorXd g = qr.solve(t);

  HarmonicFit fit;
  fit.w0 = w0;
  fit.g0 = g(0);
  fit.g1 = g(1);
  fit.h1 = g(2);
  fit.g2 = g(3);
  fit.h2 = g(4);
  return fit;
}

std::pair<double, double> normalize_amplitudes(double a1, double a2,
                                               double residual_rms) {
  if (a1 < 0.0 || a2 < 0.0 || residual_rms < 0.0)
    throw DataError("amplitudes and RMS must be non-negative");
  double ref = std::log(residual_rms + kAmpEps);
  return {std::log(a1 + kAmpEps) - ref, std::log(a2 + kAmpEps) - ref};
}

std::pair<double, double> denormalize_amplitudes(double a1_log, double a2_log,
                                                 double residual_rms) {
  if (residual_rms < 0.0) throw DataError("RMS must be non-negative");
  double ref = residual_rms + kAmpEps;
  double a1 = std::exp(a1_log) * ref - kAmpEps;
  double a2 = std::exp(a2_log) * ref - kAmpEps;
  return {std::max(0.0, a1), std::max(0.0, a2)};
}

ResidualHarmonics extract_residual_harmonics(std::span<const double> tel_frame,
                                             double w0) {
  HarmonicFit fit = harmonic_ls_fit(tel_frame, w0);
  ResidualHarmonics rh;
  rh.a1 = fit.a1();
  rh.a2 = fit.a2();
  rh.phi1 = fit.phi1();
  rh.phi2 = fit.phi2();
  rh.reliable1 = rh.a1 >= kPhaseReliableAmp;
  rh.reliable2 = rh.a2 >= kPhaseReliableAmp;
  return rh;
}

std::pair<double, double> PhaseTracker::resolve(const ResidualHarmonics& rh,
                                                double w0, int hop) {
  double phi1 = rh.reliable1 ? rh.phi1 : th1_;
  double phi2 = rh.reliable2 ? rh.phi2 : th2_;
  th1_ = wrap_phase(phi1 + w0 * double(hop));
  th2_ = wrap_phase(phi2 + 2.0 * w0 * double(hop));
  return {phi1, phi2};
}

SignalBuffer synthesize_lowband(const std::vector<LowbandFrame>& frames,
                                const AnalysisConfig& cfg,
                                const BandshapeFilters& bs,
                                std::size_t out_len) {
  cfg.validate();
  SignalBuffer raw;
  raw.sample_rate = 16000;
  raw.samples.assign(out_len, 0.0);
  const int n = cfg.frame_len;
  const int hop = cfg.hop;
  for (std::size_t t = 0; t < frames.size(); t++) {
    const LowbandFrame& f = frames[t];
    if (f.a1 == 0.0 && f.a2 == 0.0) continue;
    std::size_t base = t * std::size_t(hop);
    for (int i = 0; i < n; i++) {
      std::size_t idx = base + std::size_t(i);
      if (idx >= out_len) break;
      double win = 0.5 * (1.0 - std::cos(2.0 * kPi * double(i) / double(n)));
      raw.samples[idx] +=
          win * (f.a1 * std::cos(f.w0 * double(i) + f.phi1) +
                 f.a2 * std::cos(2.0 * f.w0 * double(i) + f.phi2));
    }
  }
  return apply_fir(raw, bs.lowpass_200, true);
}

}  // namespace bandex
