#include "bandex/spectrum.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "bandex/errors.hpp"

namespace bandex {

namespace {
constexpr double kPi = std::numbers::pi;
std::atomic<std::uint64_t> g_clamp_count{0};
}

SpectralEnvelope lpc_to_envelope(const LpcModel& lpc, int n_points) {
  if (n_points < 2) throw DataError("envelope needs >= 2 grid points");
  const int ord = lpc.order();
  SpectralEnvelope env;
  env.log_power.resize(std::size_t(n_points));
  for (int k = 0; k < n_points; k++) {
    double re = 1.0, im = 0.0;  // a'_0 = 1
    const double w = 2.0 * kPi * double(k) / double(2 * n_points);
    for (int i = 1; i <= ord; i++) {
      const double c = -lpc.coeffs[std::size_t(i - 1)];  // a'_i = -a_i
      re += c * std::cos(w * double(i));
      im -= c * std::sin(w * double(i));
    }
    double sa = re * re + im * im;
    if (sa <= 0.0) {
      sa = 1e-30;
      g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    }
    env.log_power[std::size_t(k)] = -std::log(sa);
  }
  return env;
}

std::uint64_t envelope_clamp_count() {
  return g_clamp_count.load(std::memory_order_relaxed);
}

LevinsonResult envelope_to_lpc(const SpectralEnvelope& env, int order,
                               double noise_floor_alpha) {
  const int n = int(env.size());
  if (n < 2) throw DataError("envelope too short");
  if (order >= n) throw DataError("order must be below the grid size");

  // Even-symmetric spectrum on 2n points: S[k], S[2n-k] = S[k]; the
  // Nyquist bin (absent from the stored grid) replicates point n-1.
  std::vector<double> s(std::size_t(n) + 1);
  for (int k = 0; k < n; k++) s[std::size_t(k)] = std::exp(env.log_power[std::size_t(k)]);
  s[std::size_t(n)] = s[std::size_t(n - 1)];

  Autocorrelation ac;
  ac.r.resize(std::size_t(order) + 1);
  const double scale = 1.0 / double(2 * n);
  for (int m = 0; m <= order; m++) {
    double acc = s[0] + (m % 2 == 0 ? s[std::size_t(n)] : -s[std::size_t(n)]);
    for (int k = 1; k < n; k++)
      acc += 2.0 * s[std::size_t(k)] * std::cos(kPi * double(k) * double(m) / double(n));
    ac.r[std::size_t(m)] = acc * scale;
  }
  if (noise_floor_alpha > 1.0) ac.r[0] *= noise_floor_alpha;
  return levinson_durbin(ac, order);
}

std::vector<double> dct(std::span<const double> x, int keep) {
  const int n = int(x.size());
  if (n < 1) throw DataError("dct input empty");
  if (keep < 1 || keep > n) throw DataError("dct keep count out of range");
  std::vector<double> c(std::size_t(keep), 0.0);
  const double s0 = std::sqrt(1.0 / double(n));
  const double sk = std::sqrt(2.0 / double(n));
  for (int k = 0; k < keep; k++) {
    double acc = 0.0;
    for (int i = 0; i < n; i++)
      acc += x[std::size_t(i)] *
             std::cos(kPi * double(2 * i + 1) * double(k) / double(2 * n));
    c[std::size_t(k)] = (k == 0 ? s0 : sk) * acc;
  }
  return c;
}

std::vector<double> idct(std::span<const double> c, int n_points) {
  const int m = int(c.size());
  if (n_points < 1 || m < 1 || m > n_points)
    throw DataError("idct size mismatch");
  std::vector<double> x(std::size_t(n_points), 0.0);
  const double s0 = std::sqrt(1.0 / double(n_points));
  const double sk = std::sqrt(2.0 / double(n_points));
  for (int i = 0; i < n_points; i++) {
    double acc = s0 * c[0];
    for (int k = 1; k < m; k++)
      acc += sk * c[std::size_t(k)] *
             std::cos(kPi * double(2 * i + 1) * double(k) / double(2 * n_points));
    x[std::size_t(i)] = acc;
  }
  return x;
}

double spectral_distortion(const SpectralEnvelope& a, const SpectralEnvelope& b,
                           double f1_hz, double f2_hz, double grid_hz) {
  if (a.size() != b.size()) throw DataError("envelope size mismatch");
  if (grid_hz <= 0.0 || f2_hz < f1_hz) throw DataError("bad distortion band");
  const double scale = 10.0 / std::log(10.0);  // log-power -> amplitude dB
  double acc = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < a.size(); k++) {
    double f = grid_hz * double(k);
    if (f < f1_hz || f > f2_hz) continue;
    double d = scale * (a.log_power[k] - b.log_power[k]);
    acc += d * d;
    count++;
  }
  if (count == 0) throw DataError("distortion band holds no grid points");
  return std::sqrt(acc / double(count));
}

double aggregate_distortion(std::span<const double> per_frame) {
  if (per_frame.empty()) throw DataError("no per-frame distortions");
  double acc = 0.0;
  for (double d : per_frame) acc += d * d;
  return std::sqrt(acc / double(per_frame.size()));
}

}  // namespace bandex
