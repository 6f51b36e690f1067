#include "bandex/fir.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bandex/errors.hpp"

namespace bandex {

namespace {
constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}
}  // namespace

void AnalysisConfig::validate() const {
  if (frame_len <= 0 || frame_len % 2 != 0)
    throw DataError("frame_len must be positive and even");
  if (hop * 2 != frame_len)
    throw DataError("hop must be frame_len/2 (50% overlap)");
  if (lpc_order_wide < 1 || lpc_order_wide >= frame_len)
    throw DataError("lpc_order_wide out of range");
  if (lpc_order_tel < 1 || lpc_order_tel >= frame_len / 2)
    throw DataError("lpc_order_tel out of range");
  if (preemph_alpha < 0.0 || preemph_alpha >= 1.0)
    throw DataError("preemph_alpha must be in [0, 1)");
  if (noise_floor_alpha <= 1.0)
    throw DataError("noise_floor_alpha must exceed 1");
  if (lag_beta < 0.0) throw DataError("lag_beta must be non-negative");
  if (fft_size < 4 || fft_size % 4 != 0)
    throw DataError("fft_size must be a positive multiple of 4");
  if (fft_size / 2 <= lpc_order_wide)
    throw DataError("fft_size too small for lpc_order_wide");
  if (pitch_min < 1 || pitch_max <= pitch_min)
    throw DataError("pitch range invalid");
  if (anti_doubling_theta <= 0.0 || anti_doubling_theta > 1.0)
    throw DataError("anti_doubling_theta must be in (0, 1]");
  if (silence_rms < 0.0) throw DataError("silence_rms must be non-negative");
}

SignalBuffer apply_fir(const SignalBuffer& sig, const FirFilter& filt,
                       bool delay_compensate) {
  const std::size_t n = sig.samples.size();
  const std::size_t t = filt.taps.size();
  SignalBuffer out;
  out.sample_rate = sig.sample_rate;
  out.samples.assign(n, 0.0);
  if (t == 0) return out;

  const int d = delay_compensate ? filt.group_delay() : 0;
  for (std::size_t i = 0; i < n; i++) {
    // y[i] corresponds to causal output index i+d
    const std::size_t m = i + std::size_t(d);
    double acc = 0.0;
    std::size_t k_lo = m >= n ? m - n + 1 : 0;
    std::size_t k_hi = std::min(t, m + 1);
    for (std::size_t k = k_lo; k < k_hi; k++) acc += filt.taps[k] * sig.samples[m - k];
    out.samples[i] = acc;
  }
  return out;
}

double fir_response_at(const FirFilter& filt, double w) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < filt.taps.size(); k++) {
    re += filt.taps[k] * std::cos(w * double(k));
    im -= filt.taps[k] * std::sin(w * double(k));
  }
  return std::hypot(re, im);
}

FirFilter design_linear_phase_ls(const std::vector<double>& target,
                                 const std::vector<double>& weight,
                                 int half_order) {
  const int g = int(target.size());
  if (g < 2 || int(weight.size()) != g)
    throw DataError("design grid and weights must match and hold >= 2 points");
  if (half_order < 1) throw DataError("half_order must be >= 1");

  int active = 0;
  for (double w : weight)
    if (w > 0.0) active++;
  if (active < half_order + 1)
    throw DataError("not enough weighted grid points for requested order");

  Eigen::MatrixXd a(active, half_order + 1);
  Eigen::VectorXd b(active);
  int row = 0;
  for (int j = 0; j < g; j++) {
    if (weight[j] <= 0.0) continue;
    const double sw = std::sqrt(weight[j]);
    const double wj = kPi * double(j) / double(g - 1);
    a(row, 0) = sw;
    for (int k = 1; k <= half_order; k++) a(row, k) = sw * 2.0 * std::cos(k * wj);
    b(row) = sw * target[j];
    row++;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < half_order + 1) {
    double cond = std::abs(qr.maxPivot()) /
                  std::max(1e-300, std::abs(qr.matrixR()(qr.rank() - 1, qr.rank() - 1)));
    std::ostringstream msg;
    msg << "rank-deficient filter design system (rank " << qr.rank() << "/"
        << half_order + 1 << ", pivot ratio ~" << cond << ")";
    throw NumericalError(msg.str());
  }
  Eigen::VectorXd coef = qr.solve(b);

  FirFilter f;
  f.taps.assign(std::size_t(2 * half_order + 1), 0.0);
  f.taps[half_order] = coef(0);
  for (int k = 1; k <= half_order; k++) {
    f.taps[half_order - k] = coef(k);
    f.taps[half_order + k] = coef(k);
  }
  return f;
}

FirFilter design_lowpass(int taps, double cutoff_hz, double rate_hz) {
  if (taps < 3 || taps % 2 == 0) throw DataError("taps must be odd and >= 3");
  if (cutoff_hz <= 0.0 || cutoff_hz >= rate_hz / 2)
    throw DataError("cutoff out of range");
  FirFilter f;
  f.taps.resize(std::size_t(taps));
  const int m = (taps - 1) / 2;
  const double fc = cutoff_hz / rate_hz;  // cycles per sample
  double sum = 0.0;
  for (int n = 0; n < taps; n++) {
    double v = 2.0 * fc * sinc(2.0 * fc * double(n - m));
    v *= 0.54 - 0.46 * std::cos(2.0 * kPi * double(n) / double(taps - 1));
    f.taps[std::size_t(n)] = v;
    sum += v;
  }
  for (double& v : f.taps) v /= sum;  // unity DC gain
  return f;
}

FirFilter design_highpass(int taps, double cutoff_hz, double rate_hz) {
  FirFilter f = design_lowpass(taps, cutoff_hz, rate_hz);
  for (double& v : f.taps) v = -v;
  f.taps[std::size_t((taps - 1) / 2)] += 1.0;
  return f;
}

FrequencyResponse load_magnitude_table(const std::string& path, int grid_size) {
  if (grid_size < 2) throw DataError("grid_size must be >= 2");
  std::ifstream is(path);
  if (!is) throw DataError("cannot open magnitude table: " + path);

  std::vector<double> freq, mag;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    lineno++;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double f, m;
    if (!(ls >> f)) continue;  // blank/comment line
    if (!(ls >> m))
      throw DataError(path + ": line " + std::to_string(lineno) +
                      ": expected 'freq_hz magnitude'");
    if (!std::isfinite(f) || !std::isfinite(m) || f < 0.0 || m < 0.0)
      throw DataError(path + ": line " + std::to_string(lineno) +
                      ": frequencies and magnitudes must be finite and >= 0");
    if (!freq.empty() && f <= freq.back())
      throw DataError(path + ": line " + std::to_string(lineno) +
                      ": frequencies must be strictly ascending");
    freq.push_back(f);
    mag.push_back(m);
  }
  if (freq.size() < 2) throw DataError(path + ": need at least two table rows");

  FrequencyResponse resp;
  resp.rate_hz = 2.0 * freq.back();
  resp.magnitude.resize(std::size_t(grid_size));
  std::size_t seg = 0;
  for (int j = 0; j < grid_size; j++) {
    double f = freq.back() * double(j) / double(grid_size - 1);
    if (f <= freq.front()) {
      resp.magnitude[std::size_t(j)] = mag.front();
      continue;
    }
    while (seg + 2 < freq.size() && freq[seg + 1] < f) seg++;
    double t = (f - freq[seg]) / (freq[seg + 1] - freq[seg]);
    resp.magnitude[std::size_t(j)] = mag[seg] + t * (mag[seg + 1] - mag[seg]);
  }
  return resp;
}

FirFilter design_inverse_irs(const FrequencyResponse& response, int half_order,
                             double w1, double w2) {
  if (!(0.0 < w1 && w1 < w2 && w2 <= kPi))
    throw DataError("inverse design band must satisfy 0 < w1 < w2 <= pi");
  const int g = int(response.size());
  std::vector<double> target(std::size_t(g), 0.0), weight(std::size_t(g), 0.0);
  for (int j = 0; j < g; j++) {
    double wj = kPi * double(j) / double(g - 1);
    if (wj < w1 || wj > w2) continue;
    double m = response.magnitude[std::size_t(j)];
    if (m <= 0.0)
      throw DataError("send characteristic must be positive inside the design band");
    target[std::size_t(j)] = 1.0 / m;
    weight[std::size_t(j)] = 1.0;
  }
  return design_linear_phase_ls(target, weight, half_order);
}

FirFilter design_magnitude_fit(const FrequencyResponse& response,
                               int half_order) {
  std::vector<double> weight(response.size(), 1.0);
  return design_linear_phase_ls(response.magnitude, weight, half_order);
}

BandshapeFilters make_bandshape_filters(const AnalysisConfig& cfg) {
  cfg.validate();
  BandshapeFilters bs;
  bs.lowpass_3500 = design_lowpass(127, 3500.0, 16000.0);
  bs.highpass_3500 = design_highpass(127, 3500.0, 16000.0);
  // Band-stop as LP+HP sum; edges pulled in so the whole 3500-4500 Hz
  // strip sits past the transition regions (>= 30 dB everywhere in it).
  FirFilter lp = design_lowpass(255, 3350.0, 16000.0);
  FirFilter hp = design_highpass(255, 4650.0, 16000.0);
  bs.notch_3500_4500.taps.resize(lp.taps.size());
  for (std::size_t i = 0; i < lp.taps.size(); i++)
    bs.notch_3500_4500.taps[i] = lp.taps[i] + hp.taps[i];
  // Low-band isolation.  Cutoff sits at 300 Hz so a second harmonic up
  // near 240 Hz (f0 = 120) passes intact while >350 Hz is ~-50 dB.
  bs.lowpass_200 = design_lowpass(511, 300.0, 16000.0);
  return bs;
}

}  // namespace bandex
