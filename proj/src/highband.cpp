#include "bandex/highband.hpp"

#include <cmath>

#include "bandex/errors.hpp"
#include "bandex/lpc.hpp"

namespace bandex {

std::vector<double> spectral_fold(std::span<const double> residual) {
  std::vector<double> out(residual.size() * 2, 0.0);
  for (std::size_t i = 0; i < residual.size(); i++) out[2 * i] = 2.0 * residual[i];
  return out;
}

SignalBuffer extend_excitation(const SignalBuffer& residual16,
                               const AnalysisConfig& cfg) {
  cfg.validate();
  if (residual16.sample_rate != 16000)
    throw DataError("extend_excitation expects a 16 kHz residual");
  const int frame = cfg.frame_len;
  const int hop = cfg.hop;
  const std::size_t n = residual16.samples.size();

  SignalBuffer out;
  out.sample_rate = 16000;
  out.samples.assign(n, 0.0);
  if (n == 0) return out;

  // full-wave rectification puts harmonic structure above the band edge
  std::vector<double> rect(n);
  for (std::size_t i = 0; i < n; i++) rect[i] = std::abs(residual16.samples[i]);

  // per-frame order-8 whitening of the rectified signal, applied hop by
  // hop with carried state so segments join cleanly
  static const int kWhitenOrder = 8;
  const std::vector<double> win = hanning_window(frame);
  std::vector<double> state;
  std::vector<double> frame_buf(std::size_t(frame), 0.0);
  LpcModel whiten;
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t seg = std::min(std::size_t(hop), n - pos);
    if (pos + std::size_t(frame) <= n) {
      for (int i = 0; i < frame; i++)
        frame_buf[std::size_t(i)] = rect[pos + std::size_t(i)] * win[std::size_t(i)];
      Autocorrelation ac =
          condition(autocorrelation(frame_buf, kWhitenOrder), cfg);
      whiten = levinson_durbin(ac, kWhitenOrder).model;
    }
    // keep the previous whitener for the trailing partial frame
    analysis_filter(std::span<const double>(rect.data() + pos, seg), whiten,
                    state, std::span<double>(out.samples.data() + pos, seg));
    pos += seg;
  }

  // band-energy renormalization against the input, both measured
  // through the same 3500 Hz low-pass
  static const FirFilter lp = design_lowpass(127, 3500.0, 16000.0);
  SignalBuffer in_band = apply_fir(residual16, lp, true);
  SignalBuffer out_band = apply_fir(out, lp, true);
  auto band_energy = [](const SignalBuffer& s, std::size_t begin, std::size_t len) {
    double acc = 0.0;
    std::size_t stop = std::min(s.samples.size(), begin + len);
    for (std::size_t i = begin; i < stop; i++) acc += s.samples[i] * s.samples[i];
    return acc;
  };

  pos = 0;
  double gain = 0.0;
  while (pos < n) {
    std::size_t seg = std::min(std::size_t(hop), n - pos);
    if (pos + std::size_t(frame) <= n || pos == 0) {
      std::size_t mlen = std::min(std::size_t(frame), n - pos);
      double ein = band_energy(in_band, pos, mlen);
      double eout = band_energy(out_band, pos, mlen);
      gain = eout > 0.0 ? std::sqrt(ein / eout) : 0.0;
    }
    for (std::size_t i = pos; i < pos + seg; i++) out.samples[i] *= gain;
    pos += seg;
  }
  return out;
}

std::vector<std::vector<double>> smooth_envelope_track(
    const std::vector<std::vector<double>>& track) {
  std::vector<std::vector<double>> out(track.size());
  const int n = int(track.size());
  for (int t = 0; t < n; t++) {
    const auto& prev = track[std::size_t(std::max(0, t - 1))];
    const auto& cur = track[std::size_t(t)];
    const auto& next = track[std::size_t(std::min(n - 1, t + 1))];
    if (prev.size() != cur.size() || next.size() != cur.size())
      throw DataError("envelope track rows must share one width");
    std::vector<double> row(cur.size());
    for (std::size_t j = 0; j < cur.size(); j++)
      row[j] = 0.25 * prev[j] + 0.5 * cur[j] + 0.25 * next[j];
    out[std::size_t(t)] = std::move(row);
  }
  return out;
}

SpectralEnvelope assemble_wideband_envelope(const SpectralEnvelope& tel_env,
                                            std::span<const double> high_cep) {
  if (tel_env.size() != 32)
    throw DataError("telephone envelope must hold 32 grid points");
  if (high_cep.empty() || high_cep.size() > 40)
    throw DataError("high-band cepstrum must hold 1..40 coefficients");
  std::vector<double> high = idct(high_cep, 40);  // grid points 24..63

  SpectralEnvelope env;
  env.log_power.assign(64, 0.0);
  for (int k = 0; k < 24; k++) env.log_power[std::size_t(k)] = tel_env.log_power[std::size_t(k)];
  for (int k = 24; k <= 27; k++) {
    double lambda = double(k - 23) / 5.0;  // 0.2 .. 0.8 across the overlap
    env.log_power[std::size_t(k)] = (1.0 - lambda) * tel_env.log_power[std::size_t(k)] +
                                    lambda * high[std::size_t(k - 24)];
  }
  for (int k = 28; k < 64; k++) env.log_power[std::size_t(k)] = high[std::size_t(k - 24)];
  return env;
}

SignalBuffer postprocess_highband(const SignalBuffer& synth,
                                  const BandshapeFilters& bs, double atten_db) {
  SignalBuffer s = apply_fir(synth, bs.highpass_3500, true);
  s = apply_fir(s, bs.notch_3500_4500, true);
  const double g = std::pow(10.0, -atten_db / 20.0);
  for (double& v : s.samples) v *= g;
  return s;
}

}  // namespace bandex
