#include "bandex/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandex/errors.hpp"
#include "bandex/fir.hpp"
#include "bandex/highband.hpp"
#include "bandex/lpc.hpp"
#include "bandex/resample.hpp"
#include "bandex/wav.hpp"

namespace bandex {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDbPerLog = 10.0 / 2.302585092994045684;  // dB per log-power unit
constexpr int kSeamStart = 24;   // first grid point fed by the high-band model
constexpr int kHighPoints = 40;  // predicted segment length (3000..7875 Hz)

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int to_int(const std::string& v, const std::string& key) {
  try {
    std::size_t idx = 0;
    long x = std::stol(v, &idx);
    if (idx != v.size()) throw std::invalid_argument(v);
    return int(x);
  } catch (const std::exception&) {
    throw DataError("config: bad integer for " + key + ": '" + v + "'");
  }
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t idx = 0;
    double x = std::stod(v, &idx);
    if (idx != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw DataError("config: bad number for " + key + ": '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t idx = 0;
    unsigned long long x = std::stoull(v, &idx);
    if (idx != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw DataError("config: bad integer for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw DataError("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<int> to_int_list(const std::string& v, const std::string& key) {
  std::vector<int> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) out.push_back(to_int(trim(item), key));
  if (out.empty()) throw DataError("config: empty list for " + key);
  return out;
}

double frame_rms(std::span<const double> x) {
  double acc = 0.0;
  for (double s : x) acc += s * s;
  return x.empty() ? 0.0 : std::sqrt(acc / double(x.size()));
}

bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

// RMS log-spectral distortion in dB over the predicted 40-point
// segment, restricted to grid frequencies in [3500, 8000] Hz.
double high_segment_sd(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  int cnt = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double f = 125.0 * double(kSeamStart + int(j));
    if (f < 3500.0 || f > 8000.0) continue;
    const double d = kDbPerLog * (a[j] - b[j]);
    acc += d * d;
    ++cnt;
  }
  return cnt > 0 ? std::sqrt(acc / cnt) : 0.0;
}

double low_pair_err_db(double p1, double p2, double t1, double t2) {
  const double d1 = 2.0 * kDbPerLog * (p1 - t1);
  const double d2 = 2.0 * kDbPerLog * (p2 - t2);
  return std::sqrt(0.5 * (d1 * d1 + d2 * d2));
}

std::vector<double> predict_high_raw(const ModelBundle& b,
                                     const FeatureVector& f) {
  if (b.predictor_high == "regression")
    return b.reg_high.predict(apply_mask(f, PredictorKind::regression));
  if (b.predictor_high == "codebook") {
    if (b.cb_high.input_cb.centroids.empty())
      throw DataError("model has no trained codebook");
    return b.cb_high.predict(
        b.std_codebook.apply(apply_mask(f, PredictorKind::codebook)));
  }
  if (b.predictor_high == "mlp") {
    if (b.mlp_high.layers.empty())
      throw DataError("model has no trained high-band network");
    return b.mlp_high.forward(b.std_mlp.apply(apply_mask(f, PredictorKind::mlp)));
  }
  throw DataError("unknown high-band predictor: " + b.predictor_high);
}

std::vector<double> predict_low_raw(const ModelBundle& b,
                                    const FeatureVector& f) {
  if (b.predictor_low == "regression")
    return b.reg_low.predict(apply_mask(f, PredictorKind::regression));
  if (b.predictor_low == "mlp") {
    if (b.mlp_low.layers.empty())
      throw DataError("model has no trained low-band network");
    return b.mlp_low.forward(b.std_mlp.apply(apply_mask(f, PredictorKind::mlp)));
  }
  throw DataError("unknown low-band predictor: " + b.predictor_low);
}

struct CorpusFilters {
  FirFilter irs_color;  // send characteristic, applied at 8 kHz
  FirFilter irs_inv;
  FirFilter tel_guard;  // 3500 Hz low-pass at 8 kHz, see below
  bool use_inverse = false;
};

// The inverse design only constrains 200-3500 Hz; outside that band its
// gain is whatever least squares liked (tens of dB above 3500, where
// the send characteristic dies).  Every place that applies the inverse
// therefore follows it with a telephone-band low-pass so the boosted
// out-of-band junk never reaches the analysis.
FirFilter make_tel_guard() { return design_lowpass(127, 3500.0, 8000.0); }

CorpusFilters make_corpus_filters(const PipelineConfig& cfg, bool use_inverse) {
  if (cfg.irs_table.empty())
    throw DataError("an irs_table path is required to derive telephone audio");
  const auto resp = load_magnitude_table(cfg.irs_table, 512);
  CorpusFilters f;
  f.irs_color = design_magnitude_fit(resp, 63);
  if (use_inverse) {
    f.irs_inv = design_inverse_irs(resp, cfg.irs_half_order,
                                   2.0 * kPi * 200.0 / 8000.0,
                                   2.0 * kPi * 3500.0 / 8000.0);
    f.tel_guard = make_tel_guard();
    f.use_inverse = true;
  }
  return f;
}

SignalBuffer derive_telephone(const SignalBuffer& wide16,
                              const CorpusFilters& f) {
  SignalBuffer tel8 = decimate_2x(wide16);
  tel8 = apply_fir(tel8, f.irs_color, true);
  if (f.use_inverse) {
    tel8 = apply_fir(tel8, f.irs_inv, true);
    tel8 = apply_fir(tel8, f.tel_guard, true);
  }
  return tel8;
}

double regression_dataset_mse(const RegressionModel& m, const Matrix& x,
                              const Matrix& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = m.predict(x[i]);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double d = p[j] - y[i][j];
      acc += d * d;
    }
  }
  return x.empty() ? 0.0 : acc / double(x.size());
}

// Trains a network with up to three seeds; keeps the first (or best)
// attempt and rejects the model family if it cannot match the linear
// baseline's training error.
MlpTrainResult train_mlp_with_baseline(const Matrix& x, const Matrix& y,
                                       const std::vector<int>& hidden,
                                       std::uint64_t seed, double baseline_mse,
                                       const char* label) {
  MlpTrainResult best;
  double best_mse = 0.0;
  bool have = false;
  for (int attempt = 0; attempt < 3; ++attempt) {
    MlpTrainOptions opts;
    opts.seed = seed + std::uint64_t(attempt) * 1000003ull;
    MlpTrainResult res = mlp_train(x, y, hidden, opts);
    const double mse = mlp_dataset_mse(res.model, x, y);
    if (!have || mse < best_mse) {
      best = res;
      best_mse = mse;
      have = true;
    }
    if (mse <= baseline_mse) break;
  }
  if (!have || best_mse > baseline_mse)
    throw TrainingError(std::string(label) +
                        " network never reached the linear baseline (mse " +
                        std::to_string(best_mse) + " vs " +
                        std::to_string(baseline_mse) + ")");
  best.train_mse = best_mse;
  return best;
}

}  // namespace

void PipelineConfig::validate() const {
  analysis.validate();
  if (predictor_high != "regression" && predictor_high != "codebook" &&
      predictor_high != "mlp")
    throw DataError("predictor_high must be regression, codebook or mlp");
  if (predictor_low != "regression" && predictor_low != "mlp")
    throw DataError("predictor_low must be regression or mlp");
  if (codebook_size < 4 || codebook_size > 2048 ||
      (codebook_size & (codebook_size - 1)) != 0)
    throw DataError("codebook_size must be a power of two in [4, 2048]");
  auto check_layers = [](const std::vector<int>& h, const char* what) {
    if (h.empty() || h.size() > 8)
      throw DataError(std::string(what) + ": 1..8 hidden layers required");
    for (int n : h)
      if (n < 1 || n > 1024)
        throw DataError(std::string(what) + ": layer sizes must be 1..1024");
  };
  check_layers(mlp_hidden_high, "mlp_hidden_high");
  check_layers(mlp_hidden_low, "mlp_hidden_low");
  if (residual_vq_bits != 0 && (residual_vq_bits < 4 || residual_vq_bits > 12))
    throw DataError("residual_vq_bits must be 0 or 4..12");
  if (irs_half_order < 4 || irs_half_order > 256)
    throw DataError("irs_half_order must be 4..256");
  if (excitation_mode != "extend" && excitation_mode != "fold")
    throw DataError("excitation_mode must be extend or fold");
}

void apply_config_line(PipelineConfig& cfg, const std::string& key,
                       const std::string& value) {
  AnalysisConfig& an = cfg.analysis;
  if (key == "frame_len") an.frame_len = to_int(value, key);
  else if (key == "hop") an.hop = to_int(value, key);
  else if (key == "lpc_order_wide") an.lpc_order_wide = to_int(value, key);
  else if (key == "lpc_order_tel") an.lpc_order_tel = to_int(value, key);
  else if (key == "preemph_alpha") an.preemph_alpha = to_double(value, key);
  else if (key == "noise_floor_alpha") an.noise_floor_alpha = to_double(value, key);
  else if (key == "lag_beta") an.lag_beta = to_double(value, key);
  else if (key == "fft_size") an.fft_size = to_int(value, key);
  else if (key == "pitch_min") an.pitch_min = to_int(value, key);
  else if (key == "pitch_max") an.pitch_max = to_int(value, key);
  else if (key == "anti_doubling_theta") an.anti_doubling_theta = to_double(value, key);
  else if (key == "silence_rms") an.silence_rms = to_double(value, key);
  else if (key == "highband_atten_db") an.highband_atten_db = to_double(value, key);
  else if (key == "irs_table") cfg.irs_table = value;
  else if (key == "irs_inverse") cfg.irs_inverse = to_bool(value, key);
  else if (key == "irs_half_order") cfg.irs_half_order = to_int(value, key);
  else if (key == "predictor_high") cfg.predictor_high = value;
  else if (key == "predictor_low") cfg.predictor_low = value;
  else if (key == "codebook_size") cfg.codebook_size = to_int(value, key);
  else if (key == "mlp_hidden_high") cfg.mlp_hidden_high = to_int_list(value, key);
  else if (key == "mlp_hidden_low") cfg.mlp_hidden_low = to_int_list(value, key);
  else if (key == "residual_vq_bits") cfg.residual_vq_bits = to_int(value, key);
  else if (key == "seed") cfg.seed = to_u64(value, key);
  else if (key == "excitation_mode") cfg.excitation_mode = value;
  else if (key == "feature_dump") cfg.feature_dump = value;
  else throw DataError("config: unknown key '" + key + "'");
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  PipelineConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("config: line " + std::to_string(lineno) +
                      " is not key=value: '" + line + "'");
    apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::vector<std::string> list_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw DataError("corpus path is not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".wav")
      out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no .wav files found in " + dir);
  return out;
}

TelephoneAnalysis analyze_telephone(const SignalBuffer& tel8,
                                    const AnalysisConfig& cfg) {
  cfg.validate();
  if (tel8.sample_rate != 8000)
    throw DataError("telephone analysis expects an 8 kHz signal");

  TelephoneAnalysis ta;
  ta.tel8 = tel8;
  ta.tel16 = upsample_2x(tel8);

  const int frame = cfg.frame_len;
  const int hop = cfg.hop;
  const int tframe = cfg.tel_frame_len();
  const int thop = cfg.tel_hop();
  const std::size_t n16 = ta.tel16.samples.size();
  const int n_frames =
      n16 >= std::size_t(frame) ? int((n16 - std::size_t(frame)) / hop) + 1 : 0;

  std::vector<double> p8(ta.tel8.samples.size()), p16(n16);
  double st = 0.0;
  pre_emphasis(ta.tel8.samples, cfg.preemph_alpha, st, p8);
  st = 0.0;
  pre_emphasis(ta.tel16.samples, cfg.preemph_alpha, st, p16);

  const auto w8 = hanning_window(tframe);
  const auto w16 = hanning_window(frame);

  // The lag-window constant is calibrated at the 16 kHz rate; the
  // telephone-band analysis runs at half that rate, so the window is
  // scaled to keep the spectral smoothing bandwidth (in hertz) the
  // same.  Both envelope grids have 125 Hz spacing, and the smoothing
  // is what guarantees every resonance spans at least two grid points.
  AnalysisConfig tel_cfg = cfg;
  tel_cfg.lag_beta = 2.0 * cfg.lag_beta;

  ta.residual16.sample_rate = 16000;
  ta.residual16.samples.assign(n16, 0.0);
  ta.frames.resize(n_frames);

  // First pass: per-frame envelopes and the running whitener.  The
  // whitening filter of frame t covers [t*hop, (t+1)*hop); the last
  // frame's filter runs to the end of the signal.
  std::vector<double> wbuf8(tframe), wbuf16(frame);
  std::vector<double> astate;
  for (int t = 0; t < n_frames; ++t) {
    FrameRecord& fr = ta.frames[t];
    const std::size_t pos16 = std::size_t(t) * hop;
    const std::size_t pos8 = std::size_t(t) * thop;

    for (int i = 0; i < tframe; ++i) wbuf8[i] = p8[pos8 + i] * w8[i];
    const auto lev8 = levinson_durbin(
        condition(autocorrelation(wbuf8, cfg.lpc_order_tel), tel_cfg),
        cfg.lpc_order_tel);
    fr.tel_env = lpc_to_envelope(lev8.model, cfg.tel_envelope_points());

    for (int i = 0; i < frame; ++i) wbuf16[i] = p16[pos16 + i] * w16[i];
    const auto lev16 = levinson_durbin(
        condition(autocorrelation(wbuf16, cfg.lpc_order_wide), cfg),
        cfg.lpc_order_wide);

    const std::size_t seg_end = (t == n_frames - 1) ? n16 : pos16 + hop;
    analysis_filter(
        std::span<const double>(p16).subspan(pos16, seg_end - pos16),
        lev16.model, astate,
        std::span<double>(ta.residual16.samples).subspan(pos16, seg_end - pos16));
  }

  // Second pass: excitation energy, pitch, phase remnants, features.
  FrameContext prev_ctx;
  bool have_prev = false;
  const std::span<const double> raw16(ta.tel16.samples);
  for (int t = 0; t < n_frames; ++t) {
    FrameRecord& fr = ta.frames[t];
    const std::size_t pos16 = std::size_t(t) * hop;

    double ms = 0.0;
    for (int i = 0; i < frame; ++i) {
      const double r = ta.residual16.samples[pos16 + i];
      ms += r * r;
    }
    ms /= double(frame);
    fr.residual_rms = std::sqrt(ms);

    PitchEstimate est =
        pitch_search(raw16, int(pos16), frame, cfg.pitch_min, cfg.pitch_max);
    est = refine_anti_doubling(est, raw16, int(pos16), frame, cfg.pitch_min,
                               cfg.pitch_max, cfg.anti_doubling_theta);
    fr.pitch = est;

    const double w0 = 2.0 * kPi / est.period_frac;
    fr.residual_harm =
        extract_residual_harmonics(raw16.subspan(pos16, frame), w0);

    FrameContext ctx;
    // The cepstral representation covers only the usable telephone band
    // (grid points 2..28, i.e. 250-3500 Hz).  The band-edge roll-off
    // outside that range is channel shape, not speech, and folding it
    // into the DCT basis wastes most of the 10 coefficients on the
    // cliffs.
    ctx.cepstrum_tel =
        dct(std::span<const double>(fr.tel_env.log_power).subspan(2, 27),
            cfg.lpc_order_tel);
    ctx.pitch_gain = est.gain;
    ctx.pitch_period = double(est.period);
    ctx.excitation_energy = ms;
    fr.features = extract_features(ctx, have_prev ? &prev_ctx : nullptr);
    prev_ctx = ctx;
    have_prev = true;

    fr.silent = frame_rms(raw16.subspan(pos16, frame)) < cfg.silence_rms;
  }
  return ta;
}

void add_wideband_targets(TelephoneAnalysis& ta, const SignalBuffer& wide16,
                          const AnalysisConfig& cfg) {
  if (wide16.sample_rate != 16000)
    throw DataError("wideband reference must be 16 kHz");
  const int frame = cfg.frame_len;
  const int hop = cfg.hop;
  const std::size_t n = wide16.samples.size();

  // The derived telephone signal can differ in length by a sample or
  // two (odd-length decimation); only frames covered by both count.
  const int usable = n >= std::size_t(frame)
                         ? int((n - std::size_t(frame)) / hop) + 1
                         : 0;
  if (usable < int(ta.frames.size())) ta.frames.resize(usable);

  std::vector<double> pw(n);
  double st = 0.0;
  pre_emphasis(wide16.samples, cfg.preemph_alpha, st, pw);
  const auto w16 = hanning_window(frame);
  std::vector<double> wbuf(frame);
  const int n_env = cfg.envelope_points();

  for (std::size_t t = 0; t < ta.frames.size(); ++t) {
    FrameRecord& fr = ta.frames[t];
    const std::size_t pos = t * hop;

    for (int i = 0; i < frame; ++i) wbuf[i] = pw[pos + i] * w16[i];
    const auto lev = levinson_durbin(
        condition(autocorrelation(wbuf, cfg.lpc_order_wide), cfg),
        cfg.lpc_order_wide);
    const auto env = lpc_to_envelope(lev.model, n_env);

    // Align the wideband envelope to the telephone one over the seam
    // points so the predicted segment continues the known spectrum.
    double off = 0.0;
    for (int k = kSeamStart; k < kSeamStart + 4; ++k)
      off += fr.tel_env.log_power[k] - env.log_power[k];
    off *= 0.25;

    fr.true_high_seg.resize(kHighPoints);
    for (int j = 0; j < kHighPoints; ++j)
      fr.true_high_seg[j] = env.log_power[kSeamStart + j] + off;
    fr.target_high = dct(fr.true_high_seg, 8);

    const double w0 = 2.0 * kPi / fr.pitch.period_frac;
    const auto hf = harmonic_ls_fit(
        std::span<const double>(wide16.samples).subspan(pos, frame), w0);
    const auto [l1, l2] =
        normalize_amplitudes(hf.a1(), hf.a2(), fr.residual_rms);
    fr.target_low1 = l1;
    fr.target_low2 = l2;

    fr.silent = frame_rms(std::span<const double>(wide16.samples)
                              .subspan(pos, frame)) < cfg.silence_rms;
  }
}

SignalBuffer synthesize_highband_track(
    const TelephoneAnalysis& ta,
    const std::vector<std::vector<double>>& high_cep_track,
    const AnalysisConfig& cfg, const HighbandOptions& opts) {
  const int frame = cfg.frame_len;
  const int hop = cfg.hop;
  const std::size_t n16 = ta.tel16.samples.size();
  SignalBuffer out;
  out.sample_rate = 16000;
  out.samples.assign(n16, 0.0);
  const int n_frames = int(ta.frames.size());
  if (n_frames == 0) return out;
  if (int(high_cep_track.size()) != n_frames)
    throw DataError("envelope track length does not match the analysis");

  const auto sm = smooth_envelope_track(high_cep_track);

  SignalBuffer exc;
  if (opts.excitation_mode == "extend") {
    exc = extend_excitation(ta.residual16, cfg);
  } else if (opts.excitation_mode == "fold") {
    std::vector<double> r8(ta.residual16.samples.size() / 2);
    for (std::size_t i = 0; i < r8.size(); ++i)
      r8[i] = ta.residual16.samples[2 * i];
    exc.sample_rate = 16000;
    exc.samples = spectral_fold(r8);
    exc.samples.resize(n16, 0.0);
  } else {
    throw DataError("unknown excitation mode: " + opts.excitation_mode);
  }

  SignalBuffer synth;
  synth.sample_rate = 16000;
  synth.samples.assign(n16, 0.0);
  std::vector<double> sstate;
  for (int t = 0; t < n_frames; ++t) {
    const auto env = assemble_wideband_envelope(ta.frames[t].tel_env, sm[t]);
    const auto lev =
        envelope_to_lpc(env, cfg.lpc_order_wide, cfg.noise_floor_alpha);
    const std::size_t pos = std::size_t(t) * hop;
    const std::size_t seg_end = (t == n_frames - 1) ? n16 : pos + hop;
    synthesis_filter(
        std::span<const double>(exc.samples).subspan(pos, seg_end - pos),
        lev.model, sstate,
        std::span<double>(synth.samples).subspan(pos, seg_end - pos));
  }
  double dst = 0.0;
  de_emphasis(synth.samples, cfg.preemph_alpha, dst, synth.samples);

  // Per-frame gain calibration: the synthetic signal's telephone band
  // must carry the same energy as the actual telephone signal, which
  // anchors the high band (a fixed envelope away) to an observable
  // level.  Gains are held over one hop like the excitation gains.
  const auto bs = make_bandshape_filters(cfg);
  const auto ref_band = apply_fir(ta.tel16, bs.lowpass_3500, true);
  const auto syn_band = apply_fir(synth, bs.lowpass_3500, true);
  for (int t = 0; t < n_frames; ++t) {
    const std::size_t pos = std::size_t(t) * hop;
    const std::size_t win_end = std::min(n16, pos + std::size_t(frame));
    double e_ref = 0.0, e_syn = 0.0;
    for (std::size_t i = pos; i < win_end; ++i) {
      e_ref += ref_band.samples[i] * ref_band.samples[i];
      e_syn += syn_band.samples[i] * syn_band.samples[i];
    }
    const double g = e_syn > 1e-24 ? std::sqrt(e_ref / e_syn) : 0.0;
    const std::size_t seg_end = (t == n_frames - 1) ? n16 : pos + hop;
    for (std::size_t i = pos; i < seg_end; ++i) synth.samples[i] *= g;
  }

  if (opts.postprocess) return postprocess_highband(synth, bs, opts.atten_db);
  return synth;
}

TrainResult train_corpus(const std::vector<std::string>& wav_paths,
                         const PipelineConfig& cfg) {
  cfg.validate();
  const auto filters = make_corpus_filters(cfg, cfg.irs_inverse);

  std::vector<FrameRecord> frames;
  int silent_dropped = 0;
  for (const auto& path : wav_paths) {
    const auto wide = read_wav(path);
    if (wide.sample_rate != 16000)
      throw DataError("training files must be 16 kHz: " + path);
    auto ta = analyze_telephone(derive_telephone(wide, filters), cfg.analysis);
    add_wideband_targets(ta, wide, cfg.analysis);
    for (auto& fr : ta.frames) {
      if (fr.silent) {
        ++silent_dropped;
        continue;
      }
      frames.push_back(std::move(fr));
    }
  }
  const int n = int(frames.size());
  if (n < 64)
    throw TrainingError("too few usable frames to train on: " +
                        std::to_string(n));

  if (!cfg.feature_dump.empty()) {
    std::ofstream dump(cfg.feature_dump);
    if (!dump) throw DataError("cannot open feature dump: " + cfg.feature_dump);
    dump << std::setprecision(17);
    for (const auto& fr : frames) {
      for (int i = 0; i < FeatureVector::kDim; ++i) {
        if (i) dump << ' ';
        dump << fr.features.v[i];
      }
      for (double c : fr.target_high) dump << ' ' << c;
      dump << ' ' << fr.target_low1 << ' ' << fr.target_low2 << '\n';
    }
  }

  Matrix xr(n), xm(n), xc(n), yh(n), yl(n);
  for (int i = 0; i < n; ++i) {
    xr[i] = apply_mask(frames[i].features, PredictorKind::regression);
    xm[i] = apply_mask(frames[i].features, PredictorKind::mlp);
    xc[i] = apply_mask(frames[i].features, PredictorKind::codebook);
    yh[i] = frames[i].target_high;
    yl[i] = {frames[i].target_low1, frames[i].target_low2};
  }

  ModelBundle b;
  b.analysis = cfg.analysis;
  b.irs_inverse = cfg.irs_inverse;
  b.predictor_high = cfg.predictor_high;
  b.predictor_low = cfg.predictor_low;
  b.std_mlp.fit(xm);
  b.std_codebook.fit(xc);
  for (int i = 0; i < n; ++i) {
    xm[i] = b.std_mlp.apply(xm[i]);
    xc[i] = b.std_codebook.apply(xc[i]);
  }

  b.reg_high = regression_fit(xr, yh);
  b.reg_low = regression_fit(xr, yl);
  b.cb_high = codebook_associate(xc, yh, cfg.codebook_size);

  const double reg_high_mse = regression_dataset_mse(b.reg_high, xr, yh);
  const double reg_low_mse = regression_dataset_mse(b.reg_low, xr, yl);
  const auto mlp_h = train_mlp_with_baseline(xm, yh, cfg.mlp_hidden_high,
                                             cfg.seed, reg_high_mse, "high-band");
  const auto mlp_l = train_mlp_with_baseline(xm, yl, cfg.mlp_hidden_low,
                                             cfg.seed + 77, reg_low_mse,
                                             "low-band");
  b.mlp_high = mlp_h.model;
  b.mlp_low = mlp_l.model;

  if (cfg.residual_vq_bits > 0) {
    Matrix res(n);
    for (int i = 0; i < n; ++i) {
      const auto p = predict_high_raw(b, frames[i].features);
      res[i].resize(p.size());
      for (std::size_t j = 0; j < p.size(); ++j) res[i][j] = yh[i][j] - p[j];
    }
    b.vq_high = residual_vq_train(res, cfg.residual_vq_bits);
  }

  // Training-set summary: spectral distortion of every family against
  // the true high-band segments, plus the truncation floor of the
  // 8-coefficient representation itself.
  std::vector<double> sd_oracle, sd_reg, sd_cb, sd_mlp, el_reg, el_mlp;
  sd_oracle.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& truth = frames[i].true_high_seg;
    sd_oracle.push_back(
        high_segment_sd(idct(frames[i].target_high, kHighPoints), truth));
    sd_reg.push_back(high_segment_sd(idct(b.reg_high.predict(xr[i]), kHighPoints), truth));
    sd_cb.push_back(high_segment_sd(idct(b.cb_high.predict(xc[i]), kHighPoints), truth));
    sd_mlp.push_back(high_segment_sd(idct(b.mlp_high.forward(xm[i]), kHighPoints), truth));
    const auto pr = b.reg_low.predict(xr[i]);
    const auto pm = b.mlp_low.forward(xm[i]);
    el_reg.push_back(low_pair_err_db(pr[0], pr[1], yl[i][0], yl[i][1]));
    el_mlp.push_back(low_pair_err_db(pm[0], pm[1], yl[i][0], yl[i][1]));
  }

  std::ostringstream rep;
  rep << std::fixed << std::setprecision(3);
  rep << "files: " << wav_paths.size() << "\n";
  rep << "frames: " << n << " (silent dropped: " << silent_dropped << ")\n";
  rep << "high-band SD on training data, dB:\n";
  rep << "  truncation floor " << aggregate_distortion(sd_oracle) << "\n";
  rep << "  regression       " << aggregate_distortion(sd_reg) << "\n";
  rep << "  codebook(" << cfg.codebook_size << ")    "
      << aggregate_distortion(sd_cb) << "\n";
  rep << "  mlp              " << aggregate_distortion(sd_mlp)
      << "  (epochs " << mlp_h.epochs_run << ", val mse "
      << mlp_h.val_mse << ")\n";
  rep << "low-band amplitude error on training data, dB:\n";
  rep << "  regression       " << aggregate_distortion(el_reg) << "\n";
  rep << "  mlp              " << aggregate_distortion(el_mlp)
      << "  (epochs " << mlp_l.epochs_run << ", val mse "
      << mlp_l.val_mse << ")\n";
  if (cfg.residual_vq_bits > 0)
    rep << "residual vq: " << cfg.residual_vq_bits << " bits, "
        << (1 << cfg.residual_vq_bits) << " cells\n";
  rep << "selected predictors: high=" << cfg.predictor_high
      << ", low=" << cfg.predictor_low << "\n";

  return TrainResult{std::move(b), rep.str()};
}

std::string EvalReport::text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "files: " << files << "\n";
  os << "frames scored: " << frames << " (silent skipped: " << silent_skipped
     << ")\n";
  os << "high-band spectral distortion: " << sd_high_db << " dB\n";
  if (sd_high_q_db > 0.0)
    os << "high-band SD with residual VQ: " << sd_high_q_db << " dB\n";
  os << "low-band amplitude error: " << err_low_db << " dB\n";
  os << "audio: " << seconds_audio << " s, elapsed: " << seconds_elapsed
     << " s";
  if (seconds_audio > 0.0)
    os << " (" << seconds_elapsed / seconds_audio << "x real time)";
  os << "\n";
  return os.str();
}

void EvalReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open csv output: " + path);
  out << "frame,sd_high_db,sd_high_q_db,err_low_db\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < per_frame_sd_high.size(); ++i) {
    out << i << ',' << per_frame_sd_high[i] << ',';
    if (i < per_frame_sd_high_q.size()) out << per_frame_sd_high_q[i];
    out << ',' << per_frame_err_low[i] << '\n';
  }
}

EvalReport evaluate_corpus(const std::vector<std::string>& wav_paths,
                           const ModelBundle& bundle,
                           const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto filters = make_corpus_filters(cfg, bundle.irs_inverse);
  const bool with_vq = bundle.vq_high.bits > 0;

  EvalReport rep;
  for (const auto& path : wav_paths) {
    const auto wide = read_wav(path);
    if (wide.sample_rate != 16000)
      throw DataError("evaluation files must be 16 kHz: " + path);
    auto ta =
        analyze_telephone(derive_telephone(wide, filters), bundle.analysis);
    add_wideband_targets(ta, wide, bundle.analysis);
    ++rep.files;
    rep.seconds_audio += double(wide.samples.size()) / 16000.0;

    for (const auto& fr : ta.frames) {
      if (fr.silent) {
        ++rep.silent_skipped;
        continue;
      }
      const auto p = predict_high_raw(bundle, fr.features);
      rep.per_frame_sd_high.push_back(
          high_segment_sd(idct(p, kHighPoints), fr.true_high_seg));
      if (with_vq) {
        std::vector<double> r(p.size());
        for (std::size_t j = 0; j < p.size(); ++j)
          r[j] = fr.target_high[j] - p[j];
        const auto& q = bundle.vq_high.decode(bundle.vq_high.encode(r));
        std::vector<double> pq(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) pq[j] = p[j] + q[j];
        rep.per_frame_sd_high_q.push_back(
            high_segment_sd(idct(pq, kHighPoints), fr.true_high_seg));
      }
      const auto pl = predict_low_raw(bundle, fr.features);
      rep.per_frame_err_low.push_back(
          low_pair_err_db(pl[0], pl[1], fr.target_low1, fr.target_low2));
      ++rep.frames;
    }
  }
  rep.sd_high_db = aggregate_distortion(rep.per_frame_sd_high);
  if (with_vq) rep.sd_high_q_db = aggregate_distortion(rep.per_frame_sd_high_q);
  rep.err_low_db = aggregate_distortion(rep.per_frame_err_low);
  rep.seconds_elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

SignalBuffer extend_signal(const SignalBuffer& tel8_in,
                           const ModelBundle& bundle,
                           const PipelineConfig& cfg) {
  if (tel8_in.sample_rate != 8000)
    throw DataError("extension expects an 8 kHz input");

  SignalBuffer tel8 = tel8_in;
  if (bundle.irs_inverse) {
    if (cfg.irs_table.empty())
      throw DataError(
          "model was trained on inverse-filtered input; an irs_table is "
          "required");
    const auto resp = load_magnitude_table(cfg.irs_table, 512);
    const auto inv = design_inverse_irs(resp, cfg.irs_half_order,
                                        2.0 * kPi * 200.0 / 8000.0,
                                        2.0 * kPi * 3500.0 / 8000.0);
    tel8 = apply_fir(tel8, inv, true);
    tel8 = apply_fir(tel8, make_tel_guard(), true);
  }

  const AnalysisConfig& an = bundle.analysis;
  auto ta = analyze_telephone(tel8, an);
  const auto bs = make_bandshape_filters(an);
  SignalBuffer out = apply_fir(ta.tel16, bs.lowpass_3500, true);
  const int n_frames = int(ta.frames.size());
  if (n_frames == 0) return out;

  // Predicted envelope track; a frame whose prediction goes non-finite
  // reuses the previous good one rather than poisoning the synthesis.
  std::vector<std::vector<double>> track(n_frames);
  std::vector<double> last_good(8, 0.0);
  for (int t = 0; t < n_frames; ++t) {
    auto y = predict_high_raw(bundle, ta.frames[t].features);
    if (all_finite(y))
      last_good = y;
    else
      y = last_good;
    track[t] = std::move(y);
  }

  HighbandOptions ho;
  ho.excitation_mode = cfg.excitation_mode;
  ho.postprocess = true;
  ho.atten_db = an.highband_atten_db;
  const auto high = synthesize_highband_track(ta, track, an, ho);

  std::vector<LowbandFrame> lf(n_frames);
  PhaseTracker tracker;
  std::vector<double> last_good_low = {-20.0, -20.0};  // vanishing amplitudes
  for (int t = 0; t < n_frames; ++t) {
    const auto& fr = ta.frames[t];
    const double w0 = 2.0 * kPi / fr.pitch.period_frac;
    const auto [p1, p2] = tracker.resolve(fr.residual_harm, w0, an.hop);
    LowbandFrame f;
    f.w0 = w0;
    f.phi1 = p1;
    f.phi2 = p2;
    if (!fr.silent) {
      auto yl = predict_low_raw(bundle, fr.features);
      if (all_finite(yl))
        last_good_low = yl;
      else
        yl = last_good_low;
      const auto [a1, a2] =
          denormalize_amplitudes(yl[0], yl[1], fr.residual_rms);
      f.a1 = std::min(a1, 2.0);  // keep a runaway prediction bounded
      f.a2 = std::min(a2, 2.0);
    }
    lf[t] = f;
  }
  const auto low = synthesize_lowband(lf, an, bs, out.samples.size());

  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] += high.samples[i] + low.samples[i];
  return out;
}

int algorithmic_lookahead_samples(const AnalysisConfig& cfg) {
  const auto bs = make_bandshape_filters(cfg);
  const int high_path = cfg.frame_len + bs.highpass_3500.group_delay() +
                        bs.notch_3500_4500.group_delay();
  const int low_path = cfg.frame_len + bs.lowpass_200.group_delay();
  return std::max(high_path, low_path);
}

}  // namespace bandex
