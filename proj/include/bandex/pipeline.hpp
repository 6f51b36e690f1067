#ifndef BANDEX_PIPELINE_HPP
#define BANDEX_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bandex/config.hpp"
#include "bandex/features.hpp"
#include "bandex/lowband.hpp"
#include "bandex/model_io.hpp"
#include "bandex/pitch.hpp"
#include "bandex/signal.hpp"
#include "bandex/spectrum.hpp"

namespace bandex {

struct PipelineConfig {
  AnalysisConfig analysis;
  std::string irs_table;             // magnitude table path
  bool irs_inverse = true;
  int irs_half_order = 30;
  std::string predictor_high = "mlp";  // regression | codebook | mlp
  std::string predictor_low = "mlp";   // regression | mlp
  int codebook_size = 256;             // power of two, 4..2048
  std::vector<int> mlp_hidden_high = {30, 30};
  std::vector<int> mlp_hidden_low = {20};
  int residual_vq_bits = 0;            // 0 = off, else 4..12
  std::uint64_t seed = 12345;
  std::string excitation_mode = "extend";  // extend | fold
  std::string feature_dump;            // optional text dump during train

  void validate() const;
};

// Flat key=value text (# comments).  Keys are the AnalysisConfig and
// PipelineConfig field names; mlp layouts are comma-separated sizes.
PipelineConfig load_pipeline_config(const std::string& path);
void apply_config_line(PipelineConfig& cfg, const std::string& key,
                       const std::string& value);

// Sorted *.wav listing of a corpus directory; empty -> DataError.
std::vector<std::string> list_corpus(const std::string& dir);

// One analyzed frame.  Fields past `silent` are only filled once
// wideband targets are attached.
struct FrameRecord {
  FeatureVector features;
  SpectralEnvelope tel_env;            // 32 points from the 8 kHz analysis
  PitchEstimate pitch;
  double residual_rms = 0.0;           // RMS of the 16 kHz residual frame
  ResidualHarmonics residual_harm;     // phase remnants in 50-200 Hz
  bool silent = false;                 // gate on the available signal

  std::vector<double> target_high;     // 8 DCT coefficients (train/eval)
  double target_low1 = 0.0;            // normalized log amplitudes
  double target_low2 = 0.0;
  std::vector<double> true_high_seg;   // 40-point log envelope (eval)
};

// Everything extracted from the telephone-band signal alone.
struct TelephoneAnalysis {
  SignalBuffer tel8;        // possibly inverse-filtered input
  SignalBuffer tel16;       // upsampled telephone signal
  SignalBuffer residual16;  // whitened (pre-emphasized domain) excitation
  std::vector<FrameRecord> frames;
};

TelephoneAnalysis analyze_telephone(const SignalBuffer& tel8,
                                    const AnalysisConfig& cfg);

// Attaches per-frame training/eval targets from the aligned wideband
// original (also refreshes the silence gate from the wideband frames).
void add_wideband_targets(TelephoneAnalysis& ta, const SignalBuffer& wide16,
                          const AnalysisConfig& cfg);

// High-band synthesis driven by an explicit per-frame track of 8 DCT
// coefficients: smoothing, envelope assembly, excitation widening,
// time-varying synthesis, de-emphasis, per-frame telephone-band gain
// calibration against tel16, then (optionally) the band post-process.
// extend_signal feeds predicted tracks; tests can feed oracle ones.
struct HighbandOptions {
  std::string excitation_mode = "extend";  // extend | fold
  bool postprocess = true;
  double atten_db = 6.0;
};

SignalBuffer synthesize_highband_track(
    const TelephoneAnalysis& ta,
    const std::vector<std::vector<double>>& high_cep_track,
    const AnalysisConfig& cfg, const HighbandOptions& opts);

struct TrainResult {
  ModelBundle bundle;
  std::string report;
};

// Reads 16 kHz wideband files, derives the telephone version of each
// (3.5 kHz band limit, decimation, send-characteristic coloring and —
// when enabled — its designed inverse), extracts frame pairs and fits
// every predictor family.  Deterministic for a fixed seed and file set.
TrainResult train_corpus(const std::vector<std::string>& wav_paths,
                         const PipelineConfig& cfg);

struct EvalReport {
  int files = 0;
  int frames = 0;            // scored (non-silent) frames
  int silent_skipped = 0;
  double sd_high_db = 0.0;   // aggregate high-band spectral distortion
  double sd_high_q_db = 0.0; // with residual VQ applied (0 when absent)
  double err_low_db = 0.0;   // aggregate low-band amplitude error
  double seconds_audio = 0.0;
  double seconds_elapsed = 0.0;
  std::vector<double> per_frame_sd_high;
  std::vector<double> per_frame_sd_high_q;
  std::vector<double> per_frame_err_low;

  std::string text() const;
  void write_csv(const std::string& path) const;
};

EvalReport evaluate_corpus(const std::vector<std::string>& wav_paths,
                           const ModelBundle& bundle,
                           const PipelineConfig& cfg);

// 8 kHz telephone speech in, 16 kHz extended speech out: band-limited
// upsampled pass-through plus the reconstructed high band (predicted
// envelope driving the widened excitation) plus the synthesized low band.
SignalBuffer extend_signal(const SignalBuffer& tel8_in,
                           const ModelBundle& bundle,
                           const PipelineConfig& cfg);

// Algorithmic lookahead of the extension in 16 kHz samples: the worst
// branch of (envelope smoothing one frame ahead + the high-band
// shaping delays) and (one overlap-add frame + the low-band isolation
// delay).  Stays within two frames for the default configuration.
int algorithmic_lookahead_samples(const AnalysisConfig& cfg);

}  // namespace bandex

#endif
