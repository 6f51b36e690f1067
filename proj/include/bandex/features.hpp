#ifndef BANDEX_FEATURES_HPP
#define BANDEX_FEATURES_HPP

#include <array>
#include <vector>

namespace bandex {

// Per-frame voice description, fixed 17-value layout:
//   [0..9]   telephone-band cepstrum c_0..c_9
//   [10]     pitch_gain (beta, clamped to [0, 1.2])
//   [11]     pitch_period (integer lag in 16 kHz samples)
//   [12]     d_log_energy (log excitation-energy delta vs previous frame)
//   [13..16] d_cepstrum c_0..c_3 (cepstral delta vs previous frame)
struct FeatureVector {
  std::array<double, 17> v{};

  static constexpr int kDim = 17;
  static constexpr int kPitchGain = 10;
  static constexpr int kPitchPeriod = 11;
  static constexpr int kDLogEnergy = 12;
  static constexpr int kDCepstrum = 13;
};

enum class PredictorKind { regression, codebook, mlp };

// What one frame's analysis hands to feature assembly.
struct FrameContext {
  std::vector<double> cepstrum_tel;  // 10 DCT coefficients
  double pitch_gain = 0.0;
  double pitch_period = 0.0;
  double excitation_energy = 0.0;    // mean-square residual over the frame
};

// Builds the 17-vector; prev == nullptr marks the first frame and
// zeroes the delta entries.
FeatureVector extract_features(const FrameContext& cur, const FrameContext* prev);

// Predictor-specific input projection:
//   regression: all 17 plus a trailing constant 1 (18 values)
//   mlp:        drops pitch_period (16 values)
//   codebook:   drops pitch_period and d_cepstrum, scales pitch_gain
//               by 4 (12 values)
std::vector<double> apply_mask(const FeatureVector& f, PredictorKind kind);

// Masked dimensionality for each predictor kind.
int masked_dim(PredictorKind kind);

}  // namespace bandex

#endif
