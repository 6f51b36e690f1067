#ifndef BANDEX_CONFIG_HPP
#define BANDEX_CONFIG_HPP

namespace bandex {

// Frame-analysis knobs.  Defaults describe the 16 kHz wideband rate;
// telephone-band (8 kHz) analyses run at frame_len/2 and hop/2 so both
// rates cover the same stretch of time.
struct AnalysisConfig {
  int frame_len = 256;
  int hop = 128;            // 50% overlap; the low-band overlap-add relies on it
  int lpc_order_wide = 16;
  int lpc_order_tel = 10;
  double preemph_alpha = 0.7;
  // R(0) inflation factor; alpha = 1.0001 pins the model floor 40 dB
  // below the frame energy (10*log10(1/(alpha-1))).
  double noise_floor_alpha = 1.0001;
  // Gaussian lag window exp(-(beta*m)^2); 2*pi*62.5/16000 widens every
  // resonance enough that a 125 Hz envelope grid cannot alias it.
  double lag_beta = 0.024543692606170259;
  int fft_size = 128;       // envelope DFT length; grid = fft_size/2 points
  int pitch_min = 40;       // lag range in 16 kHz samples (50..400 Hz)
  int pitch_max = 320;
  double anti_doubling_theta = 0.85;
  double silence_rms = 1e-4;
  double highband_atten_db = 6.0;

  int tel_frame_len() const { return frame_len / 2; }
  int tel_hop() const { return hop / 2; }
  int envelope_points() const { return fft_size / 2; }      // wideband grid
  int tel_envelope_points() const { return fft_size / 4; }  // 0..4 kHz half

  // Throws DataError if the fields are inconsistent.
  void validate() const;
};

}  // namespace bandex

#endif
