#ifndef BANDEX_HIGHBAND_HPP
#define BANDEX_HIGHBAND_HPP

#include <span>
#include <vector>

#include "bandex/config.hpp"
#include "bandex/fir.hpp"
#include "bandex/signal.hpp"
#include "bandex/spectrum.hpp"

namespace bandex {

// Baseline excitation widening: zero insertion with gain 2
// (out[2n] = 2*r[n], out[2n+1] = 0) mirrors the low spectrum into the
// high band.  Input is an 8 kHz residual, output twice as long.
std::vector<double> spectral_fold(std::span<const double> residual);

// Preferred excitation widening on the 16 kHz residual stream:
// full-wave rectification, per-frame order-8 whitening (conditioned
// LPC), then per-frame gain so the 0-3500 Hz band energy (measured
// through the 3500 Hz low-pass) matches the input's.  Frame adaptation
// follows cfg.frame_len/cfg.hop with filter state carried across hops.
SignalBuffer extend_excitation(const SignalBuffer& residual16,
                               const AnalysisConfig& cfg);

// [1/4, 1/2, 1/4] smoothing along the frame axis of a cepstral track
// (one frame of coefficients per row; one-frame lookahead, edges
// replicated).
std::vector<std::vector<double>> smooth_envelope_track(
    const std::vector<std::vector<double>>& track);

// Wideband 64-point log envelope: points 0..27 from the telephone
// analysis (32-point grid), points 24..63 from idct of the 8 high-band
// coefficients, with a linear cross-fade over the 24..27 overlap.
SpectralEnvelope assemble_wideband_envelope(const SpectralEnvelope& tel_env,
                                            std::span<const double> high_cep);

// High-pass 3500, notch 3500-4500, then the configured attenuation.
SignalBuffer postprocess_highband(const SignalBuffer& synth,
                                  const BandshapeFilters& bs,
                                  double atten_db);

}  // namespace bandex

#endif
