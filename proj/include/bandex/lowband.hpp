#ifndef BANDEX_LOWBAND_HPP
#define BANDEX_LOWBAND_HPP

#include <span>
#include <utility>
#include <vector>

#include "bandex/config.hpp"
#include "bandex/fir.hpp"
#include "bandex/signal.hpp"

namespace bandex {

// Two-harmonic model fitted to a frame: the windowed signal is matched
// by win(n)*(g0 + g1 cos(w0 n) + h1 sin(w0 n) + g2 cos(2 w0 n) +
// h2 sin(2 w0 n)) in the least-squares sense, win being the periodic
// Hanning (1 - cos(2 pi n/N))/2.
struct HarmonicFit {
  double w0 = 0.0;
  double g0 = 0.0, g1 = 0.0, h1 = 0.0, g2 = 0.0, h2 = 0.0;
  double a1() const;    // sqrt(g1^2 + h1^2)
  double a2() const;
  double phi1() const;  // so that g1 cos + h1 sin = a1 cos(w0 n + phi1)
  double phi2() const;
};

// frame is the raw (unwindowed) signal chunk; w0 in (0, pi/2) rad.
HarmonicFit harmonic_ls_fit(std::span<const double> frame, double w0);

// Log amplitudes relative to the excitation level:
// a_log = ln(a + eps) - ln(residual_rms + eps), eps = 1e-10.
std::pair<double, double> normalize_amplitudes(double a1, double a2,
                                               double residual_rms);
std::pair<double, double> denormalize_amplitudes(double a1_log, double a2_log,
                                                 double residual_rms);

// Phase measurement from the attenuated harmonic remnants of the
// telephone-band frame; a fitted amplitude under 1e-7 marks the phase
// unreliable.
struct ResidualHarmonics {
  double phi1 = 0.0, phi2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
  bool reliable1 = false, reliable2 = false;
};

ResidualHarmonics extract_residual_harmonics(std::span<const double> tel_frame,
                                             double w0);

// Keeps an oscillator phase per harmonic; measured phases are used
// when reliable and re-seed the oscillator either way, so silent or
// noisy frames continue smoothly from the last good phase.
class PhaseTracker {
 public:
  // returns the {phi1, phi2} to synthesize with and advances by hop
  std::pair<double, double> resolve(const ResidualHarmonics& rh, double w0,
                                    int hop);

 private:
  double th1_ = 0.0, th2_ = 0.0;
};

struct LowbandFrame {
  double w0 = 0.0;
  double a1 = 0.0, a2 = 0.0;
  double phi1 = 0.0, phi2 = 0.0;
};

// Overlap-add of per-frame windowed two-tone pieces at 50% hop followed
// by the low-band isolation filter.  Frame t starts at t*cfg.hop;
// output is padded/truncated to out_len samples at 16 kHz.
SignalBuffer synthesize_lowband(const std::vector<LowbandFrame>& frames,
                                const AnalysisConfig& cfg,
                                const BandshapeFilters& bs,
                                std::size_t out_len);

}  // namespace bandex

#endif
