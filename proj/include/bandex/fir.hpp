#ifndef BANDEX_FIR_HPP
#define BANDEX_FIR_HPP

#include <string>
#include <vector>

#include "bandex/config.hpp"
#include "bandex/signal.hpp"

namespace bandex {

// Odd-length symmetric (linear-phase) FIR unless noted otherwise.
struct FirFilter {
  std::vector<double> taps;
  int group_delay() const { return (int(taps.size()) - 1) / 2; }
};

// Magnitude samples on a uniform grid over [0, rate_hz/2], endpoints
// included: f_j = (rate_hz/2) * j / (size-1).
struct FrequencyResponse {
  std::vector<double> magnitude;
  double rate_hz = 8000.0;

  std::size_t size() const { return magnitude.size(); }
  double freq_at(std::size_t j) const {
    return 0.5 * rate_hz * double(j) / double(magnitude.size() - 1);
  }
};

// Direct-form convolution, output length == input length.  With
// delay_compensate the output is advanced by group_delay samples
// (zero-padded at the end), so linear-phase filters stay time-aligned.
SignalBuffer apply_fir(const SignalBuffer& sig, const FirFilter& filt,
                       bool delay_compensate);

// DTFT magnitude of the filter at normalized frequency w (rad/sample).
double fir_response_at(const FirFilter& filt, double w);

// Least-squares fit of a_0 + 2*sum a_k cos(kw) to `target` over the
// uniform grid w_j = pi*j/(G-1) with per-point weights.  Returns the
// symmetric 2*half_order+1 tap filter.  Throws NumericalError if the
// weighted system is rank deficient.
FirFilter design_linear_phase_ls(const std::vector<double>& target,
                                 const std::vector<double>& weight,
                                 int half_order);

// Hamming-windowed sinc low-pass, DC gain normalized to 1.  taps odd.
FirFilter design_lowpass(int taps, double cutoff_hz, double rate_hz);

// Spectral inversion of the matching low-pass (delta - lowpass).
FirFilter design_highpass(int taps, double cutoff_hz, double rate_hz);

// Loads the send-characteristic magnitude table ("freq_hz magnitude"
// per line, '#' comments, ascending frequencies) and resamples it by
// linear interpolation onto a grid_size-point uniform grid [0, rate/2].
// rate is taken from the table span (top frequency = rate/2).
FrequencyResponse load_magnitude_table(const std::string& path, int grid_size);

// Linear-phase FIR approximating the inverse magnitude 1/|G(w)| over
// the band [w1, w2] (rad/sample); grid points outside the band carry
// zero weight.  Defaults follow the 200-3500 Hz telephone band at 8 kHz.
FirFilter design_inverse_irs(const FrequencyResponse& response, int half_order,
                             double w1, double w2);

// Linear-phase FIR approximating |G(w)| itself over the full grid
// (used to impose the send characteristic on clean speech).
FirFilter design_magnitude_fit(const FrequencyResponse& response,
                               int half_order);

// Fixed 16 kHz shaping filters used when assembling the output bands.
struct BandshapeFilters {
  FirFilter highpass_3500;   // keeps the reconstructed high band
  FirFilter notch_3500_4500; // removes the unreliable 3.5-4.5 kHz strip
  FirFilter lowpass_200;     // isolates the reconstructed low band
  FirFilter lowpass_3500;    // telephone-band limiter / anti-imaging
};

BandshapeFilters make_bandshape_filters(const AnalysisConfig& cfg);

}  // namespace bandex

#endif
