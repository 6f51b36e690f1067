#ifndef BANDEX_SPECTRUM_HPP
#define BANDEX_SPECTRUM_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "bandex/lpc.hpp"

namespace bandex {

// Natural log of the model power spectrum 1/S_a(k) sampled on a
// uniform grid: point k sits at frequency k * rate / (2*n_points).
// With the 16 kHz defaults (64 points) that is the 125 Hz grid.
struct SpectralEnvelope {
  std::vector<double> log_power;
  std::size_t size() const { return log_power.size(); }
};

// S_a(k) = |sum_{i=0..N} a'_i exp(-2*pi*j*i*k/(2*n_points))|^2 with
// a'_0 = 1, a'_i = -a_i; returns log(1/S_a(k)) for k = 0..n_points-1.
// Zero magnitudes are clamped to 1e-30 (counted, see below).
SpectralEnvelope lpc_to_envelope(const LpcModel& lpc, int n_points);

// Number of grid points clamped by lpc_to_envelope since process start.
std::uint64_t envelope_clamp_count();

// Rebuilds an all-pole model: even-symmetric power spectrum from
// exp(log_power) (Nyquist point replicated from the top grid point),
// inverse DFT to autocorrelations, then levinson_durbin.  Only the
// noise floor is re-applied before the recursion — no lag window, so
// a conditioned model round-trips through its envelope.
LevinsonResult envelope_to_lpc(const SpectralEnvelope& env, int order,
                               double noise_floor_alpha);

// Orthonormal DCT-II, first `keep` coefficients:
//   c_0 = sqrt(1/N) sum x_i,  c_k = sqrt(2/N) sum x_i cos(pi*(2i+1)*k/(2N)).
std::vector<double> dct(std::span<const double> x, int keep);

// Transpose of dct: reconstructs n_points samples from the kept
// coefficients (missing ones treated as zero).
std::vector<double> idct(std::span<const double> c, int n_points);

// RMS log-spectral distortion in dB between two same-size envelopes
// over grid points whose frequency lies in [f1_hz, f2_hz].  Stored
// values are log-power, so a point contributes (10/ln10)*(a_k - b_k)
// squared — i.e. 20*log10 of the amplitude ratio.
double spectral_distortion(const SpectralEnvelope& a, const SpectralEnvelope& b,
                           double f1_hz, double f2_hz, double grid_hz);

// Quadrature mean sqrt(mean(d_k^2)) of per-frame distortions.
double aggregate_distortion(std::span<const double> per_frame);

}  // namespace bandex

#endif
