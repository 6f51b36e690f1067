#ifndef BANDEX_LPC_HPP
#define BANDEX_LPC_HPP

#include <span>
#include <vector>

#include "bandex/config.hpp"
#include "bandex/signal.hpp"

namespace bandex {

// Forward predictor x(n) ~ sum_i a_i x(n-i); coeffs[i-1] holds a_i.
struct LpcModel {
  std::vector<double> coeffs;
  int order() const { return int(coeffs.size()); }
};

struct Autocorrelation {
  std::vector<double> r;  // r[m], m = 0..max_lag
  int max_lag() const { return int(r.size()) - 1; }
};

struct LevinsonResult {
  LpcModel model;
  double error_energy = 0.0;          // prediction-error energy E_N
  std::vector<double> reflection;     // k_1..k_N
};

// w(n) = 0.5 - 0.5*cos(2*pi*n/(L-1)), n = 0..L-1 (symmetric, w(0)=w(L-1)=0).
std::vector<double> hanning_window(int len);

// y(n) = x(n) - alpha*x(n-1); state carries the final sample so
// consecutive chunks concatenate seamlessly.  Initial state 0.
void pre_emphasis(std::span<const double> x, double alpha, double& state,
                  std::span<double> y);

// Inverse of pre_emphasis: y(n) = x(n) + alpha*y(n-1).
void de_emphasis(std::span<const double> x, double alpha, double& state,
                 std::span<double> y);

// R(m) = sum_n x(n)*x(n-m) over the frame, m = 0..max_lag.
Autocorrelation autocorrelation(std::span<const double> frame, int max_lag);

// Noise floor (R(0) *= alpha) plus Gaussian lag window exp(-(beta*m)^2).
Autocorrelation condition(const Autocorrelation& ac, const AnalysisConfig& cfg);

// Model floor depth implied by the R(0) inflation: 10*log10(1/(alpha-1)) dB.
double noise_floor_snr_db(double alpha);

// Solves the Toeplitz normal equations to the given order.  Throws
// NumericalError if any reflection coefficient reaches magnitude 1
// (unstable synthesis filter) or if R(0) < 0.  All-zero or impulse-like
// autocorrelations yield the zero predictor.
LevinsonResult levinson_durbin(const Autocorrelation& ac, int order);

// Whitening filter r(n) = x(n) - sum_i a_i x(n-i).  `state` holds the
// previous `order` input samples, most recent last; it is updated so
// chunked calls match one long call.  Pass an empty state for silence
// history (it is zero-filled to the order).
void analysis_filter(std::span<const double> x, const LpcModel& lpc,
                     std::vector<double>& state, std::span<double> residual);

// Inverse filter x(n) = r(n) + sum_i a_i x(n-i); state holds previous
// outputs.  Throws NumericalError if the output stops being finite.
void synthesis_filter(std::span<const double> residual, const LpcModel& lpc,
                      std::vector<double>& state, std::span<double> x);

}  // namespace bandex

#endif
