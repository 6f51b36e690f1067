#include "bandex/lpc.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bandex/errors.hpp"

namespace bandex {

namespace {
constexpr double kPi = std::numbers::pi;

// Keep the last `ord` samples of (state ++ seq) in state.  In-place
// left shift is safe: reads always sit ahead of writes.
void carry_tail(std::span<const double> seq, std::vector<double>& state,
                int ord) {
  for (int i = 0; i < ord; i++) {
    std::size_t back = std::size_t(ord - i);
    if (back <= seq.size()) {
      state[std::size_t(i)] = seq[seq.size() - back];
    } else {
      std::size_t short_by = back - seq.size();
      state[std::size_t(i)] =
          short_by <= state.size() ? state[state.size() - short_by] : 0.0;
    }
  }
}
}  // namespace

std::vector<double> hanning_window(int len) {
  if (len < 2) throw DataError("window length must be >= 2");
  std::vector<double> w(std::size_t(len), 0.0);
  for (int n = 0; n < len; n++)
    w[std::size_t(n)] = 0.5 - 0.5 * std::cos(2.0 * kPi * double(n) / double(len - 1));
  return w;
}

void pre_emphasis(std::span<const double> x, double alpha, double& state,
                  std::span<double> y) {
  if (y.size() != x.size()) throw DataError("pre_emphasis size mismatch");
  double prev = state;
  for (std::size_t n = 0; n < x.size(); n++) {
    double cur = x[n];
    y[n] = cur - alpha * prev;
    prev = cur;
  }
  state = prev;
}

void de_emphasis(std::span<const double> x, double alpha, double& state,
                 std::span<double> y) {
  if (y.size() != x.size()) throw DataError("de_emphasis size mismatch");
  double prev = state;
  for (std::size_t n = 0; n < x.size(); n++) {
    prev = x[n] + alpha * prev;
    y[n] = prev;
  }
  state = prev;
}

Autocorrelation autocorrelation(std::span<const double> frame, int max_lag) {
  if (max_lag < 0 || std::size_t(max_lag) >= frame.size())
    throw DataError("autocorrelation lag must be < frame length");
  Autocorrelation ac;
  ac.r.resize(std::size_t(max_lag) + 1);
  for (int m = 0; m <= max_lag; m++) {
    double acc = 0.0;
    for (std::size_t n = std::size_t(m); n < frame.size(); n++)
      acc += frame[n] * frame[n - std::size_t(m)];
    ac.r[std::size_t(m)] = acc;
  }
  return ac;
}

Autocorrelation condition(const Autocorrelation& ac, const AnalysisConfig& cfg) {
  Autocorrelation out = ac;
  if (out.r.empty()) throw DataError("empty autocorrelation");
  // Silent frames get an absolute floor so R stays positive definite
  // and later solves return the zero predictor instead of degenerating.
  if (out.r[0] == 0.0)
    out.r[0] = 1e-10;
  else
    out.r[0] *= cfg.noise_floor_alpha;
  for (std::size_t m = 1; m < out.r.size(); m++) {
    double bm = cfg.lag_beta * double(m);
    out.r[m] *= std::exp(-bm * bm);
  }
  return out;
}

double noise_floor_snr_db(double alpha) {
  if (alpha <= 1.0) throw DataError("noise floor alpha must exceed 1");
  return 10.0 * std::log10(1.0 / (alpha - 1.0));
}

LevinsonResult levinson_durbin(const Autocorrelation& ac, int order) {
  if (order < 1) throw DataError("levinson order must be >= 1");
  if (ac.max_lag() < order)
    throw DataError("autocorrelation too short for requested order");
  const std::vector<double>& r = ac.r;
  if (r[0] < 0.0) throw NumericalError("negative zero-lag autocorrelation");

  LevinsonResult res;
  res.model.coeffs.assign(std::size_t(order), 0.0);
  res.reflection.assign(std::size_t(order), 0.0);
  if (r[0] == 0.0) return res;  // silence: zero predictor, zero error

  std::vector<double>& a = res.model.coeffs;
  std::vector<double> prev(std::size_t(order), 0.0);
  double err = r[0];
  for (int i = 1; i <= order; i++) {
    double acc = r[std::size_t(i)];
    for (int j = 1; j < i; j++) acc -= prev[std::size_t(j - 1)] * r[std::size_t(i - j)];
    if (err <= 0.0)
      throw NumericalError("prediction error collapsed in levinson recursion");
    double k = acc / err;
    if (!(std::abs(k) < 1.0)) {
      std::ostringstream msg;
      msg << "reflection coefficient |k_" << i << "| = " << std::abs(k)
          << " >= 1 (ill-conditioned autocorrelation)";
      throw NumericalError(msg.str());
    }
    a[std::size_t(i - 1)] = k;
    for (int j = 1; j < i; j++)
      a[std::size_t(j - 1)] = prev[std::size_t(j - 1)] - k * prev[std::size_t(i - j - 1)];
    err *= 1.0 - k * k;
    res.reflection[std::size_t(i - 1)] = k;
    for (int j = 0; j < i; j++) prev[std::size_t(j)] = a[std::size_t(j)];
  }
  res.error_energy = err;
  return res;
}

void analysis_filter(std::span<const double> x, const LpcModel& lpc,
                     std::vector<double>& state, std::span<double> residual) {
  if (residual.size() != x.size()) throw DataError("analysis_filter size mismatch");
  const int ord = lpc.order();
  state.resize(std::size_t(ord), 0.0);
  for (std::size_t n = 0; n < x.size(); n++) {
    double pred = 0.0;
    for (int i = 1; i <= ord; i++) {
      double past = (std::size_t(i) <= n) ? x[n - std::size_t(i)]
                                          : state[state.size() - (std::size_t(i) - n)];
      pred += lpc.coeffs[std::size_t(i - 1)] * past;
    }
    residual[n] = x[n] - pred;
  }
  carry_tail(x, state, ord);
}

void synthesis_filter(std::span<const double> residual, const LpcModel& lpc,
                      std::vector<double>& state, std::span<double> x) {
  if (x.size() != residual.size()) throw DataError("synthesis_filter size mismatch");
  const int ord = lpc.order();
  state.resize(std::size_t(ord), 0.0);
  for (std::size_t n = 0; n < residual.size(); n++) {
    double acc = residual[n];
    for (int i = 1; i <= ord; i++) {
      double past = (std::size_t(i) <= n) ? x[n - std::size_t(i)]
                                          : state[state.size() - (std::size_t(i) - n)];
      acc += lpc.coeffs[std::size_t(i - 1)] * past;
    }
    if (!std::isfinite(acc))
      throw NumericalError("synthesis filter output diverged");
    x[n] = acc;
  }
  carry_tail(x, state, ord);
}

}  // namespace bandex
