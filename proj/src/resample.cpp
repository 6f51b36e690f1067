#include "bandex/resample.hpp"

#include "bandex/errors.hpp"
#include "bandex/fir.hpp"

namespace bandex {

SignalBuffer upsample_2x(const SignalBuffer& sig) {
  if (sig.sample_rate != 8000)
    throw DataError("upsample_2x expects an 8 kHz signal");
  SignalBuffer up;
  up.sample_rate = 16000;
  up.samples.assign(sig.samples.size() * 2, 0.0);
  for (std::size_t i = 0; i < sig.samples.size(); i++)
    up.samples[2 * i] = 2.0 * sig.samples[i];
  static const FirFilter lp = design_lowpass(127, 3500.0, 16000.0);
  return apply_fir(up, lp, true);
}

SignalBuffer decimate_2x(const SignalBuffer& sig) {
  if (sig.sample_rate != 16000)
    throw DataError("decimate_2x expects a 16 kHz signal");
  static const FirFilter lp = design_lowpass(127, 3500.0, 16000.0);
  SignalBuffer filtered = apply_fir(sig, lp, true);
  SignalBuffer down;
  down.sample_rate = 8000;
  down.samples.resize(sig.samples.size() / 2);
  for (std::size_t i = 0; i < down.samples.size(); i++)
    down.samples[i] = filtered.samples[2 * i];
  return down;
}

}  // namespace bandex
