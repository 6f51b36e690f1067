#ifndef BANDEX_RESAMPLE_HPP
#define BANDEX_RESAMPLE_HPP

#include "bandex/signal.hpp"

namespace bandex {

// 8 kHz -> 16 kHz: zero insertion with gain 2 followed by the 127-tap
// 3500 Hz anti-imaging low-pass, delay compensated.  Output has twice
// the input length.
SignalBuffer upsample_2x(const SignalBuffer& sig);

// 16 kHz -> 8 kHz: 3500 Hz anti-alias low-pass then keep even samples.
SignalBuffer decimate_2x(const SignalBuffer& sig);

}  // namespace bandex

#endif
