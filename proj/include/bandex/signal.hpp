#ifndef BANDEX_SIGNAL_HPP
#define BANDEX_SIGNAL_HPP

#include <vector>

namespace bandex {

// Mono audio held as doubles in [-1, 1] nominal range.
struct SignalBuffer {
  std::vector<double> samples;
  int sample_rate = 16000;

  SignalBuffer() = default;
  SignalBuffer(std::vector<double> s, int rate)
      : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

}  // namespace bandex

#endif
