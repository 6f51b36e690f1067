#ifndef BANDEX_WAV_HPP
#define BANDEX_WAV_HPP

#include <string>

#include "bandex/signal.hpp"

namespace bandex {

// Reads a 16-bit PCM mono RIFF/WAVE file at 8000 or 16000 Hz.
// Samples are scaled by 1/32768.  Anything else (stereo, other bit
// depths, compressed formats, truncated files) raises DataError.
SignalBuffer read_wav(const std::string& path);

// Writes 16-bit PCM mono.  Values are clamped to [-1, 1 - 2^-15],
// scaled by 32768 and rounded to nearest.  Throws DataError on I/O
// failure or unsupported sample rate.
void write_wav(const std::string& path, const SignalBuffer& sig);

}  // namespace bandex

#endif
