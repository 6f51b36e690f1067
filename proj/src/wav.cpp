#include "bandex/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "bandex/errors.hpp"

namespace bandex {

namespace {

uint32_t rd_u32(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

uint16_t rd_u16(const unsigned char* p) {
  return uint16_t(p[0]) | uint16_t(p[1]) << 8;
}

void wr_u32(std::ofstream& os, uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)(v >> 8 & 0xff),
                        (unsigned char)(v >> 16 & 0xff), (unsigned char)(v >> 24 & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ofstream& os, uint16_t v) {
  unsigned char b[2] = {(unsigned char)(v & 0xff), (unsigned char)(v >> 8 & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

SignalBuffer read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open WAV file: " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
  if (raw.size() < 12 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path);

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const unsigned char* hdr = raw.data() + pos;
    uint32_t chunk_len = rd_u32(hdr + 4);
    pos += 8;
    if (pos + chunk_len > raw.size())
      throw DataError("truncated WAV chunk in " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw DataError("short fmt chunk in " + path);
      format = rd_u16(raw.data() + pos);
      channels = rd_u16(raw.data() + pos + 2);
      rate = rd_u32(raw.data() + pos + 4);
      bits = rd_u16(raw.data() + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = raw.data() + pos;
      data_len = chunk_len;
    }
    pos += chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr)
    throw DataError("missing fmt or data chunk in " + path);
  if (format != 1) throw DataError("unsupported WAV format (PCM only): " + path);
  if (channels != 1) throw DataError("unsupported channel count (mono only): " + path);
  if (bits != 16) throw DataError("unsupported bit depth (16-bit only): " + path);
  if (rate != 8000 && rate != 16000)
    throw DataError("unsupported sample rate (8000/16000 only): " + path);

  SignalBuffer sig;
  sig.sample_rate = int(rate);
  std::size_t n = data_len / 2;
  sig.samples.resize(n);
  for (std::size_t i = 0; i < n; i++) {
    int16_t v = int16_t(rd_u16(data + 2 * i));
    sig.samples[i] = double(v) / 32768.0;
  }
  return sig;
}

void write_wav(const std::string& path, const SignalBuffer& sig) {
  if (sig.sample_rate != 8000 && sig.sample_rate != 16000)
    throw DataError("unsupported sample rate for WAV write");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot create WAV file: " + path);

  uint32_t data_len = uint32_t(sig.samples.size() * 2);
  os.write("RIFF", 4);
  wr_u32(os, 36 + data_len);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(os, 16);
  wr_u16(os, 1);  // PCM
  wr_u16(os, 1);  // mono
  wr_u32(os, uint32_t(sig.sample_rate));
  wr_u32(os, uint32_t(sig.sample_rate) * 2);  // byte rate
  wr_u16(os, 2);                              // block align
  wr_u16(os, 16);                             // bits
  os.write("data", 4);
  wr_u32(os, data_len);

  const double hi = 1.0 - 1.0 / 32768.0;
  for (double x : sig.samples) {
    double c = std::clamp(x, -1.0, hi);
    long v = std::lround(c * 32768.0);
    v = std::clamp(v, -32768L, 32767L);
    wr_u16(os, uint16_t(int16_t(v)));
  }
  if (!os) throw DataError("short write to WAV file: " + path);
}

}  // namespace bandex
