#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "bandex/errors.hpp"
#include "bandex/fir.hpp"
#include "bandex/resample.hpp"
#include "bandex/wav.hpp"
#include "support/dsp_measure.hpp"

using namespace bandex;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
  b.push_back((v >> 16) & 0xff);
  b.push_back((v >> 24) & 0xff);
}

void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
}

// Minimal RIFF/WAVE writer for crafting inputs, independent of the
// library's writer.
std::string craft_wav(const std::string& name,
                      const std::vector<std::int16_t>& data,
                      std::uint32_t rate, std::uint16_t channels = 1,
                      std::uint16_t bits = 16, std::uint16_t format = 1) {
  std::vector<unsigned char> b;
  const std::uint32_t data_bytes = std::uint32_t(data.size() * 2);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put_u32(b, 36 + data_bytes);
  b.insert(b.end(), {'W', 'A', 'V', 'E'});
  b.insert(b.end(), {'f', 'm', 't', ' '});
  put_u32(b, 16);
  put_u16(b, format);
  put_u16(b, channels);
  put_u32(b, rate);
  put_u32(b, rate * channels * bits / 8);
  put_u16(b, std::uint16_t(channels * bits / 8));
  put_u16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put_u32(b, data_bytes);
  for (std::int16_t s : data) put_u16(b, std::uint16_t(s));
  const auto path = temp_path(name);
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
  return path;
}

}  // namespace

TEST_CASE("reading scales int16 by 1/32768") {
  const auto path = craft_wav("bx_read_scale.wav", {0, 16384, -32768}, 8000);
  const auto sig = read_wav(path);
  CHECK(sig.sample_rate == 8000);
  REQUIRE(sig.samples.size() == 3);
  CHECK(sig.samples[0] == doctest::Approx(0.0));
  CHECK(sig.samples[1] == doctest::Approx(0.5));
  CHECK(sig.samples[2] == doctest::Approx(-1.0));
}

TEST_CASE("empty data chunk reads as zero samples") {
  const auto path = craft_wav("bx_read_empty.wav", {}, 16000);
  const auto sig = read_wav(path);
  CHECK(sig.sample_rate == 16000);
  CHECK(sig.samples.empty());
}

TEST_CASE("write then read round-trips int16-representable data") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> dist(-32768, 32767);
  for (int rate : {8000, 16000}) {
    SignalBuffer sig;
    sig.sample_rate = rate;
    for (int i = 0; i < 1000; ++i)
      sig.samples.push_back(double(dist(rng)) / 32768.0);
    const auto path = temp_path("bx_roundtrip.wav");
    write_wav(path, sig);
    const auto back = read_wav(path);
    CHECK(back.sample_rate == rate);
    REQUIRE(back.samples.size() == sig.samples.size());
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
      CHECK(back.samples[i] == sig.samples[i]);
  }
}

TEST_CASE("writer quantization: scaling and clamping") {
  SignalBuffer sig;
  sig.sample_rate = 8000;
  sig.samples = {0.5, 2.0, -2.0};
  const auto path = temp_path("bx_clamp.wav");
  write_wav(path, sig);

  std::ifstream f(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 44 + 6);
  auto sample_at = [&](int i) {
    return std::int16_t(bytes[44 + 2 * i] | (bytes[45 + 2 * i] << 8));
  };
  CHECK(sample_at(0) == 16384);
  CHECK(sample_at(1) == 32767);   // clamp to 1 - 2^-15
  CHECK(sample_at(2) == -32768);  // clamp to -1
}

TEST_CASE("malformed and unsupported files are rejected") {
  CHECK_THROWS_AS(read_wav(temp_path("bx_missing_file.wav")), DataError);

  // stereo
  auto p = craft_wav("bx_stereo.wav", {0, 0, 0, 0}, 8000, 2);
  CHECK_THROWS_AS(read_wav(p), DataError);
  // non-PCM format tag
  p = craft_wav("bx_float.wav", {0, 0}, 8000, 1, 16, 3);
  CHECK_THROWS_AS(read_wav(p), DataError);
  // 8-bit depth
  p = craft_wav("bx_8bit.wav", {0, 0}, 8000, 1, 8);
  CHECK_THROWS_AS(read_wav(p), DataError);
  // unsupported rate
  p = craft_wav("bx_44k.wav", {0, 0}, 44100);
  CHECK_THROWS_AS(read_wav(p), DataError);
  // bad magic
  {
    const auto path = temp_path("bx_bad_magic.wav");
    std::ofstream f(path, std::ios::binary);
    f << "JUNKJUNKJUNKJUNKJUNKJUNK";
    f.close();
    CHECK_THROWS_AS(read_wav(path), DataError);
  }
  // data chunk promises more bytes than the file has
  {
    auto path = craft_wav("bx_truncated.wav", {1, 2, 3, 4}, 8000);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 4);
    CHECK_THROWS_AS(read_wav(path), DataError);
  }

  SignalBuffer bad;
  bad.sample_rate = 11025;
  bad.samples = {0.0};
  CHECK_THROWS_AS(write_wav(temp_path("bx_bad_rate.wav"), bad), DataError);
}

TEST_CASE("upsample doubles length and preserves a 1 kHz tone") {
  SignalBuffer sig;
  sig.sample_rate = 8000;
  const int n = 8000;
  for (int i = 0; i < n; ++i)
    sig.samples.push_back(0.4 * std::sin(2.0 * M_PI * 1000.0 * i / 8000.0));
  const auto up = upsample_2x(sig);
  CHECK(up.sample_rate == 16000);
  CHECK(up.samples.size() == 2 * sig.samples.size());

  // skip filter edges when measuring
  std::span<const double> mid(up.samples.data() + 2000, 12000);
  const double amp = testsupport::tone_amplitude(mid, 1000.0, 16000.0);
  CHECK(20.0 * std::log10(amp / 0.4) == doctest::Approx(0.0).epsilon(0.1));

  CHECK_THROWS_AS(upsample_2x(up), DataError);  // wrong input rate
}

TEST_CASE("upsample zero in, zero out") {
  SignalBuffer sig;
  sig.sample_rate = 8000;
  sig.samples.assign(500, 0.0);
  const auto up = upsample_2x(sig);
  for (double v : up.samples) CHECK(v == 0.0);
}

TEST_CASE("upsampled white noise has no images above 4 kHz") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 0.2);
  SignalBuffer sig;
  sig.sample_rate = 8000;
  for (int i = 0; i < 32768; ++i) sig.samples.push_back(gauss(rng));
  const auto up = upsample_2x(sig);
  const auto psd = testsupport::welch_psd(up.samples, 1024, 16000.0);
  const double low = testsupport::band_power(psd, 0.0, 3500.0);
  const double high = testsupport::band_power(psd, 4000.0, 8000.0);
  CHECK(10.0 * std::log10(high / low) < -40.0);
}

TEST_CASE("upsample preserves in-band energy of band-limited noise") {
  // white noise band-limited to 3.3 kHz at 8 kHz
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 0.2);
  SignalBuffer noise;
  noise.sample_rate = 8000;
  for (int i = 0; i < 32768; ++i) noise.samples.push_back(gauss(rng));
  const auto lp = design_lowpass(255, 3300.0, 8000.0);
  const auto band = apply_fir(noise, lp, true);
  const auto up = upsample_2x(band);

  // same segment length at both rates makes the band sums comparable
  const auto psd8 = testsupport::welch_psd(band.samples, 1024, 8000.0);
  const auto psd16 = testsupport::welch_psd(up.samples, 1024, 16000.0);
  const double e8 = testsupport::band_power(psd8, 50.0, 3400.0);
  const double e16 = testsupport::band_power(psd16, 50.0, 3400.0);
  CHECK(std::fabs(10.0 * std::log10(e16 / e8)) < 0.2);
}

TEST_CASE("decimate keeps telephone content and halves the length") {
  SignalBuffer sig;
  sig.sample_rate = 16000;
  const int n = 16000;
  for (int i = 0; i < n; ++i)
    sig.samples.push_back(0.3 * std::sin(2.0 * M_PI * 1000.0 * i / 16000.0) +
                          0.3 * std::sin(2.0 * M_PI * 5000.0 * i / 16000.0));
  const auto down = decimate_2x(sig);
  CHECK(down.sample_rate == 8000);
  CHECK(down.samples.size() == sig.samples.size() / 2);
  std::span<const double> mid(down.samples.data() + 1000, 6000);
  const double a1k = testsupport::tone_amplitude(mid, 1000.0, 8000.0);
  const double a3k = testsupport::tone_amplitude(mid, 3000.0, 8000.0);
  CHECK(20.0 * std::log10(a1k / 0.3) == doctest::Approx(0.0).epsilon(0.1));
  // the 5 kHz tone would alias to 3 kHz; it must be gone
  CHECK(20.0 * std::log10(a3k / 0.3) < -40.0);
  CHECK_THROWS_AS(decimate_2x(down), DataError);
}
