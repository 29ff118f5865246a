#include "elf/audio/wav.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "elf/error.hpp"

namespace elf::audio {

namespace {

uint32_t rd_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void wr_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot open audio file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  ELF_CHECK(bytes.size() >= 44 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
                std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
            ErrorKind::kFormat, "not a RIFF/WAVE file: " + path);

  WavData out;
  uint16_t format = 0, bits = 0;
  size_t pos = 12;
  bool got_fmt = false, got_data = false;
  while (pos + 8 <= bytes.size()) {
    const uint32_t chunk_size = rd_u32(bytes.data() + pos + 4);
    const unsigned char* body = bytes.data() + pos + 8;
    const size_t body_len = std::min<size_t>(chunk_size, bytes.size() - pos - 8);
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0 && body_len >= 16) {
      format = rd_u16(body);
      out.channels = rd_u16(body + 2);
      out.sample_rate = static_cast<int>(rd_u32(body + 4));
      bits = rd_u16(body + 14);
      got_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      ELF_CHECK(got_fmt, ErrorKind::kFormat, "wav data chunk before fmt: " + path);
      if (format == 1 && bits == 16) {
        const size_t n = body_len / 2;
        out.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          const int16_t v = static_cast<int16_t>(rd_u16(body + 2 * i));
          out.samples[i] = static_cast<float>(v) / 32768.f;
        }
      } else if ((format == 3 || format == 0xFFFE) && bits == 32) {
        const size_t n = body_len / 4;
        out.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
          uint32_t u = rd_u32(body + 4 * i);
          float v;
          std::memcpy(&v, &u, 4);
          out.samples[i] = v;
        }
      } else {
        raise(ErrorKind::kFormat, "unsupported wav encoding (need 16-bit PCM or 32-bit float): " +
                                      path);
      }
      got_data = true;
    }
    pos += 8 + chunk_size + (chunk_size & 1);
  }
  ELF_CHECK(got_fmt && got_data, ErrorKind::kFormat, "incomplete wav file: " + path);
  ELF_CHECK(out.channels >= 1 && out.sample_rate > 0, ErrorKind::kFormat,
            "invalid wav header: " + path);
  return out;
}

void write_wav_16bit(const std::string& path, const std::vector<float>& samples,
                     int sample_rate) {
  std::string body;
  body.reserve(44 + samples.size() * 2);
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  body.append("RIFF");
  wr_u32(body, 36 + data_bytes);
  body.append("WAVE");
  body.append("fmt ");
  wr_u32(body, 16);
  wr_u16(body, 1);  // PCM
  wr_u16(body, 1);  // mono
  wr_u32(body, static_cast<uint32_t>(sample_rate));
  wr_u32(body, static_cast<uint32_t>(sample_rate * 2));
  wr_u16(body, 2);
  wr_u16(body, 16);
  body.append("data");
  wr_u32(body, data_bytes);
  for (float s : samples) {
    const float clamped = std::max(-1.f, std::min(1.f, s));
    const int v = static_cast<int>(std::lrintf(clamped * 32767.f));
    wr_u16(body, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot write wav file: " + path);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  ELF_CHECK(f.good(), ErrorKind::kIo, "short write to wav file: " + path);
}

}  // namespace elf::audio
