#include "elf/io/latents.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "elf/error.hpp"
#include "elf/io/crc32.hpp"

namespace elf::io {

namespace {

constexpr uint32_t kVersion = 1;

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint32_t get_u32(const std::string& s, size_t& pos, const std::string& path) {
  ELF_CHECK(pos + 4 <= s.size(), ErrorKind::kFormat, "truncated latent dump: " + path);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(s[pos + static_cast<size_t>(i)]))
         << (8 * i);
  pos += 4;
  return v;
}

void put_payload(std::string& s, const nn::Tensor& t) {
  if constexpr (std::endian::native == std::endian::little) {
    s.append(reinterpret_cast<const char*>(t.data()), static_cast<size_t>(t.numel()) * 4);
  } else {
    for (int64_t i = 0; i < t.numel(); ++i) {
      uint32_t u;
      std::memcpy(&u, t.data() + i, 4);
      put_u32(s, u);
    }
  }
}

void get_payload(const std::string& s, size_t& pos, nn::Tensor& t, const std::string& path) {
  const size_t bytes = static_cast<size_t>(t.numel()) * 4;
  ELF_CHECK(pos + bytes <= s.size(), ErrorKind::kFormat, "truncated latent dump: " + path);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(t.data(), s.data() + pos, bytes);
    pos += bytes;
  } else {
    for (int64_t i = 0; i < t.numel(); ++i) {
      const uint32_t u = get_u32(s, pos, path);
      std::memcpy(t.data() + i, &u, 4);
    }
  }
}

}  // namespace

void save_latents(const std::string& path, const LatentDump& dump) {
  ELF_CHECK(dump.mu.rank() == 2 && dump.mu.shape() == dump.sigma.shape(), ErrorKind::kDimension,
            "latent dump: mu/sigma must be matching [N,H] matrices");
  std::string buf;
  buf.append("ELFL");
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<uint32_t>(dump.speaker_id.size()));
  buf.append(dump.speaker_id);
  put_u32(buf, static_cast<uint32_t>(dump.mu.dim(0)));
  put_u32(buf, static_cast<uint32_t>(dump.mu.dim(1)));
  put_payload(buf, dump.mu);
  put_payload(buf, dump.sigma);
  put_u32(buf, crc32(buf.data(), buf.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot write latent dump: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  ELF_CHECK(f.good(), ErrorKind::kIo, "short write to latent dump: " + path);
}

LatentDump load_latents(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot open latent dump: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  ELF_CHECK(buf.size() > 8 && buf.compare(0, 4, "ELFL") == 0, ErrorKind::kFormat,
            "not a latent dump: " + path);
  size_t tail = buf.size() - 4;
  const uint32_t expect = crc32(buf.data(), tail);
  uint32_t got = 0;
  for (int i = 0; i < 4; ++i)
    got |= static_cast<uint32_t>(static_cast<unsigned char>(buf[tail + static_cast<size_t>(i)]))
           << (8 * i);
  ELF_CHECK(expect == got, ErrorKind::kFormat, "latent dump CRC mismatch: " + path);

  size_t pos = 4;
  const uint32_t version = get_u32(buf, pos, path);
  ELF_CHECK(version == kVersion, ErrorKind::kFormat, "unsupported latent dump version: " + path);
  const uint32_t name_len = get_u32(buf, pos, path);
  ELF_CHECK(pos + name_len <= buf.size(), ErrorKind::kFormat, "truncated latent dump: " + path);
  LatentDump dump;
  dump.speaker_id = buf.substr(pos, name_len);
  pos += name_len;
  const uint32_t n = get_u32(buf, pos, path);
  const uint32_t h = get_u32(buf, pos, path);
  dump.mu = nn::Tensor({static_cast<int64_t>(n), static_cast<int64_t>(h)});
  dump.sigma = nn::Tensor({static_cast<int64_t>(n), static_cast<int64_t>(h)});
  get_payload(buf, pos, dump.mu, path);
  get_payload(buf, pos, dump.sigma, path);
  return dump;
}

}  // namespace elf::io
