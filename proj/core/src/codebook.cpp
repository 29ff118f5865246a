#include "elf/codebook/codebook.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "elf/codebook/kmeans.hpp"
#include "elf/error.hpp"
#include "elf/io/crc32.hpp"

namespace elf::codebook {

SpeakerCodebook build_codebook(const MuFrameSet& frames, const BuildOptions& opts) {
  ELF_CHECK(frames.frames.rank() == 2 && frames.frames.dim(0) >= 1, ErrorKind::kInput,
            "build_codebook: need at least one mu-frame");
  ELF_CHECK(opts.k >= 1, ErrorKind::kValidation, "build_codebook: K must be >= 1");
  const int64_t n = frames.frames.dim(0);

  SpeakerCodebook cb;
  cb.speaker_id = frames.speaker_id;
  cb.provenance.n_source_frames = static_cast<uint64_t>(n);
  cb.provenance.n_source_clips = static_cast<uint64_t>(frames.clips.size());
  cb.provenance.seed = opts.seed;

  if (n < opts.k) {
    // Too little audio to cluster; condition on the raw mu values.
    cb.vectors = frames.frames;
    cb.clustered = false;
    return cb;
  }

  nn::Rng rng(opts.seed);
  double best_sse = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    const nn::Tensor init = kmeanspp_init(frames.frames, opts.k, rng);
    LloydResult res = lloyd(frames.frames, init, opts.max_iters, opts.tol);
    if (res.sse < best_sse) {
      best_sse = res.sse;
      cb.vectors = std::move(res.centroids);
    }
  }
  cb.clustered = true;
  return cb;
}

namespace {

constexpr uint32_t kVersion = 1;

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& s, uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint32_t get_u32(const std::string& s, size_t& pos, const std::string& path) {
  ELF_CHECK(pos + 4 <= s.size(), ErrorKind::kFormat, "truncated codebook file: " + path);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(s[pos + static_cast<size_t>(i)]))
         << (8 * i);
  pos += 4;
  return v;
}

uint64_t get_u64(const std::string& s, size_t& pos, const std::string& path) {
  ELF_CHECK(pos + 8 <= s.size(), ErrorKind::kFormat, "truncated codebook file: " + path);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(s[pos + static_cast<size_t>(i)]))
         << (8 * i);
  pos += 8;
  return v;
}

}  // namespace

void save_codebook(const std::string& path, const SpeakerCodebook& cb) {
  ELF_CHECK(cb.vectors.rank() == 2, ErrorKind::kDimension, "codebook vectors must be [K,H]");
  std::string buf;
  buf.append("ELFC");
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<uint32_t>(cb.speaker_id.size()));
  buf.append(cb.speaker_id);
  put_u32(buf, static_cast<uint32_t>(cb.vectors.dim(0)));
  put_u32(buf, static_cast<uint32_t>(cb.vectors.dim(1)));
  buf.push_back(cb.clustered ? char(1) : char(0));
  put_u64(buf, cb.provenance.seed);
  put_u64(buf, cb.provenance.n_source_frames);
  put_u64(buf, cb.provenance.n_source_clips);
  if constexpr (std::endian::native == std::endian::little) {
    buf.append(reinterpret_cast<const char*>(cb.vectors.data()),
               static_cast<size_t>(cb.vectors.numel()) * 4);
  } else {
    for (int64_t i = 0; i < cb.vectors.numel(); ++i) {
      uint32_t u;
      std::memcpy(&u, cb.vectors.data() + i, 4);
      put_u32(buf, u);
    }
  }
  put_u32(buf, io::crc32(buf.data(), buf.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot write codebook: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  ELF_CHECK(f.good(), ErrorKind::kIo, "short write to codebook: " + path);
}

SpeakerCodebook load_codebook(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot open codebook: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  ELF_CHECK(buf.size() > 8 && buf.compare(0, 4, "ELFC") == 0, ErrorKind::kFormat,
            "not a codebook file: " + path);
  const size_t tail = buf.size() - 4;
  size_t crc_pos = tail;
  const uint32_t got = get_u32(buf, crc_pos, path);
  ELF_CHECK(io::crc32(buf.data(), tail) == got, ErrorKind::kFormat,
            "codebook CRC mismatch (corrupt file): " + path);

  size_t pos = 4;
  const uint32_t version = get_u32(buf, pos, path);
  ELF_CHECK(version == kVersion, ErrorKind::kFormat,
            "unsupported codebook version " + std::to_string(version) + ": " + path);
  SpeakerCodebook cb;
  const uint32_t name_len = get_u32(buf, pos, path);
  ELF_CHECK(pos + name_len <= buf.size(), ErrorKind::kFormat, "truncated codebook: " + path);
  cb.speaker_id = buf.substr(pos, name_len);
  pos += name_len;
  const uint32_t k = get_u32(buf, pos, path);
  const uint32_t h = get_u32(buf, pos, path);
  ELF_CHECK(pos + 1 <= buf.size(), ErrorKind::kFormat, "truncated codebook: " + path);
  cb.clustered = buf[pos++] != 0;
  cb.provenance.seed = get_u64(buf, pos, path);
  cb.provenance.n_source_frames = get_u64(buf, pos, path);
  cb.provenance.n_source_clips = get_u64(buf, pos, path);

  cb.vectors = nn::Tensor({static_cast<int64_t>(k), static_cast<int64_t>(h)});
  const size_t payload = static_cast<size_t>(cb.vectors.numel()) * 4;
  ELF_CHECK(pos + payload + 4 == buf.size(), ErrorKind::kFormat,
            "codebook payload size mismatch: " + path);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(cb.vectors.data(), buf.data() + pos, payload);
  } else {
    for (int64_t i = 0; i < cb.vectors.numel(); ++i) {
      const uint32_t u = get_u32(buf, pos, path);
      std::memcpy(cb.vectors.data() + i, &u, 4);
    }
  }
  return cb;
}

}  // namespace elf::codebook
