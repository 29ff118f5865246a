#include "elf/io/checkpoint.hpp"

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

void put_u64(std::string& s, uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_str(std::string& s, const std::string& v) {
  put_u32(s, static_cast<uint32_t>(v.size()));
  s.append(v);
}

void put_f32(std::string& s, const float* data, size_t n) {
  static_assert(sizeof(float) == 4);
  if constexpr (std::endian::native == std::endian::little) {
    s.append(reinterpret_cast<const char*>(data), n * 4);
  } else {
    for (size_t i = 0; i < n; ++i) {
      uint32_t u;
      std::memcpy(&u, data + i, 4);
      put_u32(s, u);
    }
  }
}

class Reader {
 public:
  Reader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(buf_[pos_ + static_cast<size_t>(i)]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(buf_[pos_ + static_cast<size_t>(i)]))
           << (8 * i);
    pos_ += 8;
    return v;
  }

  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void f32(float* out, size_t n) {
    need(n * 4);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out, buf_.data() + pos_, n * 4);
      pos_ += n * 4;
    } else {
      for (size_t i = 0; i < n; ++i) {
        const uint32_t u = u32();
        std::memcpy(out + i, &u, 4);
      }
    }
  }

  size_t pos() const { return pos_; }

 private:
  void need(size_t n) {
    ELF_CHECK(pos_ + n <= buf_.size(), ErrorKind::kFormat, "truncated checkpoint: " + path_);
  }
  const std::string& buf_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace

const nn::Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::string buf;
  buf.append("ELFK");
  put_u32(buf, kVersion);
  put_str(buf, ckpt.model_kind);
  put_u64(buf, ckpt.step);
  put_str(buf, ckpt.config_json);
  for (uint64_t s : ckpt.rng_state) put_u64(buf, s);
  put_u32(buf, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    put_str(buf, name);
    put_u32(buf, static_cast<uint32_t>(t.rank()));
    for (int64_t d : t.shape()) put_u64(buf, static_cast<uint64_t>(d));
    put_f32(buf, t.data(), static_cast<size_t>(t.numel()));
  }
  put_u32(buf, crc32(buf.data(), buf.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot write checkpoint: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  ELF_CHECK(f.good(), ErrorKind::kIo, "short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  ELF_CHECK(buf.size() > 8 && buf.compare(0, 4, "ELFK") == 0, ErrorKind::kFormat,
            "not a checkpoint file: " + path);
  const uint32_t stored_crc = crc32(buf.data(), buf.size() - 4);
  uint32_t file_crc = 0;
  for (int i = 0; i < 4; ++i)
    file_crc |= static_cast<uint32_t>(static_cast<unsigned char>(buf[buf.size() - 4 +
                                                                     static_cast<size_t>(i)]))
                << (8 * i);
  ELF_CHECK(stored_crc == file_crc, ErrorKind::kFormat, "checkpoint CRC mismatch: " + path);

  Checkpoint ckpt;
  const std::string rest = buf.substr(4, buf.size() - 8);  // between magic and CRC
  Reader body(rest, path);
  const uint32_t version = body.u32();
  ELF_CHECK(version == kVersion, ErrorKind::kFormat,
            "unsupported checkpoint version " + std::to_string(version) + ": " + path);
  ckpt.model_kind = body.str();
  ckpt.step = body.u64();
  ckpt.config_json = body.str();
  for (auto& s : ckpt.rng_state) s = body.u64();
  const uint32_t n_tensors = body.u32();
  ckpt.tensors.reserve(n_tensors);
  for (uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = body.str();
    const uint32_t rank = body.u32();
    ELF_CHECK(rank <= 8, ErrorKind::kFormat, "implausible tensor rank in " + path);
    std::vector<int64_t> shape(rank);
    for (auto& d : shape) d = static_cast<int64_t>(body.u64());
    nn::Tensor t(shape);
    body.f32(t.data(), static_cast<size_t>(t.numel()));
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, const std::string& expected_kind) {
  Checkpoint ckpt = load_checkpoint(path);
  ELF_CHECK(ckpt.model_kind == expected_kind, ErrorKind::kValidation,
            "checkpoint " + path + " has model kind '" + ckpt.model_kind + "', expected '" +
                expected_kind + "'");
  return ckpt;
}

void pack_params(Checkpoint& ckpt, const nn::ParamStore& params, bool include_opt_state) {
  for (size_t i = 0; i < params.size(); ++i) {
    const nn::Param& p = params[i];
    ckpt.tensors.emplace_back(p.name, p.value);
    if (include_opt_state) {
      ckpt.tensors.emplace_back(p.name + "#m", p.adam_m);
      ckpt.tensors.emplace_back(p.name + "#v", p.adam_v);
    }
  }
}

void unpack_params(const Checkpoint& ckpt, nn::ParamStore& params, bool include_opt_state) {
  for (size_t i = 0; i < params.size(); ++i) {
    nn::Param& p = params[i];
    const nn::Tensor* t = ckpt.find(p.name);
    ELF_CHECK(t != nullptr, ErrorKind::kFormat, "checkpoint missing tensor: " + p.name);
    ELF_CHECK(t->shape() == p.value.shape(), ErrorKind::kDimension,
              "checkpoint tensor " + p.name + " has shape " + t->shape_str() + ", expected " +
                  p.value.shape_str());
    p.value = *t;
    if (include_opt_state) {
      const nn::Tensor* m = ckpt.find(p.name + "#m");
      const nn::Tensor* v = ckpt.find(p.name + "#v");
      ELF_CHECK(m != nullptr && v != nullptr, ErrorKind::kFormat,
                "checkpoint missing optimizer state for: " + p.name);
      p.adam_m = *m;
      p.adam_v = *v;
    }
  }
}

}  // namespace elf::io
