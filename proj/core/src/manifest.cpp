#include "elf/io/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "elf/error.hpp"

namespace elf::io {

using nlohmann::json;

std::vector<ClipRecord> read_manifest(const std::string& path) {
  std::ifstream f(path);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot open manifest: " + path);
  std::vector<ClipRecord> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorKind::kFormat,
            "manifest " + path + " line " + std::to_string(lineno) + ": " + e.what());
    }
    ClipRecord r;
    try {
      r.clip_id = j.at("clip_id").get<std::string>();
      r.speaker_id = j.at("speaker_id").get<std::string>();
      r.path = j.at("path").get<std::string>();
      r.transcript = j.value("transcript", "");
    } catch (const json::exception& e) {
      raise(ErrorKind::kFormat,
            "manifest " + path + " line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_manifest(const std::string& path, const std::vector<ClipRecord>& records) {
  std::ofstream f(path, std::ios::trunc);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot write manifest: " + path);
  for (const auto& r : records) {
    json j{{"clip_id", r.clip_id},
           {"speaker_id", r.speaker_id},
           {"path", r.path},
           {"transcript", r.transcript}};
    f << j.dump() << '\n';
  }
}

}  // namespace elf::io
