#pragma once

#include <string>
#include <vector>

namespace elf::io {

// One line-delimited JSON record per clip.
struct ClipRecord {
  std::string clip_id;
  std::string speaker_id;
  std::string path;
  std::string transcript;
};

std::vector<ClipRecord> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ClipRecord>& records);

}  // namespace elf::io
