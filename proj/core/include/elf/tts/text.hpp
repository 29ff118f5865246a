#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace elf::tts {

// Symbol-indexed text. The default front-end maps UTF-8 codepoints through a
// configured symbol inventory, so an external phonemizer can be plugged in by
// listing its phone symbols in the vocabulary and feeding phonemized strings.
struct PhonemeSequence {
  std::vector<int> ids;

  int64_t length() const { return static_cast<int64_t>(ids.size()); }
};

class Tokenizer {
 public:
  // symbols: UTF-8 string, one symbol per codepoint, ids assigned in order.
  static Tokenizer from_symbols(const std::string& symbols);

  PhonemeSequence encode(const std::string& text) const;
  int vocab_size() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Splits a UTF-8 string into codepoints (each returned as a UTF-8 substring).
std::vector<std::string> utf8_codepoints(const std::string& text);

}  // namespace elf::tts
