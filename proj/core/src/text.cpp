#include "elf/tts/text.hpp"

#include "elf/error.hpp"

namespace elf::tts {

std::vector<std::string> utf8_codepoints(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if ((c & 0x80) == 0)
      len = 1;
    else if ((c & 0xE0) == 0xC0)
      len = 2;
    else if ((c & 0xF0) == 0xE0)
      len = 3;
    else if ((c & 0xF8) == 0xF0)
      len = 4;
    else
      raise(ErrorKind::kInput, "invalid UTF-8 byte in text");
    ELF_CHECK(i + len <= text.size(), ErrorKind::kInput, "truncated UTF-8 sequence in text");
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

Tokenizer Tokenizer::from_symbols(const std::string& symbols) {
  Tokenizer t;
  t.symbols_ = utf8_codepoints(symbols);
  ELF_CHECK(!t.symbols_.empty(), ErrorKind::kValidation, "tokenizer: empty symbol inventory");
  for (size_t i = 0; i < t.symbols_.size(); ++i) {
    ELF_CHECK(t.index_.emplace(t.symbols_[i], static_cast<int>(i)).second,
              ErrorKind::kValidation, "tokenizer: duplicate symbol '" + t.symbols_[i] + "'");
  }
  return t;
}

PhonemeSequence Tokenizer::encode(const std::string& text) const {
  PhonemeSequence seq;
  for (const std::string& cp : utf8_codepoints(text)) {
    auto it = index_.find(cp);
    ELF_CHECK(it != index_.end(), ErrorKind::kInput,
              "tokenizer: symbol '" + cp + "' not in the vocabulary");
    seq.ids.push_back(it->second);
  }
  ELF_CHECK(!seq.ids.empty(), ErrorKind::kInput, "tokenizer: empty phoneme sequence");
  return seq;
}

}  // namespace elf::tts
