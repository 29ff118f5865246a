#pragma once

#include <stdexcept>
#include <string>

namespace elf {

// Error categories map onto the CLI exit codes: validation problems exit 1,
// runtime failures exit 2.
enum class ErrorKind {
  kIo,          // unreadable/unwritable files
  kFormat,      // unparseable or corrupt file contents
  kDimension,   // shape/size mismatches between tensors or configs
  kDomain,      // values outside the mathematical domain of an operation
  kInput,       // empty or otherwise unusable caller input
  kValidation,  // config-level inconsistencies caught before any compute
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

#define ELF_CHECK(cond, kind, msg)                  \
  do {                                              \
    if (!(cond)) ::elf::raise((kind), (msg));       \
  } while (0)

}  // namespace elf
