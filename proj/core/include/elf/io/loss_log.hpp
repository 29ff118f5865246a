#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace elf::io {

struct LossEntry {
  uint64_t step = 0;
  std::string term;
  double value = 0.0;
};

// Line-delimited JSON {step, term, value}.
class LossLog {
 public:
  LossLog() = default;
  LossLog(const std::string& path, bool append);

  void log(uint64_t step, const std::string& term, double value);
  void flush();
  bool open() const { return f_.is_open(); }

 private:
  std::ofstream f_;
};

std::vector<LossEntry> read_loss_log(const std::string& path);

// Mean of a term over steps in (step_lo, step_hi]; silently skips other terms.
double term_mean(const std::vector<LossEntry>& log, const std::string& term, uint64_t step_lo,
                 uint64_t step_hi);

}  // namespace elf::io
