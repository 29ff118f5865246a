#include "elf/io/loss_log.hpp"

#include <nlohmann/json.hpp>

#include "elf/error.hpp"

namespace elf::io {

using nlohmann::json;

LossLog::LossLog(const std::string& path, bool append)
    : f_(path, append ? std::ios::app : std::ios::trunc) {
  ELF_CHECK(f_.good(), ErrorKind::kIo, "cannot open loss log: " + path);
}

void LossLog::log(uint64_t step, const std::string& term, double value) {
  if (!f_.is_open()) return;
  json j{{"step", step}, {"term", term}, {"value", value}};
  f_ << j.dump() << '\n';
}

void LossLog::flush() {
  if (f_.is_open()) f_.flush();
}

std::vector<LossEntry> read_loss_log(const std::string& path) {
  std::ifstream f(path);
  ELF_CHECK(f.good(), ErrorKind::kIo, "cannot open loss log: " + path);
  std::vector<LossEntry> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    out.push_back({j.at("step").get<uint64_t>(), j.at("term").get<std::string>(),
                   j.at("value").get<double>()});
  }
  return out;
}

double term_mean(const std::vector<LossEntry>& log, const std::string& term, uint64_t step_lo,
                 uint64_t step_hi) {
  double acc = 0.0;
  int64_t n = 0;
  for (const auto& e : log) {
    if (e.term == term && e.step > step_lo && e.step <= step_hi) {
      acc += e.value;
      ++n;
    }
  }
  ELF_CHECK(n > 0, ErrorKind::kInput, "no '" + term + "' entries in the requested step range");
  return acc / static_cast<double>(n);
}

}  // namespace elf::io
