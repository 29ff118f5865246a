#include "synthetic.hpp"

#include <cmath>
#include <filesystem>

#include "elf/audio/wav.hpp"
#include "elf/nn/rng.hpp"

namespace elf::testing {

namespace {

constexpr double kPi = 3.14159265358979323846;

double speaker_f0(int speaker) { return 110.0 * std::pow(1.5, speaker % 4); }
double speaker_brightness(int speaker) { return 0.55 + 0.12 * (speaker % 3); }

}  // namespace

std::vector<float> synth_utterance(const std::string& text, int speaker, uint64_t seed,
                                   const SyntheticSpec& spec) {
  nn::Rng rng(seed);
  const int sr = spec.sample_rate;
  const int edge = static_cast<int>(spec.edge_silence_seconds * sr);
  std::vector<float> out(static_cast<size_t>(edge), 0.f);

  const double base = speaker_f0(speaker);
  const double bright = speaker_brightness(speaker);
  for (char ch : text) {
    const size_t sym = spec.vocab.find(ch);
    const int idx = sym == std::string::npos ? 0 : static_cast<int>(sym);
    const double f0 = base * std::pow(2.0, idx / 12.0);
    const double jitter = 0.9 + 0.2 * rng.uniform();
    const int n = static_cast<int>(spec.symbol_seconds * jitter * sr);
    const int ramp = sr / 100;  // 10 ms attack/decay
    double phase[6] = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      for (int h = 1; h <= 6; ++h) {
        phase[h - 1] += 2.0 * kPi * f0 * h / sr;
        v += std::pow(bright, h) / h * std::sin(phase[h - 1]);
      }
      double env = 1.0;
      if (i < ramp) env = static_cast<double>(i) / ramp;
      if (n - 1 - i < ramp) env = std::min(env, static_cast<double>(n - 1 - i) / ramp);
      out.push_back(static_cast<float>(0.5 * env * v));
    }
  }
  out.insert(out.end(), static_cast<size_t>(edge), 0.f);
  return out;
}

std::vector<CorpusClip> make_corpus(int speakers, int utterances_per_speaker,
                                    int symbols_per_utterance, uint64_t seed,
                                    const SyntheticSpec& spec) {
  nn::Rng rng(seed);
  std::vector<CorpusClip> clips;
  for (int s = 0; s < speakers; ++s) {
    for (int u = 0; u < utterances_per_speaker; ++u) {
      CorpusClip clip;
      clip.speaker_id = "spk" + std::to_string(s);
      clip.clip_id = clip.speaker_id + "_clip" + std::to_string(u);
      for (int k = 0; k < symbols_per_utterance; ++k)
        clip.transcript.push_back(spec.vocab[rng.uniform_int(spec.vocab.size())]);
      clip.samples = synth_utterance(clip.transcript, s, rng.next_u64(), spec);
      clips.push_back(std::move(clip));
    }
  }
  return clips;
}

std::string write_corpus(const std::string& dir, const std::vector<CorpusClip>& clips,
                         int sample_rate) {
  std::filesystem::create_directories(dir);
  std::vector<io::ClipRecord> records;
  for (const auto& c : clips) {
    const std::string wav = dir + "/" + c.clip_id + ".wav";
    audio::write_wav_16bit(wav, c.samples, sample_rate);
    records.push_back({c.clip_id, c.speaker_id, wav, c.transcript});
  }
  const std::string manifest = dir + "/manifest.jsonl";
  io::write_manifest(manifest, records);
  return manifest;
}

}  // namespace elf::testing
