#pragma once

#include <string>
#include <vector>

#include "elf/io/manifest.hpp"

namespace elf::testing {

// Deterministic speech-like audio: each vocabulary symbol maps to a fixed
// harmonic tone, speakers differ in base pitch and brightness, utterances are
// concatenated symbol segments under an amplitude envelope. Learnable by a
// small TTS model and cheap to generate.
struct SyntheticSpec {
  int sample_rate = 22050;
  double symbol_seconds = 0.09;
  double edge_silence_seconds = 0.05;
  std::string vocab = "abcdefghij";
};

struct CorpusClip {
  std::string clip_id;
  std::string speaker_id;
  std::string transcript;
  std::vector<float> samples;
};

std::vector<float> synth_utterance(const std::string& text, int speaker, uint64_t seed,
                                   const SyntheticSpec& spec = {});

std::vector<CorpusClip> make_corpus(int speakers, int utterances_per_speaker,
                                    int symbols_per_utterance, uint64_t seed,
                                    const SyntheticSpec& spec = {});

// Writes WAVs plus a manifest.jsonl into dir; returns the manifest path.
std::string write_corpus(const std::string& dir, const std::vector<CorpusClip>& clips,
                         int sample_rate);

}  // namespace elf::testing
