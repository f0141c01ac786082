#pragma once

#include <string>
#include <vector>

namespace artsep {

// Mono sample buffer. Samples are dimensionless amplitudes, nominally in
// [-1, 1], stored as doubles for processing headroom.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 44100;

  double duration_s() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

enum class WavFormat { Pcm16, Float32 };

// Reads RIFF/WAVE, PCM16 or IEEE float32, 1 or 2 channels. Stereo is averaged
// to mono; PCM16 is scaled by 1/32768.
AudioClip read_wav(const std::string& path);

void write_wav(const std::string& path, const AudioClip& clip,
               WavFormat format = WavFormat::Float32);

}  // namespace artsep
