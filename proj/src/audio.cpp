#include "artsep/audio.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "artsep/common.hpp"

namespace artsep {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_le32(std::FILE* f, std::uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  std::fwrite(b, 1, 4, f);
}

void put_le16(std::FILE* f, std::uint16_t x) {
  unsigned char b[2] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8)};
  std::fwrite(b, 1, 2, f);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DataError("cannot open wav file: " + path);

  unsigned char hdr[12];
  if (std::fread(hdr, 1, 12, f.get()) != 12 || std::memcmp(hdr, "RIFF", 4) != 0 ||
      std::memcmp(hdr + 8, "WAVE", 4) != 0)
    throw DataError("malformed wav header (not RIFF/WAVE): " + path);

  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<unsigned char> data;

  // Walk chunks; tolerate extras (LIST, fact, ...) by skipping them.
  for (;;) {
    unsigned char chdr[8];
    std::size_t got = std::fread(chdr, 1, 8, f.get());
    if (got == 0) break;
    if (got != 8) throw DataError("truncated wav chunk header: " + path);
    std::uint32_t size = le32(chdr + 4);
    if (std::memcmp(chdr, "fmt ", 4) == 0) {
      std::vector<unsigned char> fmt(size);
      if (size < 16 || std::fread(fmt.data(), 1, size, f.get()) != size)
        throw DataError("malformed wav fmt chunk: " + path);
      audio_format = le16(fmt.data());
      channels = le16(fmt.data() + 2);
      rate = le32(fmt.data() + 4);
      bits = le16(fmt.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(chdr, "data", 4) == 0) {
      data.resize(size);
      if (size > 0 && std::fread(data.data(), 1, size, f.get()) != size)
        throw DataError("truncated wav data chunk: " + path);
    } else {
      if (std::fseek(f.get(), static_cast<long>(size + (size & 1)), SEEK_CUR) != 0)
        throw DataError("truncated wav file: " + path);
      continue;
    }
    if (size & 1) std::fseek(f.get(), 1, SEEK_CUR);
  }

  if (!have_fmt) throw DataError("wav file missing fmt chunk: " + path);
  if (channels < 1 || channels > 2)
    throw DataError("unsupported wav channel count (" + std::to_string(channels) + "): " + path);
  if (rate == 0) throw DataError("wav file has zero sample rate: " + path);

  const bool pcm16 = (audio_format == 1 && bits == 16);
  const bool f32 = (audio_format == 3 && bits == 32);
  if (!pcm16 && !f32)
    throw DataError("unsupported wav codec (format " + std::to_string(audio_format) + ", " +
                    std::to_string(bits) + " bit): " + path);

  const std::size_t bytes_per = pcm16 ? 2 : 4;
  const std::size_t frame_bytes = bytes_per * channels;
  const std::size_t n_frames = frame_bytes ? data.size() / frame_bytes : 0;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* p = data.data() + i * frame_bytes + c * bytes_per;
      if (pcm16) {
        std::int16_t s = static_cast<std::int16_t>(le16(p));
        acc += static_cast<double>(s) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += static_cast<double>(v);
      }
    }
    clip.samples[i] = acc / channels;
  }
  for (double s : clip.samples)
    if (!std::isfinite(s)) throw DataError("wav file contains non-finite samples: " + path);
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip, WavFormat format) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw DataError("cannot create wav file: " + path);

  const bool pcm16 = format == WavFormat::Pcm16;
  const std::uint32_t bytes_per = pcm16 ? 2 : 4;
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_bytes = n * bytes_per;

  std::fwrite("RIFF", 1, 4, f.get());
  put_le32(f.get(), 36 + data_bytes);
  std::fwrite("WAVE", 1, 4, f.get());
  std::fwrite("fmt ", 1, 4, f.get());
  put_le32(f.get(), 16);
  put_le16(f.get(), pcm16 ? 1 : 3);
  put_le16(f.get(), 1);  // mono
  put_le32(f.get(), static_cast<std::uint32_t>(clip.sample_rate));
  put_le32(f.get(), static_cast<std::uint32_t>(clip.sample_rate) * bytes_per);
  put_le16(f.get(), static_cast<std::uint16_t>(bytes_per));
  put_le16(f.get(), static_cast<std::uint16_t>(bytes_per * 8));
  std::fwrite("data", 1, 4, f.get());
  put_le32(f.get(), data_bytes);

  if (pcm16) {
    for (double s : clip.samples) {
      double clamped = s < -1.0 ? -1.0 : (s > 32767.0 / 32768.0 ? 32767.0 / 32768.0 : s);
      auto q = static_cast<std::int16_t>(std::lrint(clamped * 32768.0));
      put_le16(f.get(), static_cast<std::uint16_t>(q));
    }
  } else {
    for (double s : clip.samples) {
      float v = static_cast<float>(s);
      unsigned char b[4];
      std::memcpy(b, &v, 4);
      std::fwrite(b, 1, 4, f.get());
    }
  }
}

}  // namespace artsep
