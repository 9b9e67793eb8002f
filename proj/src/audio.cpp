#include "breathfair/audio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace breathfair {

std::string_view to_string(Sex sex)
{
   return sex == Sex::male ? "male" : "female";
}

std::string_view to_string(Label label)
{
   return label == Label::covid ? "covid" : "copd";
}

namespace {

std::string lowercase(std::string_view text)
{
   std::string out(text);
   std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
   return out;
}

} // namespace

std::optional<Sex> parse_sex(std::string_view text)
{
   const auto t = lowercase(text);
   if (t == "male") return Sex::male;
   if (t == "female") return Sex::female;
   return std::nullopt;
}

std::optional<Label> parse_label(std::string_view text)
{
   const auto t = lowercase(text);
   if (t == "copd") return Label::copd;
   if (t == "covid") return Label::covid;
   return std::nullopt;
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p)
{
   return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p)
{
   return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
          (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

[[noreturn]] void malformed(const std::string& source, const std::string& why)
{
   throw AudioError(AudioErrorKind::malformed_container, source + ": " + why);
}

struct FormatChunk
{
   std::uint16_t format = 0;
   std::uint16_t channels = 0;
   std::uint32_t sample_rate = 0;
   std::uint16_t bits = 0;
};

double decode_sample(const unsigned char* p, const FormatChunk& fmt)
{
   if (fmt.format == kFormatFloat) {
      const auto bits = read_u32(p);
      return static_cast<double>(std::bit_cast<float>(bits));
   }
   switch (fmt.bits) {
   case 16:
      return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
   case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
   }
   default:
      return static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
   }
}

void append_u16(std::vector<unsigned char>& out, std::uint16_t v)
{
   out.push_back(static_cast<unsigned char>(v & 0xFF));
   out.push_back(static_cast<unsigned char>(v >> 8));
}

void append_u32(std::vector<unsigned char>& out, std::uint32_t v)
{
   for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void write_wav(const fs::path& path, const Waveform& wave, std::uint16_t format, std::uint16_t bits)
{
   if (wave.sample_rate <= 0) throw ConfigError("write_wav: sample rate must be positive");
   const std::uint32_t block = bits / 8;
   const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * block);

   std::vector<unsigned char> out;
   out.reserve(44 + data_bytes);
   out.insert(out.end(), {'R', 'I', 'F', 'F'});
   append_u32(out, 36 + data_bytes);
   out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
   append_u32(out, 16);
   append_u16(out, format);
   append_u16(out, 1);
   append_u32(out, static_cast<std::uint32_t>(wave.sample_rate));
   append_u32(out, static_cast<std::uint32_t>(wave.sample_rate) * block);
   append_u16(out, static_cast<std::uint16_t>(block));
   append_u16(out, bits);
   out.insert(out.end(), {'d', 'a', 't', 'a'});
   append_u32(out, data_bytes);

   for (double s : wave.samples) {
      if (format == kFormatFloat) {
         append_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
      }
      else {
         const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
         const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
         append_u16(out, static_cast<std::uint16_t>(v));
      }
   }

   std::ofstream file(path, std::ios::binary);
   if (!file) throw Error("cannot open " + path.string() + " for writing");
   file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
   if (!file) throw Error("write failed: " + path.string());
}

} // namespace

Waveform decode_wav_bytes(const std::vector<unsigned char>& bytes, const std::string& source)
{
   if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
      malformed(source, "not a RIFF/WAVE file");
   }

   std::optional<FormatChunk> fmt;
   const unsigned char* data = nullptr;
   std::size_t data_size = 0;

   std::size_t pos = 12;
   while (pos + 8 <= bytes.size()) {
      const unsigned char* chunk = bytes.data() + pos;
      const std::size_t size = read_u32(chunk + 4);
      const std::size_t body = pos + 8;
      const std::size_t available = bytes.size() - body;

      if (std::memcmp(chunk, "fmt ", 4) == 0) {
         if (size < 16 || size > available) malformed(source, "truncated fmt chunk");
         FormatChunk f;
         f.format = read_u16(chunk + 8);
         f.channels = read_u16(chunk + 10);
         f.sample_rate = read_u32(chunk + 12);
         f.bits = read_u16(chunk + 22);
         if (f.format == kFormatExtensible) {
            if (size < 40) malformed(source, "truncated WAVE_FORMAT_EXTENSIBLE header");
            f.format = read_u16(chunk + 8 + 24);
         }
         fmt = f;
      }
      else if (std::memcmp(chunk, "data", 4) == 0) {
         data = chunk + 8;
         // Streaming writers leave the size as 0 or 0xFFFFFFFF; take what is there.
         data_size = std::min(size, available);
         if (size == 0 && available > 0 && fmt) data_size = available;
      }

      if (size > available) break;
      pos = body + size + (size & 1);
   }

   if (!fmt) malformed(source, "missing fmt chunk");
   if (!data) malformed(source, "missing data chunk");
   if (fmt->channels == 0) malformed(source, "zero channels");
   if (fmt->sample_rate == 0) malformed(source, "zero sample rate");

   const bool int_ok = fmt->format == kFormatPcm && (fmt->bits == 16 || fmt->bits == 24 || fmt->bits == 32);
   const bool float_ok = fmt->format == kFormatFloat && fmt->bits == 32;
   if (!int_ok && !float_ok) {
      throw AudioError(AudioErrorKind::unsupported_encoding,
                       source + ": unsupported encoding (format tag " + std::to_string(fmt->format) + ", " +
                          std::to_string(fmt->bits) + " bits)");
   }

   const std::size_t sample_bytes = fmt->bits / 8;
   const std::size_t frame_bytes = sample_bytes * fmt->channels;
   const std::size_t frames = data_size / frame_bytes;
   if (frames == 0) throw AudioError(AudioErrorKind::empty_audio, source + ": no audio frames");

   Waveform wave;
   wave.sample_rate = static_cast<int>(fmt->sample_rate);
   wave.source_path = source;
   wave.samples.resize(frames);
   for (std::size_t f = 0; f < frames; ++f) {
      const unsigned char* frame = data + f * frame_bytes;
      double sum = 0.0;
      for (std::size_t c = 0; c < fmt->channels; ++c) sum += decode_sample(frame + c * sample_bytes, *fmt);
      const double v = fmt->channels == 1 ? sum : sum / fmt->channels;
      if (!std::isfinite(v)) malformed(source, "non-finite sample at frame " + std::to_string(f));
      wave.samples[f] = v;
   }
   return wave;
}

Waveform decode_wav(const fs::path& path)
{
   std::ifstream file(path, std::ios::binary);
   if (!file) throw AudioError(AudioErrorKind::malformed_container, path.string() + ": cannot open file");
   std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
   if (bytes.empty()) throw AudioError(AudioErrorKind::empty_audio, path.string() + ": empty file");
   return decode_wav_bytes(bytes, path.string());
}

void write_wav_float32(const fs::path& path, const Waveform& wave)
{
   write_wav(path, wave, kFormatFloat, 32);
}

void write_wav_pcm16(const fs::path& path, const Waveform& wave)
{
   write_wav(path, wave, kFormatPcm, 16);
}

} // namespace breathfair
