#pragma once

#include "breathfair/error.hpp"
#include "breathfair/types.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace breathfair {

namespace fs = std::filesystem;

/// Canonical analysis rate; overridable through the `audio.sample_rate` config key.
inline constexpr int kCanonicalSampleRate = 22050;

/// Decoded mono audio.
struct Waveform
{
   std::vector<double> samples;
   int sample_rate = 0;
   std::string source_path;

   double duration_seconds() const
   {
      return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
   }
};

enum class AudioErrorKind { malformed_container, unsupported_encoding, empty_audio };

class AudioError : public DataError
{
public:
   AudioError(AudioErrorKind kind, const std::string& what) : DataError(what), kind_(kind) {}
   AudioErrorKind kind() const { return kind_; }

private:
   AudioErrorKind kind_;
};

/// Decodes a RIFF/WAVE file holding 16/24/32-bit integer PCM or 32-bit float.
/// Integer samples are divided by 2^(bits-1); channels are mixed down by their mean.
Waveform decode_wav(const fs::path& path);

/// Same as decode_wav, over an in-memory file image.
Waveform decode_wav_bytes(const std::vector<unsigned char>& bytes, const std::string& source_path = {});

/// Writes mono 32-bit IEEE float; decode_wav reproduces the samples exactly.
void write_wav_float32(const fs::path& path, const Waveform& wave);

/// Writes mono 16-bit PCM; samples are clamped to [-1, 1) and rounded to the nearest step.
void write_wav_pcm16(const fs::path& path, const Waveform& wave);

/// Kaiser-windowed sinc resampler settings. Fixed so fixtures stay reproducible.
struct ResamplerConfig
{
   double kaiser_beta = 8.6;
   int zero_crossings = 32;
};

/// Band-limited polyphase resampling to `target_rate`.
/// Output length is round(len * target / source); identical rates return the input unchanged.
Waveform to_mono_resampled(const Waveform& wave, int target_rate, const ResamplerConfig& cfg = {});

struct PatientRecord
{
   std::string patient_id;
   Sex sex = Sex::female;
   int age = 0;
   Label label = Label::copd;
   std::string filename;

   friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

enum class MetadataErrorKind { missing_column, bad_enum_value, bad_number, duplicate_row };

class MetadataError : public DataError
{
public:
   MetadataError(MetadataErrorKind kind, std::size_t row, const std::string& what)
      : DataError(what), kind_(kind), row_(row)
   {}
   MetadataErrorKind kind() const { return kind_; }
   /// 1-based line number in the CSV (the header is line 1).
   std::size_t row() const { return row_; }

private:
   MetadataErrorKind kind_;
   std::size_t row_;
};

/// Parses metadata.csv; the header must be exactly patient_id,sex,age,label,filename.
std::vector<PatientRecord> load_metadata(const fs::path& path);
std::vector<PatientRecord> parse_metadata(const std::string& csv_text);

enum class RejectReason { file_missing, decode_failed };

struct CorpusEntry
{
   PatientRecord record;
   fs::path audio_path;
   int sample_rate = 0;
   std::size_t n_samples = 0;

   double duration_seconds() const
   {
      return sample_rate > 0 ? static_cast<double>(n_samples) / sample_rate : 0.0;
   }
};

struct CorpusReject
{
   PatientRecord record;
   RejectReason reason = RejectReason::file_missing;
   std::string detail;
};

/// label -> sex -> count
using CorpusSummary = std::map<Label, std::map<Sex, int>>;

struct CorpusIndex
{
   std::vector<CorpusEntry> entries;
   std::vector<CorpusReject> rejects;
   CorpusSummary summary;
};

CorpusSummary summarize_entries(const std::vector<CorpusEntry>& entries);

/// Joins each record to <root>/audio/<filename>. Missing or undecodable files
/// are listed in `rejects` (sorted by filename) instead of failing the scan.
CorpusIndex scan_corpus(const fs::path& root, const std::vector<PatientRecord>& records);

} // namespace breathfair
