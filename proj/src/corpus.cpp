#include "breathfair/audio.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace breathfair {

namespace {

constexpr std::string_view kHeader[] = {"patient_id", "sex", "age", "label", "filename"};

std::string_view trim(std::string_view s)
{
   while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
   while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
   return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
   std::vector<std::string_view> fields;
   std::size_t start = 0;
   while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
   }
   return fields;
}

} // namespace

std::vector<PatientRecord> parse_metadata(const std::string& csv_text)
{
   std::string_view text = csv_text;
   if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

   std::vector<PatientRecord> records;
   std::set<std::pair<std::string, std::string>> seen;
   std::size_t line_no = 0;
   bool header_done = false;

   std::size_t pos = 0;
   while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;

      if (!header_done) {
         const auto cols = split_fields(line);
         for (std::size_t i = 0; i < std::size(kHeader); ++i) {
            if (i >= cols.size() || cols[i] != kHeader[i]) {
               throw MetadataError(MetadataErrorKind::missing_column, line_no,
                                   "metadata header must be patient_id,sex,age,label,filename; column '" +
                                      std::string(kHeader[i]) + "' missing or out of place");
            }
         }
         if (cols.size() != std::size(kHeader)) {
            throw MetadataError(MetadataErrorKind::missing_column, line_no, "metadata header has extra columns");
         }
         header_done = true;
         continue;
      }
      if (line.empty()) continue;

      const auto f = split_fields(line);
      if (f.size() != std::size(kHeader)) {
         throw MetadataError(MetadataErrorKind::missing_column, line_no,
                             "row " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields, expected 5");
      }

      PatientRecord r;
      r.patient_id = std::string(f[0]);
      r.filename = std::string(f[4]);
      if (r.patient_id.empty() || r.filename.empty()) {
         throw MetadataError(MetadataErrorKind::missing_column, line_no, "row " + std::to_string(line_no) + " has empty id or filename");
      }

      const auto sex = parse_sex(f[1]);
      if (!sex) {
         throw MetadataError(MetadataErrorKind::bad_enum_value, line_no,
                             "row " + std::to_string(line_no) + ": bad sex value '" + std::string(f[1]) + "'");
      }
      r.sex = *sex;

      const auto label = parse_label(f[3]);
      if (!label) {
         throw MetadataError(MetadataErrorKind::bad_enum_value, line_no,
                             "row " + std::to_string(line_no) + ": bad label value '" + std::string(f[3]) + "'");
      }
      r.label = *label;

      int age = -1;
      const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), age);
      if (ec != std::errc() || ptr != f[2].data() + f[2].size() || age < 0) {
         throw MetadataError(MetadataErrorKind::bad_number, line_no,
                             "row " + std::to_string(line_no) + ": bad age '" + std::string(f[2]) + "'");
      }
      r.age = age;

      if (!seen.emplace(r.patient_id, r.filename).second) {
         throw MetadataError(MetadataErrorKind::duplicate_row, line_no,
                             "row " + std::to_string(line_no) + ": duplicate (" + r.patient_id + ", " + r.filename + ")");
      }
      records.push_back(std::move(r));
   }

   if (!header_done) throw MetadataError(MetadataErrorKind::missing_column, 1, "metadata file is empty");
   return records;
}

std::vector<PatientRecord> load_metadata(const fs::path& path)
{
   std::ifstream file(path);
   if (!file) throw DataError("cannot open metadata file " + path.string());
   std::ostringstream buffer;
   buffer << file.rdbuf();
   return parse_metadata(buffer.str());
}

CorpusSummary summarize_entries(const std::vector<CorpusEntry>& entries)
{
   CorpusSummary summary;
   for (const auto& e : entries) ++summary[e.record.label][e.record.sex];
   return summary;
}

CorpusIndex scan_corpus(const fs::path& root, const std::vector<PatientRecord>& records)
{
   const fs::path audio_dir = root / "audio";
   if (!fs::is_directory(audio_dir)) throw DataError("corpus root " + root.string() + " has no audio/ directory");

   CorpusIndex index;
   for (const auto& record : records) {
      const fs::path path = audio_dir / record.filename;
      if (!fs::is_regular_file(path)) {
         index.rejects.push_back({record, RejectReason::file_missing, path.string()});
         continue;
      }
      try {
         const Waveform wave = decode_wav(path);
         index.entries.push_back({record, path, wave.sample_rate, wave.samples.size()});
      }
      catch (const AudioError& e) {
         index.rejects.push_back({record, RejectReason::decode_failed, e.what()});
      }
   }
   std::stable_sort(index.rejects.begin(), index.rejects.end(),
                    [](const CorpusReject& a, const CorpusReject& b) { return a.record.filename < b.record.filename; });
   index.summary = summarize_entries(index.entries);
   return index;
}

} // namespace breathfair
