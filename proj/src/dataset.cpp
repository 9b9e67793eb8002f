#include "breathfair/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace breathfair {

ModelFeatures Instance::model_features() const
{
   ModelFeatures out{};
   out[0] = static_cast<double>(static_cast<int>(sex));
   out[1] = age;
   std::copy(features.begin(), features.end(), out.begin() + 2);
   return out;
}

CorpusIndex select_recordings(const CorpusIndex& corpus, double min_seconds)
{
   CorpusIndex out;
   out.rejects = corpus.rejects;
   for (const auto& e : corpus.entries) {
      // Compare in samples so 14.0 s at any rate is kept exactly.
      const double needed = min_seconds * e.sample_rate;
      if (static_cast<double>(e.n_samples) >= needed - 1e-9) out.entries.push_back(e);
   }
   if (out.entries.empty()) {
      throw EmptySelection("no recording lasts at least " + std::to_string(min_seconds) + " s");
   }
   out.summary = summarize_entries(out.entries);
   return out;
}

std::vector<Instance> segment_and_featurize(const PatientRecord& record, const Waveform& wave, const DspConfig& cfg)
{
   if (wave.sample_rate <= 0) throw ConfigError("segment_and_featurize: waveform has no sample rate");
   const auto seg_len = static_cast<std::size_t>(std::llround(kSegmentSeconds * wave.sample_rate));
   const std::size_t needed = seg_len * kSegmentsPerRecording;
   if (wave.samples.size() < needed) {
      throw TooShort(record.filename + ": " + std::to_string(wave.duration_seconds()) + " s is shorter than " +
                     std::to_string(kMinRecordingSeconds) + " s");
   }

   std::vector<Instance> out;
   out.reserve(kSegmentsPerRecording);
   for (int s = 0; s < kSegmentsPerRecording; ++s) {
      Waveform segment;
      segment.sample_rate = wave.sample_rate;
      segment.source_path = wave.source_path;
      const auto first = wave.samples.begin() + static_cast<std::ptrdiff_t>(s * seg_len);
      segment.samples.assign(first, first + static_cast<std::ptrdiff_t>(seg_len));

      Instance inst;
      inst.patient_id = record.patient_id;
      inst.segment_index = s;
      inst.features = summarize(mfcc(segment, cfg));
      inst.sex = record.sex;
      inst.age = record.age;
      inst.label = record.label;
      out.push_back(std::move(inst));
   }
   return out;
}

std::vector<Instance> segment_and_featurize(const CorpusEntry& entry, const DspConfig& cfg, int sample_rate)
{
   const Waveform wave = to_mono_resampled(decode_wav(entry.audio_path), sample_rate);
   return segment_and_featurize(entry.record, wave, cfg);
}

std::vector<Instance> filter_zero(const std::vector<Instance>& instances)
{
   std::set<std::string> zeroed;
   for (const auto& inst : instances) {
      if (std::all_of(inst.features.begin(), inst.features.end(), [](double v) { return v == 0.0; })) {
         zeroed.insert(inst.patient_id);
      }
   }
   std::vector<Instance> out;
   out.reserve(instances.size());
   for (const auto& inst : instances) {
      if (!zeroed.contains(inst.patient_id)) out.push_back(inst);
   }
   return out;
}

Composition composition_of(const std::vector<Instance>& instances)
{
   Composition c;
   for (const auto& inst : instances) ++c[inst.label][inst.sex];
   return c;
}

BalanceResult balance_classes(const std::vector<Instance>& instances, Rng& rng)
{
   std::vector<std::size_t> by_label[2];
   for (std::size_t i = 0; i < instances.size(); ++i) by_label[instances[i].label_bit()].push_back(i);
   if (by_label[0].empty() || by_label[1].empty()) throw DataError("balance_classes: both classes must be present");

   const int major = by_label[1].size() > by_label[0].size() ? 1 : 0;
   const std::size_t keep = by_label[1 - major].size();

   std::vector<std::size_t> pool = by_label[major];
   rng.shuffle(pool.begin(), pool.end());
   pool.resize(keep);

   std::vector<bool> selected(instances.size(), false);
   for (auto i : by_label[1 - major]) selected[i] = true;
   for (auto i : pool) selected[i] = true;

   BalanceResult result;
   result.instances.reserve(2 * keep);
   for (std::size_t i = 0; i < instances.size(); ++i) {
      if (selected[i]) result.instances.push_back(instances[i]);
   }
   result.composition = composition_of(result.instances);
   return result;
}

void SplitSpec::validate() const
{
   if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("split: test_fraction must lie in (0, 1)");
}

namespace {

struct Unit
{
   std::string patient_id;
   Label label = Label::copd;
   Sex sex = Sex::female;
   std::vector<std::size_t> members;
};

} // namespace

TrainTest split_train_test(const std::vector<Instance>& instances, const SplitSpec& spec)
{
   spec.validate();

   // Units are patients when grouped, single instances otherwise. Patient order is
   // sorted by id first so the result does not depend on input order.
   std::vector<Unit> units;
   if (spec.group_by_patient) {
      std::map<std::string, std::size_t> pos;
      for (std::size_t i = 0; i < instances.size(); ++i) {
         const auto& inst = instances[i];
         auto [it, fresh] = pos.try_emplace(inst.patient_id, units.size());
         if (fresh) units.push_back({inst.patient_id, inst.label, inst.sex, {}});
         else if (units[it->second].label != inst.label) {
            throw DataError("patient " + inst.patient_id + " has instances with both labels");
         }
         units[it->second].members.push_back(i);
      }
      std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.patient_id < b.patient_id; });
   }
   else {
      for (std::size_t i = 0; i < instances.size(); ++i) {
         units.push_back({instances[i].patient_id, instances[i].label, instances[i].sex, {i}});
      }
   }

   int per_label[2] = {0, 0};
   for (const auto& u : units) ++per_label[static_cast<int>(u.label)];
   if (per_label[0] < 2 || per_label[1] < 2) {
      throw InsufficientPatients("split needs at least 2 " + std::string(spec.group_by_patient ? "patients" : "instances") +
                                 " per label (copd " + std::to_string(per_label[0]) + ", covid " +
                                 std::to_string(per_label[1]) + ")");
   }

   std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
   for (std::size_t u = 0; u < units.size(); ++u) {
      const int l = spec.stratify_by_label ? static_cast<int>(units[u].label) : -1;
      const int s = spec.stratify_by_group ? static_cast<int>(units[u].sex) : -1;
      strata[{l, s}].push_back(u);
   }

   Rng rng(spec.seed);
   std::vector<bool> in_test(units.size(), false);
   for (auto& [key, members] : strata) {
      rng.shuffle(members.begin(), members.end());
      double stratum_total = 0.0;
      for (auto u : members) stratum_total += static_cast<double>(units[u].members.size());
      // Each stratum keeps its own share so per-stratum label/sex mixes match on both sides.
      const double target = spec.test_fraction * stratum_total;
      double assigned = 0.0;
      std::size_t taken = 0;
      for (auto u : members) {
         const double size = static_cast<double>(units[u].members.size());
         if (assigned + size / 2.0 < target) {
            // Leave at least one unit of the stratum for training.
            if (taken + 1 == members.size() && members.size() >= 2) break;
            in_test[u] = true;
            assigned += size;
            ++taken;
         }
      }
   }

   // Every label must appear on both sides.
   for (int l = 0; l < 2; ++l) {
      bool has_test = false;
      bool has_train = false;
      for (std::size_t u = 0; u < units.size(); ++u) {
         if (static_cast<int>(units[u].label) != l) continue;
         (in_test[u] ? has_test : has_train) = true;
      }
      if (!has_test) {
         for (std::size_t u = 0; u < units.size(); ++u) {
            if (static_cast<int>(units[u].label) == l) {
               in_test[u] = true;
               break;
            }
         }
      }
      else if (!has_train) {
         for (std::size_t u = 0; u < units.size(); ++u) {
            if (static_cast<int>(units[u].label) == l) {
               in_test[u] = false;
               break;
            }
         }
      }
   }

   std::vector<int> side(instances.size(), 0);
   for (std::size_t u = 0; u < units.size(); ++u) {
      for (auto i : units[u].members) side[i] = in_test[u] ? 1 : 0;
   }
   TrainTest out;
   for (std::size_t i = 0; i < instances.size(); ++i) (side[i] ? out.test : out.train).push_back(instances[i]);
   return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
   std::vector<std::string> out;
   std::string field;
   std::istringstream ss(line);
   while (std::getline(ss, field, ',')) {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      out.push_back(field);
   }
   if (!line.empty() && line.back() == ',') out.emplace_back();
   return out;
}

double parse_double(const std::string& s, std::size_t line)
{
   try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
   }
   catch (const std::exception&) {
      throw DataError("feature cache line " + std::to_string(line) + ": bad number '" + s + "'");
   }
}

} // namespace

void write_feature_csv(std::ostream& out, const std::vector<Instance>& instances)
{
   out << "patient_id,segment_index,sex,age,label";
   for (std::size_t k = 0; k < kMfccCount; ++k) out << ",mfcc_" << std::setw(2) << std::setfill('0') << k;
   out << '\n' << std::setfill(' ');
   out << std::fixed << std::setprecision(6);
   for (const auto& inst : instances) {
      out << inst.patient_id << ',' << inst.segment_index << ',' << to_string(inst.sex) << ',' << inst.age << ','
          << to_string(inst.label);
      for (double v : inst.features) out << ',' << v;
      out << '\n';
   }
}

void write_feature_csv(const fs::path& path, const std::vector<Instance>& instances)
{
   std::ofstream file(path);
   if (!file) throw Error("cannot open " + path.string() + " for writing");
   write_feature_csv(file, instances);
   if (!file) throw Error("write failed: " + path.string());
}

std::vector<Instance> read_feature_csv(std::istream& in)
{
   std::string line;
   if (!std::getline(in, line)) throw DataError("feature cache is empty");
   const auto header = split_csv(line);
   if (header.size() != 5 + kMfccCount || header[0] != "patient_id" || header[4] != "label") {
      throw DataError("feature cache header must be patient_id,segment_index,sex,age,label,mfcc_00..mfcc_39");
   }

   std::vector<Instance> out;
   std::size_t line_no = 1;
   while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto f = split_csv(line);
      if (f.size() != header.size()) {
         throw DataError("feature cache line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                         " fields");
      }
      Instance inst;
      inst.patient_id = f[0];
      inst.segment_index = static_cast<int>(parse_double(f[1], line_no));
      const auto sex = parse_sex(f[2]);
      const auto label = parse_label(f[4]);
      if (!sex || !label) throw DataError("feature cache line " + std::to_string(line_no) + ": bad sex or label");
      inst.sex = *sex;
      inst.label = *label;
      inst.age = parse_double(f[3], line_no);
      for (std::size_t k = 0; k < kMfccCount; ++k) inst.features[k] = parse_double(f[5 + k], line_no);
      out.push_back(std::move(inst));
   }
   return out;
}

std::vector<Instance> read_feature_csv(const fs::path& path)
{
   std::ifstream file(path);
   if (!file) throw DataError("cannot open feature cache " + path.string());
   return read_feature_csv(file);
}

} // namespace breathfair
