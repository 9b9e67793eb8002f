#pragma once

#include "breathfair/audio.hpp"
#include "breathfair/dsp.hpp"
#include "breathfair/random.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace breathfair {

inline constexpr std::size_t kModelFeatureCount = 2 + kMfccCount;
inline constexpr int kSegmentsPerRecording = 7;
inline constexpr double kSegmentSeconds = 2.0;
inline constexpr double kMinRecordingSeconds = kSegmentsPerRecording * kSegmentSeconds;

using ModelFeatures = std::array<double, kModelFeatureCount>;

/// One 2 s segment of one recording.
struct Instance
{
   std::string patient_id;
   int segment_index = 0;
   FeatureVec40 features{};
   Sex sex = Sex::female;
   double age = 0.0;
   Label label = Label::copd;

   /// [sex (male=1), age, mfcc_0 .. mfcc_39]
   ModelFeatures model_features() const;
   int label_bit() const { return static_cast<int>(label); }

   friend bool operator==(const Instance&, const Instance&) = default;
};

class EmptySelection : public DataError
{
public:
   using DataError::DataError;
};

class TooShort : public DataError
{
public:
   using DataError::DataError;
};

class InsufficientPatients : public DataError
{
public:
   using DataError::DataError;
};

/// Keeps entries lasting at least `min_seconds` (inclusive).
CorpusIndex select_recordings(const CorpusIndex& corpus, double min_seconds = kMinRecordingSeconds);

/// Splits the first 14 s of `wave` into seven 2 s windows and featurizes each.
/// The waveform must already be at its analysis rate.
std::vector<Instance> segment_and_featurize(const PatientRecord& record, const Waveform& wave, const DspConfig& cfg = {});

/// Decodes the entry, resamples it to `sample_rate` and featurizes it.
std::vector<Instance> segment_and_featurize(const CorpusEntry& entry, const DspConfig& cfg = {},
                                            int sample_rate = kCanonicalSampleRate);

/// Drops every instance of a patient that has at least one all-zero feature vector.
std::vector<Instance> filter_zero(const std::vector<Instance>& instances);

/// label -> sex -> instance count
using Composition = std::map<Label, std::map<Sex, int>>;

Composition composition_of(const std::vector<Instance>& instances);

struct BalanceResult
{
   std::vector<Instance> instances;
   Composition composition;
};

/// Keeps the minority class whole and downsamples the majority class uniformly
/// without replacement to the same count. Input order is preserved.
BalanceResult balance_classes(const std::vector<Instance>& instances, Rng& rng);

struct SplitSpec
{
   double test_fraction = 0.3;
   bool group_by_patient = true;
   bool stratify_by_label = true;
   /// Also stratify by sex, so both sides keep the per-sex class mix.
   bool stratify_by_group = true;
   std::uint64_t seed = 0;

   void validate() const;
};

struct TrainTest
{
   std::vector<Instance> train;
   std::vector<Instance> test;
};

/// Within each stratum, shuffled patients (or single instances when not grouped) go to
/// the test side while that brings the stratum's test count closer to test_fraction.
/// Each label ends up on both sides. Deterministic in spec.seed.
TrainTest split_train_test(const std::vector<Instance>& instances, const SplitSpec& spec);

/// Feature cache: patient_id,segment_index,sex,age,label,mfcc_00..mfcc_39 with 6 decimals.
void write_feature_csv(std::ostream& out, const std::vector<Instance>& instances);
void write_feature_csv(const fs::path& path, const std::vector<Instance>& instances);
std::vector<Instance> read_feature_csv(std::istream& in);
std::vector<Instance> read_feature_csv(const fs::path& path);

} // namespace breathfair
