#include "breathfair/experiment.hpp"

#include <cstdio>

namespace breathfair {

void SyntheticSpec::validate() const
{
   for (int n : {copd_female, copd_male, covid_female, covid_male}) {
      if (n < 2) throw ConfigError("synthetic: every (label, sex) cell needs at least 2 patients");
   }
   if (!(noise >= 0.0)) throw ConfigError("synthetic: noise must be non-negative");
   if (informative_dims < 0 || informative_dims > static_cast<int>(kMfccCount)) {
      throw ConfigError("synthetic: informative_dims must lie in [0, 40]");
   }
   if (age_min > age_max) throw ConfigError("synthetic: age_min > age_max");
}

std::vector<Instance> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed)
{
   spec.validate();
   Rng rng(seed);
   std::vector<Instance> out;
   out.reserve(static_cast<std::size_t>(spec.patient_count()) * kSegmentsPerRecording);

   const struct
   {
      Label label;
      Sex sex;
      int count;
   } cells[] = {{Label::copd, Sex::female, spec.copd_female},
                {Label::copd, Sex::male, spec.copd_male},
                {Label::covid, Sex::female, spec.covid_female},
                {Label::covid, Sex::male, spec.covid_male}};

   for (const auto& cell : cells) {
      FeatureVec40 centre{};
      const double sign = cell.label == Label::covid ? 1.0 : -1.0;
      const double shift = cell.sex == Sex::female ? -spec.bias : 0.0;
      for (int k = 0; k < spec.informative_dims; ++k) {
         centre[static_cast<std::size_t>(k)] = (sign + shift) * spec.class_separation;
      }

      for (int p = 0; p < cell.count; ++p) {
         char id[64];
         std::snprintf(id, sizeof id, "syn-%s-%c-%03d", std::string(to_string(cell.label)).c_str(),
                       cell.sex == Sex::female ? 'f' : 'm', p);
         const int age = rng.integer(spec.age_min, spec.age_max);
         for (int s = 0; s < kSegmentsPerRecording; ++s) {
            Instance inst;
            inst.patient_id = id;
            inst.segment_index = s;
            inst.sex = cell.sex;
            inst.age = age;
            inst.label = cell.label;
            for (std::size_t k = 0; k < kMfccCount; ++k) inst.features[k] = centre[k] + spec.noise * rng.normal();
            out.push_back(std::move(inst));
         }
      }
   }
   return out;
}

} // namespace breathfair
