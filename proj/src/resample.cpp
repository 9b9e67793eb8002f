#include "breathfair/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>

namespace breathfair {

namespace {

// Above this many phases the per-phase table is computed on the fly.
constexpr std::int64_t kMaxCachedPhases = 4096;

double sinc(double x)
{
   if (x == 0.0) return 1.0;
   const double px = std::numbers::pi * x;
   return std::sin(px) / px;
}

class SincKernel
{
public:
   SincKernel(double cutoff, const ResamplerConfig& cfg)
      : cutoff_(cutoff),
        half_width_(cfg.zero_crossings / cutoff),
        taps_per_side_(static_cast<std::int64_t>(std::ceil(half_width_))),
        beta_(cfg.kaiser_beta),
        i0_beta_(std::cyl_bessel_i(0.0, cfg.kaiser_beta))
   {}

   std::int64_t taps_per_side() const { return taps_per_side_; }

   /// Taps for an output instant at fractional offset `frac` in [0,1) past input
   /// sample `base`; tap k multiplies input sample base - taps_per_side + 1 + k.
   /// Normalized to unit DC gain.
   std::vector<double> taps(double frac) const
   {
      std::vector<double> h(static_cast<std::size_t>(2 * taps_per_side_));
      for (std::int64_t k = 0; k < 2 * taps_per_side_; ++k) {
         const double d = frac - static_cast<double>(k - taps_per_side_ + 1);
         h[static_cast<std::size_t>(k)] = cutoff_ * sinc(cutoff_ * d) * window(d);
      }
      const double sum = std::accumulate(h.begin(), h.end(), 0.0);
      if (sum != 0.0) {
         for (double& v : h) v /= sum;
      }
      return h;
   }

private:
   double window(double d) const
   {
      const double r = d / half_width_;
      if (std::abs(r) >= 1.0) return 0.0;
      return std::cyl_bessel_i(0.0, beta_ * std::sqrt(1.0 - r * r)) / i0_beta_;
   }

   double cutoff_;
   double half_width_;
   std::int64_t taps_per_side_;
   double beta_;
   double i0_beta_;
};

} // namespace

Waveform to_mono_resampled(const Waveform& wave, int target_rate, const ResamplerConfig& cfg)
{
   if (wave.sample_rate <= 0) throw ConfigError("to_mono_resampled: waveform has no sample rate");
   if (target_rate <= 0) throw ConfigError("to_mono_resampled: target rate must be positive");
   if (target_rate == wave.sample_rate) return wave;

   const std::int64_t g = std::gcd(static_cast<std::int64_t>(target_rate), static_cast<std::int64_t>(wave.sample_rate));
   const std::int64_t up = target_rate / g;       // L
   const std::int64_t down = wave.sample_rate / g; // M
   const auto n_in = static_cast<std::int64_t>(wave.samples.size());
   const std::int64_t n_out = (n_in * target_rate + wave.sample_rate / 2) / wave.sample_rate;

   const double cutoff = std::min(1.0, static_cast<double>(target_rate) / wave.sample_rate);
   const SincKernel kernel(cutoff, cfg);
   const std::int64_t side = kernel.taps_per_side();

   std::vector<std::vector<double>> table;
   if (up <= kMaxCachedPhases) {
      table.reserve(static_cast<std::size_t>(up));
      for (std::int64_t p = 0; p < up; ++p) table.push_back(kernel.taps(static_cast<double>(p) / up));
   }

   Waveform out;
   out.sample_rate = target_rate;
   out.source_path = wave.source_path;
   out.samples.resize(static_cast<std::size_t>(n_out));

   for (std::int64_t j = 0; j < n_out; ++j) {
      const std::int64_t num = j * down;
      const std::int64_t base = num / up;
      const std::int64_t phase = num % up;
      std::vector<double> scratch;
      const std::vector<double>* h = nullptr;
      if (!table.empty()) {
         h = &table[static_cast<std::size_t>(phase)];
      }
      else {
         scratch = kernel.taps(static_cast<double>(phase) / up);
         h = &scratch;
      }

      const std::int64_t first = base - side + 1;
      const std::int64_t lo = std::max<std::int64_t>(0, first);
      const std::int64_t hi = std::min<std::int64_t>(n_in, first + 2 * side);
      double acc = 0.0;
      for (std::int64_t i = lo; i < hi; ++i) {
         acc += (*h)[static_cast<std::size_t>(i - first)] * wave.samples[static_cast<std::size_t>(i)];
      }
      out.samples[static_cast<std::size_t>(j)] = acc;
   }
   return out;
}

} // namespace breathfair
