#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace breathfair {

/// One step of the splitmix64 generator; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for run/fold/stream `index` derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Explicit seeded randomness passed to every stochastic step.
///
/// Wraps mt19937_64 (whose output sequence is fixed by the standard) and
/// implements the distributions by hand, so a seed yields the same draws with
/// any standard library.
class Rng
{
public:
   explicit Rng(std::uint64_t seed) : engine_(seed) {}

   std::uint64_t next_u64() { return engine_(); }

   /// Uniform in [0, 1) with 53 random bits.
   double uniform();

   /// Uniform integer in [0, n); n must be positive.
   std::size_t index(std::size_t n);

   /// Standard normal (Marsaglia polar method).
   double normal();

   /// Uniform integer in [lo, hi].
   int integer(int lo, int hi);

   template <class RandomIt>
   void shuffle(RandomIt first, RandomIt last)
   {
      const auto n = static_cast<std::size_t>(last - first);
      for (std::size_t i = n; i > 1; --i) {
         const auto j = index(i);
         std::swap(first[i - 1], first[j]);
      }
   }

private:
   std::mt19937_64 engine_;
   double spare_normal_ = 0.0;
   bool has_spare_ = false;
};

} // namespace breathfair
