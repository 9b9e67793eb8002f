#include "breathfair/random.hpp"

#include <cmath>
#include <stdexcept>

namespace breathfair {

std::uint64_t splitmix64(std::uint64_t& state)
{
   std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
   z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
   return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
   std::uint64_t state = master ^ (0xD1B54A32D192ED03ULL * (index + 1));
   splitmix64(state);
   return splitmix64(state);
}

double Rng::uniform()
{
   return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n)
{
   if (n == 0) throw std::invalid_argument("Rng::index: empty range");
   const std::uint64_t bound = n;
   // Reject the top partial block so every residue is equally likely.
   const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
   std::uint64_t x = engine_();
   while (x > limit) x = engine_();
   return static_cast<std::size_t>(x % bound);
}

double Rng::normal()
{
   if (has_spare_) {
      has_spare_ = false;
      return spare_normal_;
   }
   double u = 0.0;
   double v = 0.0;
   double s = 0.0;
   do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
   } while (s >= 1.0 || s == 0.0);
   const double m = std::sqrt(-2.0 * std::log(s) / s);
   spare_normal_ = v * m;
   has_spare_ = true;
   return u * m;
}

int Rng::integer(int lo, int hi)
{
   if (hi < lo) throw std::invalid_argument("Rng::integer: hi < lo");
   const auto span = static_cast<std::size_t>(static_cast<long long>(hi) - lo + 1);
   return static_cast<int>(lo + static_cast<long long>(index(span)));
}

} // namespace breathfair
