#include "breathfair/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace breathfair {

double mean(std::span<const double> x)
{
   if (x.empty()) return 0.0;
   return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_std(std::span<const double> x)
{
   if (x.size() < 2) return 0.0;
   const double m = mean(x);
   double ss = 0.0;
   for (double v : x) ss += (v - m) * (v - m);
   return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x)
{
   constexpr int kMaxIter = 10000;
   constexpr double kTiny = 1e-300;
   constexpr double kTol = 1e-16;

   const double qab = a + b;
   const double qap = a + 1.0;
   const double qam = a - 1.0;
   double c = 1.0;
   double d = 1.0 - qab * x / qap;
   if (std::abs(d) < kTiny) d = kTiny;
   d = 1.0 / d;
   double h = d;
   for (int m = 1; m <= kMaxIter; ++m) {
      const double m2 = 2.0 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < kTiny) d = kTiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < kTiny) d = kTiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      const double delta = d * c;
      h *= delta;
      if (std::abs(delta - 1.0) < kTol) return h;
   }
   return h;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x)
{
   if (!(a > 0.0 && b > 0.0)) throw ConfigError("incomplete beta needs a, b > 0");
   if (x <= 0.0) return 0.0;
   if (x >= 1.0) return 1.0;
   const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
   const double front = std::exp(log_front);
   if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
   return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df)
{
   if (!(df > 0.0)) throw ConfigError("student t needs df > 0");
   if (std::isinf(t)) return 0.0;
   const double x = df / (df + t * t);
   const double p = regularized_incomplete_beta(df / 2.0, 0.5, x);
   return std::min(1.0, std::max(0.0, p));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b)
{
   if (a.size() < 2 || b.size() < 2) throw DataError("welch_t_test needs at least two samples per side");
   const auto na = static_cast<double>(a.size());
   const auto nb = static_cast<double>(b.size());
   WelchResult r;
   r.mu_before = mean(a);
   r.mu_after = mean(b);
   const double va = std::pow(sample_std(a), 2.0) / na;
   const double vb = std::pow(sample_std(b), 2.0) / nb;
   const double se2 = va + vb;

   if (se2 == 0.0) {
      r.degenerate = true;
      r.df = na + nb - 2.0;
      if (r.mu_before == r.mu_after) {
         r.t = 0.0;
         r.p = 1.0;
      }
      else {
         r.t = r.mu_before > r.mu_after ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
         r.p = 0.0;
      }
      return r;
   }

   r.t = (r.mu_before - r.mu_after) / std::sqrt(se2);
   r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
   r.p = student_t_two_sided_p(r.t, r.df);
   return r;
}

double percent_improvement(double before, double after)
{
   if (before == 0.0) throw ZeroBaseline("percent improvement is undefined for a zero baseline");
   return 100.0 * std::abs(before - after) / before;
}

PhaseSummary summarize_phase(std::span<const double> x)
{
   PhaseSummary s;
   s.mean = mean(x);
   s.std = sample_std(x);
   s.stderr_ = x.empty() ? 0.0 : s.std / std::sqrt(static_cast<double>(x.size()));
   return s;
}

std::vector<MetricSummary> summarize_runs(const std::vector<RunSamples>& samples)
{
   std::vector<MetricSummary> out;
   for (const auto& s : samples) {
      if (s.before.size() != s.after.size()) throw DataError("metric " + s.metric + ": before/after run counts differ");
      MetricSummary m;
      m.metric = s.metric;
      m.n = s.before.size();
      m.before = summarize_phase(s.before);
      m.after = summarize_phase(s.after);
      if (m.n >= 2) m.welch = welch_t_test(s.before, s.after);
      else {
         m.welch.mu_before = m.before.mean;
         m.welch.mu_after = m.after.mean;
         m.welch.degenerate = true;
      }
      if (m.before.mean != 0.0) m.pct_improvement = percent_improvement(m.before.mean, m.after.mean);
      out.push_back(std::move(m));
   }
   return out;
}

} // namespace breathfair
