#pragma once

#include "breathfair/error.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace breathfair {

struct WelchResult
{
   double t = 0.0;
   double df = 0.0;
   double p = 1.0;
   double mu_before = 0.0;
   double mu_after = 0.0;
   /// Both samples have zero variance. Equal means give t = 0, p = 1; different
   /// means give t = +-inf, p = 0. df is then n_a + n_b - 2.
   bool degenerate = false;
};

class ZeroBaseline : public DataError
{
public:
   using DataError::DataError;
};

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> x);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Welch's unequal-variance t-test of a (before) against b (after). Needs n >= 2 on each side.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// 100 * |before - after| / before; throws ZeroBaseline when before == 0.
double percent_improvement(double before, double after);

struct RunSamples
{
   std::string metric;
   std::vector<double> before;
   std::vector<double> after;
};

struct PhaseSummary
{
   double mean = 0.0;
   double std = 0.0;
   double stderr_ = 0.0;
};

struct MetricSummary
{
   std::string metric;
   std::size_t n = 0;
   PhaseSummary before;
   PhaseSummary after;
   WelchResult welch;
   /// Absent when the mean before mitigation is zero.
   std::optional<double> pct_improvement;
};

PhaseSummary summarize_phase(std::span<const double> x);

/// Mean, std and stderr per phase plus Welch's test; run counts must match.
std::vector<MetricSummary> summarize_runs(const std::vector<RunSamples>& samples);

} // namespace breathfair
