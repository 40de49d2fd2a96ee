#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fkr {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval
{
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

struct LinearFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y = intercept + slope * x. R^2 is 1 for a perfect
// fit; when y has zero variance the fit is exact and R^2 is reported as 1.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
double variance(std::span<const double> v); // unbiased
// Linear-interpolated quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> v, double p);
double median(std::vector<double> v);

double normal_cdf(double x);

// Kolmogorov-Smirnov distance between the empirical law of v and Uniform[0,1].
double ks_uniform(std::vector<double> v);

// P(|Binomial(n, p) - n p| >= t), exact summation.
double binomial_two_sided_tail(std::size_t n, double p, double t);

// Shortest round-trip decimal representation (std::to_chars); stable across runs.
std::string format_double(double x);

} // namespace fkr
