#include "fkr/stats.hpp"

#include "fkr/parallel.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace fkr {

Interval wilson_interval(std::size_t successes, std::size_t trials, double z)
{
  if (trials == 0)
    throw std::invalid_argument("wilson_interval: zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // the endpoints at 0 and n successes are exactly 0 and 1; the subtraction
  // below leaves a rounding residue of order 1e-19 there
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size())
    throw std::invalid_argument("fit_line: size mismatch");
  if (x.size() < 2)
    throw std::invalid_argument("fit_line: need at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0)
    throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double mean(std::span<const double> v)
{
  if (v.empty())
    throw std::invalid_argument("mean: empty sample");
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double variance(std::span<const double> v)
{
  if (v.size() < 2)
    throw std::invalid_argument("variance: need at least two values");
  const double m = mean(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    sq[i] = (v[i] - m) * (v[i] - m);
  return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

double quantile(std::vector<double> v, double p)
{
  if (v.empty())
    throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_uniform(std::vector<double> v)
{
  if (v.empty())
    throw std::invalid_argument("ks_uniform: empty sample");
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = std::clamp(v[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

double binomial_two_sided_tail(std::size_t n, double p, double t)
{
  const boost::math::binomial_distribution<double> law(static_cast<double>(n), p);
  const double centre = static_cast<double>(n) * p;
  double total = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    // tolerance guards against k - np landing a rounding error below t
    if (std::abs(static_cast<double>(k) - centre) >= t - 1e-9)
      total += boost::math::pdf(law, static_cast<double>(k));
  }
  return std::min(total, 1.0);
}

std::string format_double(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

} // namespace fkr
