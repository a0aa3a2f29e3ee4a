#pragma once

#include <cstdint>
#include <vector>

namespace treespike::stats {

/// Streaming mean and variance (Welford). Merging is exact up to rounding.
class Welford {
 public:
  void add(double x);
  void merge(const Welford& other);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;        // unbiased; 0 for fewer than two values
  double standard_error() const;  // sqrt(variance / n)

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// 3-sigma half width used for every Monte Carlo interval in the toolkit.
inline constexpr double kZ = 3.0;

/// Normal-approximation half width for a proportion.
double proportion_half_width(std::uint64_t successes, std::uint64_t n, double z = kZ);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution evaluated at sqrt(n m / (n + m)) D (with the usual small-sample
/// correction). Ties are handled by stepping through equal values together.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q(x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_q(double x);

/// Total variation distance between two probability vectors of equal length.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace treespike::stats
