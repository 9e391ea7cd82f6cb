#pragma once

#include <span>
#include <vector>

namespace qsd {

inline constexpr double kAgrestiCoullZ = 1.96;

/// Empirical survival P[tau > t] on a time grid with Agresti-Coull intervals.
struct SurvivalCurve {
  std::vector<double> times;
  std::vector<long> survivors;
  std::vector<double> p;
  std::vector<double> lower;
  std::vector<double> upper;
  long total = 0;
};

SurvivalCurve survival_curve(std::span<const double> taus, std::span<const double> times,
                             double z = kAgrestiCoullZ);

/// Empirical quantile (linear interpolation) of an unsorted sample.
double quantile(std::span<const double> xs, double q);

/// `count` evenly spaced times between t_lo and t_hi inclusive.
std::vector<double> linspace(double t_lo, double t_hi, int count);

}  // namespace qsd
