#include "qsd/survival.hpp"

#include "qsd/types.hpp"

#include <algorithm>
#include <cmath>

namespace qsd {

SurvivalCurve survival_curve(std::span<const double> taus, std::span<const double> times,
                             double z) {
  std::vector<double> sorted(taus.begin(), taus.end());
  std::sort(sorted.begin(), sorted.end());

  SurvivalCurve c;
  c.total = static_cast<long>(sorted.size());
  const double m = static_cast<double>(c.total);
  const double z2 = z * z;
  for (double t : times) {
    const long n = static_cast<long>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
    const double n_tilde = m + z2;
    const double p_tilde = (static_cast<double>(n) + 0.5 * z2) / n_tilde;
    const double half = z * std::sqrt(p_tilde * (1.0 - p_tilde) / n_tilde);
    c.times.push_back(t);
    c.survivors.push_back(n);
    c.p.push_back(c.total > 0 ? static_cast<double>(n) / m : 0.0);
    c.lower.push_back(p_tilde - half);
    c.upper.push_back(p_tilde + half);
  }
  return c;
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw Error("quantile of an empty sample");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

std::vector<double> linspace(double t_lo, double t_hi, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {t_lo};
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(t_lo + (t_hi - t_lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

}  // namespace qsd
