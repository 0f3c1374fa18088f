#include "duphist/model/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "duphist/core/errors.hpp"

namespace duphist {

double geometric_log_pmf(double mean, long k) {
  if (!(mean >= 1.0)) throw DomainError("geometric mean must be >= 1");
  if (k < 1) throw DomainError("geometric support starts at 1");
  const double p = 1.0 / mean;
  if (k == 1) return std::log(p);
  if (p == 1.0) return neg_inf;
  return static_cast<double>(k - 1) * std::log1p(-p) + std::log(p);
}

double poisson_log_pmf(double lambda, double ell, long k) {
  if (lambda < 0.0 || ell < 0.0 || k < 0) throw DomainError("poisson arguments must be non-negative");
  const double mu = lambda * ell;
  if (mu == 0.0) return k == 0 ? 0.0 : neg_inf;
  const auto kd = static_cast<double>(k);
  return kd * std::log(mu) - mu - std::lgamma(kd + 1.0);
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return neg_inf;
  double m = *std::max_element(xs.begin(), xs.end());
  if (m == neg_inf) return neg_inf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace duphist
