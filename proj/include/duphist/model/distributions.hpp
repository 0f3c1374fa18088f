#pragma once

#include <limits>
#include <span>

namespace duphist {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// Geometric on {1, 2, ...} with success probability 1/mean.
double geometric_log_pmf(double mean, long k);

// (lambda*ell)^k exp(-lambda*ell) / k!
double poisson_log_pmf(double lambda, double ell, long k);

double log_sum_exp(std::span<const double> xs);

}  // namespace duphist
