#pragma once

#include <functional>
#include <span>
#include <vector>

namespace apsim {

double normal_cdf(double x);

/// CDF of |N(0, variance)|.
double half_normal_cdf(double x, double variance = 1.0);

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Total-variation distance between two probability vectors of equal length.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace apsim
