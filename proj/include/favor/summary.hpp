#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace favor {

// Pairwise (tree) summation. The reduction tree depends only on the length,
// so the result is reproducible regardless of how the values were produced.
double pairwise_sum(std::span<const double> values);

double pairwise_mean(std::span<const double> values);

// Unbiased sample variance about the given center-free sample mean.
double sample_variance(std::span<const double> values);

double median(std::vector<double> values);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

// Runs body(i) for i in [0, n) on up to `threads` workers, each taking a
// contiguous slice. With threads <= 1 everything runs on the caller.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace favor
