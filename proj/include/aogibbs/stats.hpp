#pragma once

#include "aogibbs/types.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>
#include <thread>
#include <vector>

namespace aogibbs {

/// Mean of iid values with the usual standard error.
inline Estimate mean_estimate(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n == 0) throw std::invalid_argument("mean_estimate: no samples");
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0, 1};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)), n};
}

/// Mean of a correlated series; the error comes from the spread of `batches` contiguous batch means.
inline Estimate batch_mean(const std::vector<double>& xs, int batches = 20) {
  const std::size_t n = xs.size();
  if (n == 0) throw std::invalid_argument("batch_mean: no samples");
  const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(std::max(batches, 2)), n);
  const std::size_t len = n / b;
  if (len == 0 || b < 2) return mean_estimate(xs);
  std::vector<double> means(b);
  for (std::size_t k = 0; k < b; ++k) {
    means[k] = std::accumulate(xs.begin() + k * len, xs.begin() + (k + 1) * len, 0.0) / static_cast<double>(len);
  }
  Estimate e = mean_estimate(means);
  e.value = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  e.n_samples = n;
  return e;
}

/// Worker count: explicit value if positive, else AO_GIBBS_THREADS, else 1.
int resolve_threads(int requested);

/// Runs f(i) for i in [0, n) on up to `threads` workers. Results must be written by index
/// so that the outcome does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

}  // namespace aogibbs
