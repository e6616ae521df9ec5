#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "hyptree/configuration.hpp"
#include "hyptree/rng.hpp"

namespace hyptree {

/// Error of the four point condition for one quadruple: with the three
/// pairing sums d01+d23, d02+d13, d03+d12 sorted S1 >= S2 >= S3, returns
/// (S1 - S2) / 2 — the smallest delta making the quadruple delta-hyperbolic.
/// Zero exactly when the quadruple comes from a tree metric.
inline double four_point_delta(const Eigen::Matrix4d& d) {
  std::array<double, 3> s = {d(0, 1) + d(2, 3), d(0, 2) + d(1, 3),
                             d(0, 3) + d(1, 2)};
  std::sort(s.begin(), s.end(), std::greater<>());
  return (s[0] - s[1]) / 2.0;
}

struct DeltaSample {
  double delta = 0.0;
  std::array<int, 4> quad = {0, 1, 2, 3}; // indices attaining the maximum
};

/// Maximum four-point delta over sampled quadruples of an n-point metric.
/// Enumerates all C(n,4) quadruples when that count does not exceed
/// n_samples; otherwise draws n_samples random quadruples (sampling keeps
/// the diagnostic tractable once C(n,4) explodes). Deterministic given seed.
inline DeltaSample sampled_delta_report(const Eigen::MatrixXd& dist,
                                        long n_samples, std::uint64_t seed) {
  const int n = static_cast<int>(dist.rows());
  if (n < 4) throw std::domain_error("sampled_delta: need at least 4 points");
  if (n_samples < 1) throw std::domain_error("sampled_delta: need n_samples >= 1");

  auto delta_of = [&](int a, int b, int c, int e) {
    std::array<double, 3> s = {dist(a, b) + dist(c, e), dist(a, c) + dist(b, e),
                               dist(a, e) + dist(b, c)};
    std::sort(s.begin(), s.end(), std::greater<>());
    return (s[0] - s[1]) / 2.0;
  };

  DeltaSample best;
  best.delta = -1.0;
  auto consider = [&](int a, int b, int c, int e) {
    const double delta = delta_of(a, b, c, e);
    if (delta > best.delta) best = DeltaSample{delta, {a, b, c, e}};
  };

  const double total = static_cast<double>(n) * (n - 1) * (n - 2) * (n - 3) / 24.0;
  if (total <= static_cast<double>(n_samples)) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = b + 1; c < n; ++c)
          for (int e = c + 1; e < n; ++e) consider(a, b, c, e);
  } else {
    Rng rng(seed);
    std::array<int, 4> q{};
    for (long s = 0; s < n_samples; ++s) {
      int filled = 0;
      while (filled < 4) {
        const int cand = static_cast<int>(rng.uniform_int(n));
        bool dup = false;
        for (int k = 0; k < filled; ++k) dup = dup || q[k] == cand;
        if (!dup) q[filled++] = cand;
      }
      consider(q[0], q[1], q[2], q[3]);
    }
  }
  return best;
}

inline DeltaSample sampled_delta_report(const PointConfiguration& config,
                                        long n_samples, std::uint64_t seed) {
  if (config.size() < 4)
    throw std::domain_error("sampled_delta: need at least 4 points");
  return sampled_delta_report(config_distances(config).d, n_samples, seed);
}

/// Monte Carlo estimate of the configuration's delta-hyperbolicity.
inline double sampled_delta(const PointConfiguration& config, long n_samples,
                            std::uint64_t seed) {
  return sampled_delta_report(config, n_samples, seed).delta;
}

inline double sampled_delta(const DistanceMatrix& dm, long n_samples,
                            std::uint64_t seed) {
  return sampled_delta_report(dm.d, n_samples, seed).delta;
}

}  // namespace hyptree
