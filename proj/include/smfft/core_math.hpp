#pragma once

// Number-theoretic helpers, the wrapped Gaussian filter and the low-frequency
// window used by the sparse transform.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "smfft/errors.hpp"

namespace smfft {

using Index = std::uint64_t;
using Complex = std::complex<double>;
using DenseVector = std::vector<Complex>;

/// The one generator threaded through every randomized routine.
using Rng = std::mt19937_64;

inline Index mul_mod(Index a, Index b, Index m) {
  return static_cast<Index>(static_cast<unsigned __int128>(a) * b % m);
}

/// Multiplicative inverse of q modulo m via the extended Euclidean algorithm.
inline Index mod_inverse(Index q, Index m) {
  if (m == 0 || std::gcd(q, m) != 1) {
    throw NotCoprime("mod_inverse: " + std::to_string(q) + " is not invertible mod " +
                     std::to_string(m));
  }
  if (m == 1) return 0;
  __int128 r0 = static_cast<__int128>(m), r1 = static_cast<__int128>(q % m);
  __int128 t0 = 0, t1 = 1;
  while (r1 != 0) {
    const __int128 quot = r0 / r1;
    const __int128 r2 = r0 - quot * r1;
    r0 = r1;
    r1 = r2;
    const __int128 t2 = t0 - quot * t1;
    t0 = t1;
    t1 = t2;
  }
  if (t0 < 0) t0 += static_cast<__int128>(m);
  return static_cast<Index>(t0);
}

/// A multiplier Q coprime to M together with its inverse.
struct ModulusPair {
  Index q = 1;
  Index m = 2;
  Index q_inv = 1;

  static ModulusPair make(Index q, Index m) {
    if (m < 2 || q == 0 || q >= m) {
      throw NotCoprime("ModulusPair: need 0 < q < m, got q=" + std::to_string(q) +
                       " m=" + std::to_string(m));
    }
    return ModulusPair{q, m, mod_inverse(q, m)};
  }
};

/// Uniform draw from {q in [1, m) : gcd(q, m) = 1} by rejection.
inline Index sample_coprime(Index m, Rng& rng) {
  if (m < 2) return 1;
  std::uniform_int_distribution<Index> pick(1, m - 1);
  for (;;) {
    const Index q = pick(rng);
    if (std::gcd(q, m) == 1) return q;
  }
}

/// The `count` smallest primes strictly greater than r, ascending.
inline std::vector<Index> primes_greater_than(Index r, std::size_t count) {
  std::vector<Index> out;
  if (count == 0) return out;
  // Grow the sieve window until it holds enough primes.
  Index limit = std::max<Index>(
      64, r + static_cast<Index>(static_cast<double>(count) *
                                 (std::log(static_cast<double>(r + count) + 2.0) + 2.0)));
  for (;;) {
    std::vector<bool> composite(limit + 1, false);
    out.clear();
    for (Index i = 2; i <= limit; ++i) {
      if (composite[i]) continue;
      if (i > r) {
        out.push_back(i);
        if (out.size() == count) return out;
      }
      for (Index j = i * i; j <= limit; j += i) composite[j] = true;
    }
    limit *= 2;
  }
}

/// Parameters of the periodized Gaussian applied diagonally in sample space.
struct FilterSpec {
  double sigma = 1.0;
  Index modulus = 1;
  int wrap_terms = 2;
  Index bandwidth = 1;

  static FilterSpec make(double sigma, Index modulus, Index bandwidth) {
    // exp(-pi^2 sigma^2 H^2) < 1e-37 beyond the retained wraps.
    const double reach = std::sqrt(37.0 * std::log(10.0)) / (std::numbers::pi * sigma);
    return FilterSpec{sigma, modulus, 2 + static_cast<int>(std::ceil(reach)), bandwidth};
  }
};

/// g_sigma(m/M) = sqrt(pi) sigma sum_h exp(-pi^2 sigma^2 ((m + hM)/M)^2), with the
/// h-sum centered on the wrapped representative of m so small weights do not underflow.
inline double gaussian_filter_weight(Index m, const FilterSpec& spec) {
  const double big_m = static_cast<double>(spec.modulus);
  const double centered = (2 * m <= spec.modulus) ? static_cast<double>(m)
                                                   : static_cast<double>(m) - big_m;
  const double a = std::numbers::pi * spec.sigma / big_m;
  double sum = 0.0;
  // Smallest terms first.
  for (int h = spec.wrap_terms; h >= 1; --h) {
    const double up = a * (centered + h * big_m);
    const double down = a * (centered - h * big_m);
    sum += std::exp(-up * up) + std::exp(-down * down);
  }
  const double x = a * centered;
  sum += std::exp(-x * x);
  return std::sqrt(std::numbers::pi) * spec.sigma * sum;
}

/// A(K; M) = { n in [0, M) : n <= K/2 or |n - M| < K/2 }, ascending.
inline std::vector<Index> alias_window(Index k, Index m) {
  std::vector<Index> out;
  if (k >= m) {
    out.resize(m);
    std::iota(out.begin(), out.end(), Index{0});
    return out;
  }
  for (Index n = 0; 2 * n <= k; ++n) out.push_back(n);
  // 2(M - n) < K  <=>  n > M - K/2
  Index first_high = m - (k + 1) / 2 + 1;
  first_high = std::max(first_high, out.back() + 1);
  for (Index n = first_high; n < m; ++n) out.push_back(n);
  return out;
}

}  // namespace smfft
