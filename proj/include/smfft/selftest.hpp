#pragma once

// Oracle-scale property battery: number-theoretic lemmas behind the shuffle
// and the prime measurements, rank-1 lattice exactness, contraction statistics
// of the measurement system, and end-to-end agreement with a dense transform.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "smfft/bench.hpp"
#include "smfft/core_math.hpp"
#include "smfft/md_transform.hpp"
#include "smfft/signal.hpp"
#include "smfft/support_recovery.hpp"
#include "smfft/value_recovery.hpp"

namespace smfft {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Replaceable pieces, so that mutation checks can confirm the suites bite.
struct SelftestHooks {
  Index (*mod_inverse)(Index, Index) = &smfft::mod_inverse;
};

namespace detail {

inline double largest_deviation_from_identity(std::vector<std::vector<double>> a) {
  // Cyclic Jacobi on a small symmetric matrix; returns max |1 - lambda|.
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(1.0 - a[i][i]));
  return worst;
}

template <class F>
SuiteResult timed_suite(const std::string& name, F&& body) {
  SuiteResult result;
  result.name = name;
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream detail;
  try {
    result.passed = body(detail);
  } catch (const std::exception& e) {
    result.passed = false;
    detail << "exception: " << e.what();
  }
  result.detail = detail.str();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace detail

/// n -> n Q mod M is a bijection undone by Q^{-1}, for every M <= 200 and unit Q.
inline SuiteResult suite_isomorphism(const SelftestHooks& hooks = {}) {
  return detail::timed_suite("isomorphism", [&](std::ostream& why) {
    for (Index m = 2; m <= 200; ++m) {
      std::vector<char> hit(m);
      for (Index q = 1; q < m; ++q) {
        if (std::gcd(q, m) != 1) continue;
        const Index q_inv = hooks.mod_inverse(q, m);
        std::fill(hit.begin(), hit.end(), 0);
        for (Index n = 0; n < m; ++n) {
          const Index image = n * q % m;
          if (hit[image]++ || image * q_inv % m != n) {
            why << "M=" << m << " Q=" << q;
            return false;
          }
        }
      }
    }
    why << "M <= 200 exhaustive";
    return true;
  });
}

/// (1/M) sum_n exp(2 pi i m n / M) f_{nQ mod M} = fhat_{m Q^{-1} mod M} for M <= 64.
inline SuiteResult suite_hash_identity(std::uint64_t seed, const SelftestHooks& hooks = {}) {
  return detail::timed_suite("hash_identity", [&](std::ostream& why) {
    Rng rng(seed);
    std::uniform_real_distribution<double> amp(0.0, 1.0);
    double worst = 0.0;
    for (Index m_size = 2; m_size <= 64; ++m_size) {
      std::vector<double> fhat(m_size);
      for (auto& v : fhat) v = amp(rng);
      DenseVector f(fhat.begin(), fhat.end());
      dft(f, Direction::forward).swap(f);
      const Index q = sample_coprime(m_size, rng);
      const Index q_inv = hooks.mod_inverse(q, m_size);
      for (Index m = 0; m < m_size; ++m) {
        Complex acc{};
        for (Index n = 0; n < m_size; ++n) {
          const double angle = 2.0 * std::numbers::pi * static_cast<double>(m * n % m_size) / static_cast<double>(m_size);
          acc += Complex(std::cos(angle), std::sin(angle)) * f[n * q % m_size];
        }
        acc /= static_cast<double>(m_size);
        worst = std::max(worst, std::abs(acc - fhat[m * q_inv % m_size]));
      }
    }
    why << "max deviation " << worst;
    return worst <= 1e-10;
  });
}

/// T > log_R N primes above R separate every pair in [0, N), N = 2^14.
inline SuiteResult suite_crt_separation() {
  return detail::timed_suite("crt_separation", [&](std::ostream& why) {
    const Index n = Index{1} << 14;
    for (Index r = 2; r <= 16; ++r) {
      const auto t = static_cast<std::size_t>(std::floor(std::log(double(n)) / std::log(double(r)) + 1e-9)) + 1;
      const auto primes = primes_greater_than(r, t);
      std::set<std::vector<Index>> seen;
      for (Index i = 0; i < n; ++i) {
        std::vector<Index> tuple;
        for (Index p : primes) tuple.push_back(i % p);
        if (!seen.insert(std::move(tuple)).second) {
          why << "collision at R=" << r << " i=" << i;
          return false;
        }
      }
    }
    why << "R = 2..16, N = 2^14";
    return true;
  });
}

/// Rank-1 quadrature equals the tensor-grid transform for every coefficient, M <= 8, d <= 3.
inline SuiteResult suite_rank1_exactness(std::uint64_t seed) {
  return detail::timed_suite("rank1_exactness", [&](std::ostream& why) {
    Rng rng(seed);
    std::uniform_real_distribution<double> amp(0.1, 1.0);
    double worst = 0.0;
    for (int d = 1; d <= 3; ++d) {
      for (Index m = 1; m <= 8; ++m) {
        const RankOneLattice lat = RankOneLattice::make(d, m);
        MdSpectrum s{lat, {}};
        for (Index i = 0; i < lat.total; ++i) s.set(unflatten_index(i, lat), amp(rng));
        // f at each lattice point, evaluated geometrically.
        DenseVector f(lat.total);
        for (Index n = 0; n < lat.total; ++n) {
          const LatticePoint x = lattice_point(n, lat);
          for (const auto& [k, v] : s.entries) {
            double phase = 0.0;
            for (int i = 0; i < d; ++i) phase += static_cast<double>(k[i] * x.numerators[i] % x.denominator);
            const double angle = -2.0 * std::numbers::pi * phase / static_cast<double>(x.denominator);
            f[n] += v * Complex(std::cos(angle), std::sin(angle));
          }
        }
        const DenseVector tensor = dense_md_coefficients(dense_md_samples(s), lat);
        for (Index flat = 0; flat < lat.total; ++flat) {
          const MultiIndex j = unflatten_index(flat, lat);
          Complex acc{};
          for (Index n = 0; n < lat.total; ++n) {
            const LatticePoint x = lattice_point(n, lat);
            double phase = 0.0;
            for (int i = 0; i < d; ++i) phase += static_cast<double>(j[i] * x.numerators[i] % x.denominator);
            const double angle = 2.0 * std::numbers::pi * phase / static_cast<double>(x.denominator);
            acc += Complex(std::cos(angle), std::sin(angle)) * f[n];
          }
          acc /= static_cast<double>(lat.total);
          worst = std::max(worst, std::abs(acc - tensor[flat]));
        }
      }
    }
    why << "max deviation " << worst;
    return worst <= 1e-10;
  });
}

/// P(||I - (1/T) B^* B|| > 1/2) <= 1/2 + 3 sigma over 200 draws, T = 4, R <= 16, N <= 2^14.
inline SuiteResult suite_contraction(std::uint64_t seed) {
  return detail::timed_suite("contraction", [&](std::ostream& why) {
    Rng rng(seed);
    const int draws = 200;
    int bad = 0;
    std::uniform_int_distribution<Index> pick_r(2, 16);
    for (int i = 0; i < draws; ++i) {
      const Index r = pick_r(rng);
      const auto support = SparseSpectrum::random(Index{1} << 14, r, 1.0, 1.0, rng).support();
      const auto pool = prime_pool(r, Index{1} << 14);
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      std::vector<Index> primes;
      for (int t = 0; t < kMeasurementBlocks; ++t) primes.push_back(pool[pick(rng)]);
      std::vector<std::vector<double>> a(r, std::vector<double>(r, 0.0));
      for (Index p : primes) {
        for (Index x = 0; x < r; ++x) {
          for (Index y = 0; y < r; ++y) a[x][y] += (support[x] % p == support[y] % p) ? 1.0 : 0.0;
        }
      }
      for (auto& row : a) {
        for (auto& v : row) v /= kMeasurementBlocks;
      }
      bad += detail::largest_deviation_from_identity(std::move(a)) > 0.5;
    }
    const double rate = static_cast<double>(bad) / draws;
    const double limit = 0.5 + 3.0 * std::sqrt(0.25 / draws);
    why << "non-contracting draws " << bad << "/" << draws << " (limit " << limit << ")";
    return rate <= limit;
  });
}

/// Noiseless recovery agrees with a dense transform on small 1-D and 2-D problems.
inline SuiteResult suite_oracle_equivalence(std::uint64_t seed) {
  return detail::timed_suite("oracle_equivalence", [&](std::ostream& why) {
    SupportParams params;
    params.r_bound = 8;
    params.p_fail = 1e-2;
    int good = 0, runs = 0;
    for (auto [d, m] : {std::pair{1, Index{4096}}, std::pair{2, Index{32}}}) {
      for (int t = 0; t < 20; ++t, ++runs) {
        const SignalSpec signal = random_signal(d, m, params.r_bound, 0.0, seed + static_cast<std::uint64_t>(runs));
        const RunReport report = run_recovery(signal, params, seed ^ static_cast<std::uint64_t>(runs));
        good += relative_l2_error(report.recovered, dense_reference(signal.spectrum)) <= 1e-8;
      }
    }
    why << good << "/" << runs << " runs within 1e-8";
    return good >= runs - 2;
  });
}

/// Every ladder step keeps the true aliased support (noiseless).
inline SuiteResult suite_support_soundness(std::uint64_t seed) {
  return detail::timed_suite("support_soundness", [&](std::ostream& why) {
    SupportParams params;
    params.r_bound = 8;
    Rng rng(seed);
    for (int t = 0; t < 20; ++t) {
      const SparseSpectrum s = SparseSpectrum::random(Index{1} << 16, 8, 0.5, 1.5, rng);
      Sampler sampler(s);
      const SupportResult res = find_support(sampler, Index{1} << 16, params, rng);
      for (const SupportSets& step : res.steps) {
        for (Index j : s.support()) {
          if (std::find(step.aliased.begin(), step.aliased.end(), j % step.modulus) == step.aliased.end()) {
            why << "lost " << j << " at M_k=" << step.modulus;
            return false;
          }
        }
      }
    }
    why << "20 runs, N = 2^16, R = 8";
    return true;
  });
}

inline std::vector<SuiteResult> run_selftest(std::uint64_t seed, const SelftestHooks& hooks = {}) {
  return {suite_isomorphism(hooks),        suite_hash_identity(seed, hooks), suite_crt_separation(),
          suite_rank1_exactness(seed),     suite_contraction(seed),         suite_oracle_equivalence(seed),
          suite_support_soundness(seed)};
}

}  // namespace smfft
