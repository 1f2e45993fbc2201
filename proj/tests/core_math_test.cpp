#include "smfft/core_math.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

namespace smfft {
namespace {

Index brute_inverse(Index q, Index m) {
  for (Index r = 1; r < m; ++r) {
    if (q * r % m == 1) return r;
  }
  return 0;
}

TEST(ModInverse, MatchesExhaustiveSearch) {
  EXPECT_EQ(brute_inverse(13, 40), 37u);
  EXPECT_EQ(mod_inverse(13, 40), 37u);
  for (Index m = 2; m <= 120; ++m) {
    for (Index q = 1; q < m; ++q) {
      if (std::gcd(q, m) != 1) continue;
      ASSERT_EQ(mod_inverse(q, m), brute_inverse(q, m)) << q << " mod " << m;
    }
  }
}

TEST(ModInverse, IdentityAndErrors) {
  for (Index m : {2u, 3u, 17u, 1000u}) EXPECT_EQ(mod_inverse(1, m), 1u);
  EXPECT_THROW(mod_inverse(2, 4), NotCoprime);
  EXPECT_THROW(ModulusPair::make(6, 9), NotCoprime);
}

TEST(ModInverse, LargeModulus) {
  const Index m = (Index{1} << 61) - 1;  // prime
  const Index q = 123456789012345ull;
  const Index inv = mod_inverse(q, m);
  EXPECT_EQ(mul_mod(q, inv, m), 1u);
  const ModulusPair pair = ModulusPair::make(q, m);
  EXPECT_EQ(pair.q_inv, inv);
}

TEST(SampleCoprime, StaysInCoprimeResidues) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Index a = sample_coprime(4, rng);
    EXPECT_TRUE(a == 1 || a == 3);
    const Index b = sample_coprime(7, rng);
    EXPECT_GE(b, 1u);
    EXPECT_LE(b, 6u);
  }
}

TEST(SampleCoprime, UniformOverUnitsOfTwelve) {
  Rng rng(11);
  std::map<Index, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_coprime(12, rng)];
  ASSERT_EQ(counts.size(), 4u);
  // Each of {1, 5, 7, 11} is Binomial(n, 1/4); 3 sigma band.
  const double mean = draws / 4.0;
  const double sd = std::sqrt(draws * 0.25 * 0.75);
  double chi2 = 0.0;
  for (Index u : {1u, 5u, 7u, 11u}) {
    EXPECT_NEAR(counts[u], mean, 3 * sd) << u;
    chi2 += (counts[u] - mean) * (counts[u] - mean) / mean;
  }
  // chi-square with 3 dof, 99.9% quantile
  EXPECT_LT(chi2, 16.27);
}

TEST(SampleCoprime, DeterministicGivenSeed) {
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_coprime(1000003, a), sample_coprime(1000003, b));
}

TEST(Primes, FirstPrimesAbove) {
  EXPECT_EQ(primes_greater_than(5, 4), (std::vector<Index>{7, 11, 13, 17}));
  EXPECT_EQ(primes_greater_than(1, 3), (std::vector<Index>{2, 3, 5}));
  EXPECT_EQ(primes_greater_than(50, 1), (std::vector<Index>{53}));
  const auto many = primes_greater_than(1000, 2000);
  ASSERT_EQ(many.size(), 2000u);
  EXPECT_EQ(many.front(), 1009u);
  for (Index p : many) {
    for (Index d = 2; d * d <= p; ++d) ASSERT_NE(p % d, 0u) << p;
  }
  EXPECT_TRUE(std::is_sorted(many.begin(), many.end()));
}

double wide_reference(Index m, double sigma, Index big_m) {
  double sum = 0.0;
  for (int h = -100; h <= 100; ++h) {
    const double x = std::numbers::pi * sigma * (static_cast<double>(m) + h * static_cast<double>(big_m)) /
                     static_cast<double>(big_m);
    sum += std::exp(-x * x);
  }
  return std::sqrt(std::numbers::pi) * sigma * sum;
}

TEST(GaussianFilter, AgreesWithWideTruncation) {
  const FilterSpec spec = FilterSpec::make(1.0, 10, 10);
  EXPECT_NEAR(gaussian_filter_weight(0, spec), wide_reference(0, 1.0, 10), 1e-14);
  for (double sigma : {0.05, 0.3, 1.0, 4.0, 40.0}) {
    const FilterSpec s = FilterSpec::make(sigma, 64, 16);
    for (Index m = 0; m < 64; ++m) {
      const double ref = wide_reference(m, sigma, 64);
      ASSERT_NEAR(gaussian_filter_weight(m, s), ref, 1e-14 * std::max(1.0, ref)) << sigma << " " << m;
    }
  }
}

TEST(GaussianFilter, DominantTermLimit) {
  // Wrapped copies are exp(-pi^2 sigma^2 h^2) relative; negligible for sigma = 20.
  const FilterSpec spec = FilterSpec::make(20.0, 1 << 20, 1024);
  EXPECT_NEAR(gaussian_filter_weight(0, spec), std::sqrt(std::numbers::pi) * 20.0, 1e-15 * 40.0);
}

TEST(GaussianFilter, SymmetricAndPositive) {
  for (double sigma : {0.2, 2.0, 300.0}) {
    const FilterSpec spec = FilterSpec::make(sigma, 1000, 100);
    for (Index m = 1; m < 1000; ++m) {
      const double a = gaussian_filter_weight(m, spec);
      const double b = gaussian_filter_weight(1000 - m, spec);
      ASSERT_NEAR(a, b, 1e-15 * std::max(a, 1e-300));
      // Positive wherever the dominant term is representable.
      const double x = std::numbers::pi * sigma * static_cast<double>(std::min<Index>(m, 1000 - m)) / 1000.0;
      if (x < 20.0) ASSERT_GT(a, 0.0) << sigma << " " << m;
    }
  }
}

std::vector<Index> window_by_definition(Index k, Index m) {
  std::vector<Index> out;
  for (Index n = 0; n < m; ++n) {
    const double dn = static_cast<double>(n);
    const double half = static_cast<double>(k) / 2.0;
    if (dn <= half || std::abs(dn - static_cast<double>(m)) < half) out.push_back(n);
  }
  return out;
}

TEST(AliasWindow, MatchesDefinition) {
  EXPECT_EQ(alias_window(4, 10), (std::vector<Index>{0, 1, 2, 9}));
  EXPECT_EQ(alias_window(1, 8), (std::vector<Index>{0}));
  for (Index m = 1; m <= 40; ++m) {
    for (Index k = 1; k <= m; ++k) ASSERT_EQ(alias_window(k, m), window_by_definition(k, m)) << k << " " << m;
  }
}

TEST(AliasWindow, FullAndFoldsOntoDistinctSlots) {
  const auto full = alias_window(12, 12);
  ASSERT_EQ(full.size(), 12u);
  for (Index i = 0; i < 12; ++i) EXPECT_EQ(full[i], i);
  // When K | M the window has exactly K elements, one per residue mod K.
  for (Index k : {5u, 8u, 13u, 64u}) {
    const auto w = alias_window(k, 8 * k);
    ASSERT_EQ(w.size(), k);
    std::set<Index> slots;
    for (Index n : w) slots.insert(n % k);
    EXPECT_EQ(slots.size(), k);
  }
}

// Appendix-style lemmas at oracle scale.
TEST(Lemmas, MultiplicationByUnitIsBijection) {
  for (Index m = 1; m <= 200; ++m) {
    for (Index q = 1; q <= m; ++q) {
      if (std::gcd(q, m) != 1) continue;
      std::vector<bool> hit(m, false);
      for (Index n = 0; n < m; ++n) hit[n * q % m] = true;
      ASSERT_TRUE(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; })) << q << " " << m;
    }
  }
}

TEST(Lemmas, CrtSeparation) {
  // T > log_R(N) primes above R: residue tuples are distinct over [0, N).
  const Index n = 1 << 14;
  for (Index r = 2; r <= 16; ++r) {
    const auto t = static_cast<std::size_t>(std::floor(std::log(double(n)) / std::log(double(r)))) + 1;
    const auto primes = primes_greater_than(r, t);
    std::set<std::vector<Index>> seen;
    for (Index i = 0; i < n; ++i) {
      std::vector<Index> tuple;
      for (Index p : primes) tuple.push_back(i % p);
      ASSERT_TRUE(seen.insert(tuple).second) << "R=" << r << " collision at " << i;
    }
  }
}

TEST(Lemmas, HashIdentity) {
  // (1/M) sum_n exp(2 pi i m n / M) f_{nQ mod M} = fhat_{m Q^{-1} mod M}, with f_n = sum_j exp(-2 pi i n j / M) fhat_j.
  Rng rng(13);
  std::uniform_real_distribution<double> amp(0.0, 1.0);
  for (Index m_size = 1; m_size <= 64; ++m_size) {
    std::vector<double> fhat(m_size);
    for (auto& v : fhat) v = amp(rng);
    std::vector<Complex> f(m_size);
    for (Index n = 0; n < m_size; ++n) {
      for (Index j = 0; j < m_size; ++j) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(n * j % m_size) / static_cast<double>(m_size);
        f[n] += fhat[j] * Complex(std::cos(angle), std::sin(angle));
      }
    }
    const Index q = sample_coprime(m_size, rng);
    const Index q_inv = mod_inverse(q, m_size);
    for (Index m = 0; m < m_size; ++m) {
      Complex acc{};
      for (Index n = 0; n < m_size; ++n) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(m * n % m_size) / static_cast<double>(m_size);
        acc += Complex(std::cos(angle), std::sin(angle)) * f[n * q % m_size];
      }
      acc /= static_cast<double>(m_size);
      ASSERT_NEAR(std::abs(acc - fhat[m * q_inv % m_size]), 0.0, 1e-10) << m_size << " " << m;
    }
  }
}

TEST(Lemmas, ShuffleSpread) {
  // P(|jQ mod M| <= C) for uniform units Q stays within c C/M log log M.
  Rng rng(19);
  for (Index m : {1024u, 3000u, 65536u}) {
    const double c_width = 8.0;
    const double bound = 4.0 * (2.0 * c_width + 1.0) / static_cast<double>(m) *
                         std::log(std::log(static_cast<double>(m)));
    for (Index j : {1u, 7u, 12u, 512u}) {
      int hits = 0;
      const int draws = 20000;
      for (int i = 0; i < draws; ++i) {
        const Index v = mul_mod(j, sample_coprime(m, rng), m);
        hits += std::min(v, m - v) <= static_cast<Index>(c_width);
      }
      EXPECT_LE(static_cast<double>(hits) / draws, bound) << m << " " << j;
    }
  }
}

}  // namespace
}  // namespace smfft
