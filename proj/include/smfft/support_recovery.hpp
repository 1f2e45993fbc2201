#pragma once

// Support recovery for nonnegative sparse spectra.
//
// The support is found coarse-to-fine along a ladder of moduli
// M_1 = K, M_{k+1} = rho_k M_k, ..., N'. At M_1 the aliased spectrum is
// computed directly with a size-K transform. Every later step lifts the
// previous aliased support into rho_k translated candidates and prunes them
// with L rounds of shuffle -> Gaussian filter -> size-K transform -> threshold.
// Nonnegativity makes the pruning one-sided: a true aliased frequency always
// survives, an empty one survives a round with probability about alpha.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "smfft/core_math.hpp"
#include "smfft/dft.hpp"
#include "smfft/errors.hpp"
#include "smfft/signal.hpp"

namespace smfft {

struct SupportParams {
  Index r_bound = 50;        // R, upper bound on the support size
  double alpha = 0.15;       // filter parameter, per-round false-positive rate
  double delta = 0.1;        // threshold parameter
  int rho = 2;               // largest ladder factor
  double p_fail = 1e-4;      // target failure probability
  double mu = 0.5;           // estimate of the smallest nonzero amplitude
  double delta_ratio = 3.0;  // estimate of max amplitude / mu
  double eta = 0.0;          // noise level, 0 for exact samples
  double accuracy = 1e-12;   // value-solve target when eta == 0
  double window_factor = 2.0;  // C in K = C * K_0; 2 makes the filter tail <= delta/(2 Delta)
  Index k_override = 0;      // nonzero replaces the bandwidth formula

  void validate() const {
    auto fail = [](const std::string& what) { throw Error("SupportParams: " + what); };
    if (r_bound < 1) fail("r_bound must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
    if (rho < 2 || rho > 16) fail("rho must lie in [2, 16]");
    if (!(p_fail > 0.0 && p_fail < 1.0)) fail("p must lie in (0, 1)");
    if (!(mu > 0.0)) fail("mu must be positive");
    if (!(delta_ratio >= 1.0)) fail("delta_ratio must be >= 1");
    if (!(eta >= 0.0)) fail("eta must be nonnegative");
    if (eta > delta * mu / 2.0) fail("noise level must satisfy eta <= delta*mu/2");
    if (!(accuracy > 0.0 && accuracy < 1.0)) fail("accuracy must lie in (0, 1)");
    if (!(window_factor >= 1.0)) fail("window_factor must be >= 1");
  }
};

/// K = ceil(C * max{8, 2/alpha}/pi * R * sqrt(log(2 R Delta/delta) log(2 Delta/delta))).
///
/// With sigma from filter_sigma, the window A(K; M_k) ends where the sample-space
/// Gaussian has decayed to exp(-(C/2)^2 log(2 Delta/delta)). C = 1 leaves a
/// leakage of order 0.3 max|fhat| in every probe, far above the threshold;
/// C = 2 brings it below delta/(2 Delta) max|fhat|.
inline Index base_bandwidth(const SupportParams& p) {
  if (p.k_override != 0) return p.k_override;
  const double r = static_cast<double>(p.r_bound);
  const double lead = std::max(8.0, 2.0 / p.alpha) / std::numbers::pi;
  const double logs = std::log(2.0 * r * p.delta_ratio / p.delta) *
                      std::log(2.0 * p.delta_ratio / p.delta);
  return static_cast<Index>(std::ceil(p.window_factor * lead * r * std::sqrt(logs)));
}

/// Frequency-domain Gaussian width at modulus M_k.
inline double filter_sigma(Index m_k, const SupportParams& p) {
  const double r = static_cast<double>(p.r_bound);
  return p.alpha * (static_cast<double>(m_k) / (2.0 * r)) /
         std::sqrt(std::log(2.0 * r * p.delta_ratio / p.delta));
}

/// L = ceil(log_alpha(p)).
inline int probe_rounds(const SupportParams& p) {
  return std::max(1, static_cast<int>(std::ceil(std::log(p.p_fail) / std::log(p.alpha))));
}

/// delta*mu/2 for exact samples, delta*mu/4 under noise.
inline double detection_threshold(const SupportParams& p) {
  return p.eta > 0.0 ? p.delta * p.mu / 4.0 : p.delta * p.mu / 2.0;
}

struct LadderPlan {
  Index k_base = 1;
  std::vector<int> factors;    // rho_1..rho_P, each in [2, rho]
  Index n_padded = 1;          // K * prod(factors)
  std::vector<Index> moduli;   // K, rho_1 K, ..., n_padded
};

namespace detail {

inline void smooth_search(const std::vector<Index>& primes, std::size_t from, Index value,
                          Index target, Index& best) {
  if (value >= target) {
    best = std::min(best, value);
    return;
  }
  for (std::size_t i = from; i < primes.size(); ++i) {
    const auto next = static_cast<unsigned __int128>(value) * primes[i];
    if (next >= best) continue;
    smooth_search(primes, i, static_cast<Index>(next), target, best);
  }
}

}  // namespace detail

/// Smallest N' = K * prod(rho_i) >= requested_n with every rho_i in [2, rho].
inline LadderPlan plan_ladder(Index requested_n, Index k_base, int rho) {
  if (k_base == 0) throw Error("plan_ladder: K must be positive");
  if (rho < 2) throw Error("plan_ladder: rho must be >= 2");
  LadderPlan plan;
  plan.k_base = k_base;
  const Index target = (requested_n + k_base - 1) / k_base;

  std::vector<Index> primes;
  for (Index q = 2; q <= static_cast<Index>(rho); ++q) {
    bool prime = true;
    for (Index d = 2; d * d <= q; ++d) prime = prime && (q % d != 0);
    if (prime) primes.push_back(q);
  }
  Index product = 1;
  if (target > 1) {
    product = std::bit_ceil(target);
    detail::smooth_search(primes, 0, 1, target, product);
  }

  // First-fit decreasing packing of the prime factors into factors <= rho.
  std::vector<Index> prime_factors;
  Index rest = product;
  for (auto it = primes.rbegin(); it != primes.rend(); ++it) {
    while (rest % *it == 0) {
      prime_factors.push_back(*it);
      rest /= *it;
    }
  }
  std::vector<Index> packed;
  for (Index q : prime_factors) {
    auto slot = std::find_if(packed.begin(), packed.end(),
                             [&](Index f) { return f * q <= static_cast<Index>(rho); });
    if (slot == packed.end()) {
      packed.push_back(q);
    } else {
      *slot *= q;
    }
  }
  std::sort(packed.begin(), packed.end());

  plan.moduli.push_back(k_base);
  for (Index f : packed) {
    plan.factors.push_back(static_cast<int>(f));
    plan.moduli.push_back(plan.moduli.back() * f);
  }
  plan.n_padded = plan.moduli.back();
  return plan;
}

/// When N <= K a single size-N transform already sees no aliasing, so the
/// ladder collapses to M_1 = N.
inline LadderPlan plan_ladder(Index requested_n, const SupportParams& params) {
  const Index k = std::max<Index>(1, std::min(base_bandwidth(params), requested_n));
  return plan_ladder(requested_n, k, params.rho);
}

struct SupportSets {
  Index modulus = 0;
  std::vector<Index> aliased;    // S_k
  std::vector<Index> candidate;  // M_k; empty at k = 1 where it is all of [0, M_1)
};

/// Aliased support at M_1 = K from a size-K inverse transform of f(n/K).
template <SampleSource S>
SupportSets initial_aliased_support(S& sampler, const LadderPlan& plan,
                                    const SupportParams& params) {
  const Index m1 = plan.moduli.front();
  DenseVector values = batch_subsampled(sampler, m1, 1);
  DftPlan(m1).execute(values, Direction::inverse);
  SupportSets out;
  out.modulus = m1;
  const double threshold = detection_threshold(params);
  for (Index l = 0; l < m1; ++l) {
    if (std::abs(values[l]) > threshold) out.aliased.push_back(l);
  }
  return out;
}

/// Union over m in [0, rho_k) of (aliased + m * m_k), ascending.
inline std::vector<Index> dealias_candidates(std::span<const Index> aliased, Index m_k, int rho_k) {
  std::vector<Index> out;
  out.reserve(aliased.size() * static_cast<std::size_t>(rho_k));
  for (int m = 0; m < rho_k; ++m) {
    for (Index a : aliased) out.push_back(a + static_cast<Index>(m) * m_k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// The filtered, shuffled, size-K spectrum at modulus M_k.
///
///   phi_j(Q) = (1/M_k) sum_{m in A(K; M_k)} exp(2 pi i j m / K) g_sigma(m / M_k) f((m Q mod M_k) / M_k)
///
/// for grid points j = 0..K-1. Sampling at m Q moves frequency l to l Q mod M_k.
/// The window and weights depend only on (M_k, K, sigma) and are reused across rounds.
class ProbeFilter {
 public:
  ProbeFilter(Index m_k, Index k_base, double sigma)
      : m_k_(m_k), k_base_(k_base), window_(alias_window(k_base, m_k)), plan_(k_base) {
    if (k_base == 0 || m_k % k_base != 0) {
      throw Error("ProbeFilter: K must divide M_k (K=" + std::to_string(k_base) +
                  ", M_k=" + std::to_string(m_k) + ")");
    }
    const FilterSpec spec = FilterSpec::make(sigma, m_k, k_base);
    weight_.reserve(window_.size());
    slot_.reserve(window_.size());
    // The K factor undoes the 1/K of the inverse transform.
    const double scale = static_cast<double>(k_base) / static_cast<double>(m_k);
    for (Index m : window_) {
      weight_.push_back(gaussian_filter_weight(m, spec) * scale);
      slot_.push_back(m % k_base);
    }
    nums_.resize(window_.size());
    samples_.resize(window_.size());
  }

  Index modulus() const { return m_k_; }
  Index bandwidth() const { return k_base_; }

  template <SampleSource S>
  DenseVector compute(S& sampler, const ModulusPair& q) {
    if (q.m != m_k_) throw NotCoprime("ProbeFilter: multiplier modulus mismatch");
    for (std::size_t i = 0; i < window_.size(); ++i) nums_[i] = mul_mod(window_[i], q.q, m_k_);
    sampler.sample_batch(nums_, m_k_, samples_);
    DenseVector folded(k_base_);
    for (std::size_t i = 0; i < window_.size(); ++i) folded[slot_[i]] += weight_[i] * samples_[i];
    plan_.execute(folded, Direction::inverse);
    return folded;
  }

  /// Grid point nearest to the shuffled position (n Q mod M_k), rounding half up.
  Index probe_index(Index n, const ModulusPair& q) const {
    const Index pos = mul_mod(n, q.q, m_k_);
    const Index spacing = m_k_ / k_base_;
    return ((2 * pos + spacing) / (2 * spacing)) % k_base_;
  }

 private:
  Index m_k_;
  Index k_base_;
  std::vector<Index> window_;
  std::vector<double> weight_;
  std::vector<Index> slot_;
  std::vector<Index> nums_;
  DenseVector samples_;
  DftPlan plan_;
};

template <SampleSource S>
DenseVector compute_phi(S& sampler, Index m_k, Index k_base, const ModulusPair& q, double sigma) {
  if (std::gcd(q.q, m_k) != 1) throw NotCoprime("compute_phi: multiplier not coprime to M_k");
  ProbeFilter filter(m_k, k_base, sigma);
  return filter.compute(sampler, q);
}

/// Prunes `candidate` (subset of [0, M_k)) down to the aliased support with
/// L independent shuffle/filter rounds.
template <SampleSource S>
std::vector<Index> find_aliased_support(std::span<const Index> candidate, Index m_k, Index k_base,
                                        const SupportParams& params, S& sampler, Rng& rng) {
  std::vector<Index> survivors(candidate.begin(), candidate.end());
  if (survivors.empty()) return survivors;
  ProbeFilter filter(m_k, k_base, filter_sigma(m_k, params));
  const double threshold = detection_threshold(params);
  const int rounds = probe_rounds(params);
  for (int l = 0; l < rounds && !survivors.empty(); ++l) {
    const ModulusPair q = ModulusPair::make(sample_coprime(m_k, rng), m_k);
    const DenseVector phi = filter.compute(sampler, q);
    std::erase_if(survivors, [&](Index n) { return std::abs(phi[filter.probe_index(n, q)]) < threshold; });
  }
  return survivors;
}

struct SupportResult {
  std::vector<Index> support;  // within [0, requested_n)
  LadderPlan plan;
  std::vector<SupportSets> steps;
};

/// Full ladder: initial aliased support at M_1, then dealias and prune at
/// every later modulus. Indices >= requested_n are dropped at the end.
template <SampleSource S>
SupportResult find_support(S& sampler, Index requested_n, const SupportParams& params, Rng& rng) {
  params.validate();
  SupportResult result;
  result.plan = plan_ladder(requested_n, params);
  const LadderPlan& plan = result.plan;
  const Index cap = 8 * static_cast<Index>(params.rho) * plan.k_base;

  result.steps.push_back(initial_aliased_support(sampler, plan, params));
  for (std::size_t k = 0; k < plan.factors.size(); ++k) {
    const SupportSets& prev = result.steps.back();
    SupportSets next;
    next.modulus = plan.moduli[k + 1];
    next.candidate = dealias_candidates(prev.aliased, prev.modulus, plan.factors[k]);
    if (next.candidate.size() > cap) {
      throw CandidateBlowup("candidate support of size " + std::to_string(next.candidate.size()) +
                            " exceeds cap " + std::to_string(cap) + " at M_k = " +
                            std::to_string(next.modulus) + "; mu or R is likely underestimated");
    }
    next.aliased = find_aliased_support(next.candidate, next.modulus, plan.k_base, params, sampler, rng);
    result.steps.push_back(std::move(next));
  }
  for (Index j : result.steps.back().aliased) {
    if (j < requested_n) result.support.push_back(j);
  }
  return result;
}

}  // namespace smfft
