#pragma once

// Value recovery on a known support.
//
// Samples on T prime grids n/P^(t) see the spectrum aliased mod P^(t):
//   f^(t) = F^(t) B^(t) fhat,   B^(t)_{l,j} = [j mod P^(t) = l].
// With y^(t) = (F^(t))^{-1} f^(t) = B^(t) fhat, the normal equations read
//   (1/T) B^* B fhat = (1/T) B^* y,
// and (1/T) B^* B = I - P with ||P|| <= 1/2 for a good draw, so the
// truncated Neumann series sum_n (I - (1/T) B^* B)^n (1/T) B^* y converges
// geometrically. Draws are re-tried when the contraction certificate fails.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "smfft/core_math.hpp"
#include "smfft/dft.hpp"
#include "smfft/errors.hpp"
#include "smfft/signal.hpp"
#include "smfft/support_recovery.hpp"

namespace smfft {

inline constexpr int kMeasurementBlocks = 4;

/// Stacked prime-modulus measurements of a known support.
struct MeasurementSystem {
  std::vector<Index> primes;                        // P^(1..T)
  std::vector<Index> support;                       // S, ascending
  std::vector<std::vector<Index>> residues;         // [t][r] = support[r] mod P^(t)
  std::vector<std::vector<std::size_t>> classes;    // [t][r] = residue class id within block t
  std::vector<std::size_t> class_count;             // [t]
  std::vector<DenseVector> rhs;                     // [t], length P^(t)

  std::size_t blocks() const { return primes.size(); }

  /// Builds residue maps for fixed primes; rhs is left empty.
  static MeasurementSystem layout(std::vector<Index> primes, std::vector<Index> support) {
    MeasurementSystem sys;
    sys.primes = std::move(primes);
    sys.support = std::move(support);
    for (Index p : sys.primes) {
      std::vector<Index> res(sys.support.size());
      std::vector<std::size_t> cls(sys.support.size());
      std::unordered_map<Index, std::size_t> ids;
      for (std::size_t r = 0; r < sys.support.size(); ++r) {
        res[r] = sys.support[r] % p;
        cls[r] = ids.try_emplace(res[r], ids.size()).first->second;
      }
      sys.residues.push_back(std::move(res));
      sys.classes.push_back(std::move(cls));
      sys.class_count.push_back(ids.size());
    }
    return sys;
  }
};

/// The smallest ceil(4 R log_R N) primes above R (log base at least 2).
inline std::vector<Index> prime_pool(Index r_bound, Index n_total) {
  const double base = std::max<double>(2.0, static_cast<double>(r_bound));
  const double logs = std::log(static_cast<double>(std::max<Index>(n_total, 2))) / std::log(base);
  // The tolerance keeps exact powers (log_5 125 = 3) from rounding up.
  const auto count = static_cast<std::size_t>(
      std::max(1.0, std::ceil(4.0 * static_cast<double>(r_bound) * logs - 1e-9)));
  return primes_greater_than(r_bound, count);
}

/// Draws T primes i.i.d. uniformly (with replacement) from `pool` and samples
/// every block f(n / P^(t)), n = 0..P^(t)-1.
template <SampleSource S>
MeasurementSystem draw_measurement(std::span<const Index> support, std::span<const Index> pool,
                                   int t_blocks, Rng& rng, S& sampler) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<Index> primes;
  for (int t = 0; t < t_blocks; ++t) primes.push_back(pool[pick(rng)]);
  MeasurementSystem sys =
      MeasurementSystem::layout(std::move(primes), std::vector<Index>(support.begin(), support.end()));
  for (Index p : sys.primes) sys.rhs.push_back(batch_subsampled(sampler, p, 1));
  return sys;
}

template <SampleSource S>
MeasurementSystem draw_measurement(std::span<const Index> support, Index r_bound, Index n_total,
                                   int t_blocks, Rng& rng, S& sampler) {
  const std::vector<Index> pool = prime_pool(r_bound, n_total);
  return draw_measurement(support, pool, t_blocks, rng, sampler);
}

/// (1/T) B^* B x in O(T R).
inline DenseVector apply_normal(const MeasurementSystem& sys, std::span<const Complex> x) {
  const std::size_t r = sys.support.size();
  DenseVector out(r);
  DenseVector sums;
  for (std::size_t t = 0; t < sys.blocks(); ++t) {
    sums.assign(sys.class_count[t], Complex{});
    const auto& cls = sys.classes[t];
    for (std::size_t i = 0; i < r; ++i) sums[cls[i]] += x[i];
    for (std::size_t i = 0; i < r; ++i) out[i] += sums[cls[i]];
  }
  const double scale = 1.0 / static_cast<double>(sys.blocks());
  for (auto& v : out) v *= scale;
  return out;
}

enum class ProjectionPath { automatic, direct, transform };

/// (1/T) B^* y with y^(t) the inverse size-P^(t) transform of block t, evaluated
/// either by direct correlation at the R residues or by a full transform.
inline DenseVector back_project(const MeasurementSystem& sys,
                                ProjectionPath path = ProjectionPath::automatic) {
  const std::size_t r = sys.support.size();
  DenseVector out(r);
  for (std::size_t t = 0; t < sys.blocks(); ++t) {
    const Index p = sys.primes[t];
    const DenseVector& block = sys.rhs[t];
    const bool direct =
        path == ProjectionPath::direct ||
        (path == ProjectionPath::automatic && r <= 2 * static_cast<std::size_t>(std::bit_width(p)));
    const double inv_p = 1.0 / static_cast<double>(p);
    if (direct) {
      std::vector<Complex> roots(p);
      for (Index k = 0; k < p; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) * inv_p;
        roots[k] = {std::cos(angle), std::sin(angle)};
      }
      for (std::size_t i = 0; i < r; ++i) {
        const Index l = sys.residues[t][i];
        Complex acc{};
        Index idx = 0;
        for (Index q = 0; q < p; ++q) {
          acc += roots[idx] * block[q];
          idx += l;
          if (idx >= p) idx -= p;
        }
        out[i] += acc * inv_p;
      }
    } else {
      DenseVector y = block;
      DftPlan(p).execute(y, Direction::inverse);
      for (std::size_t i = 0; i < r; ++i) out[i] += y[sys.residues[t][i]];
    }
  }
  const double scale = 1.0 / static_cast<double>(sys.blocks());
  for (auto& v : out) v *= scale;
  return out;
}

inline double l2_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

struct NeumannState {
  DenseVector iterate;
  std::vector<double> residual_norms;  // ||(I - A)^n b|| for the recorded terms
  int terms_used = 0;
  bool contracted = true;
};

/// sum_{n=0}^{Z} (I - (1/T) B^* B)^n b, stopping early once terms reach roundoff.
/// `contracted` is cleared, and the sum abandoned, as soon as a term fails to
/// halve the previous one.
inline NeumannState neumann_solve(const MeasurementSystem& sys, std::span<const Complex> projected,
                                  int z_terms) {
  NeumannState state;
  DenseVector term(projected.begin(), projected.end());
  state.iterate = term;
  state.residual_norms.push_back(l2_norm(term));
  const double floor = 1e-13 * state.residual_norms.front();
  for (int n = 1; n <= z_terms; ++n) {
    if (state.residual_norms.back() <= floor) break;
    const DenseVector applied = apply_normal(sys, term);
    for (std::size_t i = 0; i < term.size(); ++i) term[i] -= applied[i];
    const double norm = l2_norm(term);
    const double prev = state.residual_norms.back();
    state.residual_norms.push_back(norm);
    // Exact ratio 1/2 is common (a pair colliding in half the blocks); allow roundoff.
    if (norm > 0.5 * prev * (1.0 + 1e-12) && norm > floor) {
      state.contracted = false;
      return state;
    }
    for (std::size_t i = 0; i < term.size(); ++i) state.iterate[i] += term[i];
    state.terms_used = n;
  }
  return state;
}

struct ValueResult {
  SparseSpectrum values;
  DenseVector raw;  // complex solution on the support, in support order
  NeumannState state;
  MeasurementSystem system;
  int draws_used = 0;
};

/// Z = ceil(log2(1/eta)) series terms (eta -> accuracy when exact), up to
/// L = ceil(log2(1/p)) measurement draws.
template <SampleSource S>
ValueResult compute_values(std::span<const Index> support, Index n_total, const SupportParams& params,
                           S& sampler, Rng& rng, int t_blocks = kMeasurementBlocks) {
  ValueResult result;
  result.values = SparseSpectrum(n_total);
  if (support.empty()) return result;
  const double tolerance = params.eta > 0.0 ? params.eta : params.accuracy;
  const int z_terms = static_cast<int>(std::ceil(std::log2(1.0 / tolerance)));
  const int draws = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / params.p_fail))));
  const std::vector<Index> pool = prime_pool(params.r_bound, n_total);

  for (int attempt = 1; attempt <= draws; ++attempt) {
    MeasurementSystem sys = draw_measurement(support, pool, t_blocks, rng, sampler);
    const DenseVector projected = back_project(sys);
    NeumannState state = neumann_solve(sys, projected, z_terms);
    if (!state.contracted) continue;
    result.draws_used = attempt;
    result.raw = state.iterate;
    for (std::size_t i = 0; i < support.size(); ++i) {
      const double v = state.iterate[i].real();
      if (v > 0.0) result.values.set(support[i], v);
    }
    result.state = std::move(state);
    result.system = std::move(sys);
    return result;
  }
  throw ContractionFailure("no measurement draw passed the contraction certificate in " +
                           std::to_string(draws) + " attempts (support size " +
                           std::to_string(support.size()) + ")");
}

}  // namespace smfft
