#pragma once

// Ground-truth sparse spectra and the sampling oracle
//
//   f(x) = sum_{j in S} exp(-2 pi i x j) fhat_j  (+ noise),
//
// evaluated at rational points x = num/den directly from the sparse
// representation, so N is never materialized.

#include <chrono>
#include <cmath>
#include <algorithm>
#include <concepts>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "smfft/core_math.hpp"
#include "smfft/dft.hpp"
#include "smfft/errors.hpp"

namespace smfft {

/// Map from frequency index to strictly positive amplitude, plus ambient size N.
class SparseSpectrum {
 public:
  SparseSpectrum() = default;
  explicit SparseSpectrum(Index ambient_size) : ambient_size_(ambient_size) {}

  /// Zero amplitudes are dropped; negative ones and out-of-range indices throw.
  void set(Index j, double amplitude) {
    if (j >= ambient_size_) {
      throw IndexOutOfRange("SparseSpectrum: index " + std::to_string(j) +
                            " outside [0, " + std::to_string(ambient_size_) + ")");
    }
    if (!(amplitude >= 0.0)) {
      throw Error("SparseSpectrum: amplitudes must be nonnegative");
    }
    if (amplitude == 0.0) {
      entries_.erase(j);
    } else {
      entries_[j] = amplitude;
    }
  }

  Index ambient_size() const { return ambient_size_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<Index, double>& entries() const { return entries_; }

  double at(Index j) const {
    const auto it = entries_.find(j);
    return it == entries_.end() ? 0.0 : it->second;
  }

  std::vector<Index> support() const {
    std::vector<Index> out;
    out.reserve(entries_.size());
    for (const auto& [j, v] : entries_) out.push_back(j);
    return out;
  }

  double l2_norm() const {
    double s = 0.0;
    for (const auto& [j, v] : entries_) s += v * v;
    return std::sqrt(s);
  }

  /// R distinct indices uniform in [0, N) with amplitudes uniform in [lo, hi].
  static SparseSpectrum random(Index n, std::size_t r, double lo, double hi, Rng& rng) {
    SparseSpectrum out(n);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    std::uniform_real_distribution<double> amp(lo, hi);
    while (out.size() < r) {
      const Index j = pick(rng);
      if (out.entries_.contains(j)) continue;
      out.set(j, amp(rng));
    }
    return out;
  }

  friend bool operator==(const SparseSpectrum&, const SparseSpectrum&) = default;

 private:
  Index ambient_size_ = 0;
  std::map<Index, double> entries_;
};

/// ||a - b||_2 / ||b||_2 over the union of supports; 0 when both are empty.
inline double relative_l2_error(const SparseSpectrum& recovered, const SparseSpectrum& truth) {
  double diff = 0.0;
  for (const auto& [j, v] : truth.entries()) {
    const double d = recovered.at(j) - v;
    diff += d * d;
  }
  for (const auto& [j, v] : recovered.entries()) {
    if (!truth.entries().contains(j)) diff += v * v;
  }
  const double denom = truth.l2_norm();
  if (denom == 0.0) return std::sqrt(diff);
  return std::sqrt(diff) / denom;
}

/// Per-sample additive noise. `eta` is the per-sample standard deviation of
/// the complex draw (eta/sqrt(2) per component).
struct NoiseModel {
  enum class Kind { none, gaussian };
  double eta = 0.0;
  Kind kind = Kind::none;
  std::uint64_t seed = 0;
};

/// Deterministic noise draws, one per sample request in request order.
class NoiseStream {
 public:
  NoiseStream() = default;
  explicit NoiseStream(const NoiseModel& model)
      : model_(model),
        rng_(model.seed),
        normal_(0.0, model.eta / std::numbers::sqrt2) {
    if (model.kind == NoiseModel::Kind::gaussian && !(model.eta > 0.0)) {
      throw Error("NoiseModel: gaussian noise requires eta > 0");
    }
  }

  bool active() const { return model_.kind == NoiseModel::Kind::gaussian; }

  Complex next() {
    if (!active()) return {};
    const double re = normal_(rng_);
    const double im = normal_(rng_);
    return {re, im};
  }

 private:
  NoiseModel model_;
  Rng rng_;
  std::normal_distribution<double> normal_;
};

inline NoiseStream make_noise(const NoiseModel& model) { return NoiseStream(model); }

/// Counts sample requests and distinct sample locations (reduced fractions).
/// Not synchronized; share across threads only under an external lock.
class SampleLedger {
 public:
  void record(Index numerator, Index denominator) {
    ++total_requests_;
    Index num = numerator % denominator;
    Index den = denominator;
    const Index g = std::gcd(num, den);
    num /= g;
    den /= g;
    unique_points_.insert({num, den});
  }

  std::size_t unique_count() const { return unique_points_.size(); }
  std::size_t total_requests() const { return total_requests_; }

  void clear() {
    unique_points_.clear();
    total_requests_ = 0;
  }

 private:
  struct PairHash {
    std::size_t operator()(const std::pair<Index, Index>& p) const noexcept {
      return std::hash<Index>{}(p.first * 0x9E3779B97F4A7C15ull ^ p.second);
    }
  };
  std::unordered_set<std::pair<Index, Index>, PairHash> unique_points_;
  std::size_t total_requests_ = 0;
};

/// Anything the recovery algorithms can draw samples from.
template <class S>
concept SampleSource = requires(S& s, std::span<const Index> nums, Index den,
                                std::span<Complex> out) {
  s.sample_batch(nums, den, out);
};

/// Evaluates a SparseSpectrum at rational points in O(R) per sample.
class Sampler {
 public:
  explicit Sampler(const SparseSpectrum& spectrum, NoiseModel noise = {},
                   SampleLedger* ledger = nullptr)
      : noise_(noise), ledger_(ledger) {
    for (const auto& [j, v] : spectrum.entries()) {
      index_.push_back(j);
      amplitude_.push_back(v);
    }
  }

  Complex sample(Index numerator, Index denominator) {
    Complex out;
    sample_batch(std::span<const Index>(&numerator, 1), denominator, std::span<Complex>(&out, 1));
    return out;
  }

  /// out[i] = f(nums[i] / den)
  void sample_batch(std::span<const Index> nums, Index den, std::span<Complex> out) {
    const auto start = std::chrono::steady_clock::now();
    residue_.resize(index_.size());
    for (std::size_t r = 0; r < index_.size(); ++r) residue_[r] = index_[r] % den;
    const double scale = -2.0 * std::numbers::pi / static_cast<double>(den);
    auto phasor = [&](Index num, Index residue) {
      const double angle = scale * static_cast<double>(mul_mod(num, residue, den));
      return Complex(std::cos(angle), std::sin(angle));
    };
    // Chunks whose points form an arithmetic progression mod den are summed
    // with a phasor recurrence, re-anchored exactly at every chunk start.
    constexpr std::size_t kChunk = 32;
    for (std::size_t c0 = 0; c0 < nums.size(); c0 += kChunk) {
      const std::size_t len = std::min(kChunk, nums.size() - c0);
      const Index first = nums[c0] % den;
      const Index step = len > 1 ? (nums[c0 + 1] % den + den - first) % den : 0;
      bool progression = len > 2;
      for (std::size_t i = 1; progression && i < len; ++i) {
        progression = (nums[c0 + i] % den) == (first + mul_mod(i, step, den)) % den;
      }
      for (std::size_t i = 0; i < len; ++i) out[c0 + i] = {};
      if (progression) {
        for (std::size_t r = 0; r < index_.size(); ++r) {
          Complex z = amplitude_[r] * phasor(first, residue_[r]);
          const Complex w = phasor(step, residue_[r]);
          for (std::size_t i = 0; i < len; ++i) {
            out[c0 + i] += z;
            z *= w;
          }
        }
      } else {
        for (std::size_t i = 0; i < len; ++i) {
          const Index num = nums[c0 + i] % den;
          Complex acc{};
          for (std::size_t r = 0; r < index_.size(); ++r) acc += amplitude_[r] * phasor(num, residue_[r]);
          out[c0 + i] = acc;
        }
      }
      for (std::size_t i = 0; i < len; ++i) {
        out[c0 + i] += noise_.next();
        if (ledger_ != nullptr) ledger_->record(nums[c0 + i], den);
      }
    }
    oracle_seconds_ +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  SampleLedger* ledger() const { return ledger_; }

  /// Wall time spent synthesizing samples.
  double oracle_seconds() const { return oracle_seconds_; }

 private:
  std::vector<Index> index_;
  std::vector<double> amplitude_;
  std::vector<Index> residue_;
  NoiseStream noise_;
  SampleLedger* ledger_;
  double oracle_seconds_ = 0.0;
};

/// One sample f(numerator/denominator) of `spectrum` with one draw from `noise`.
inline Complex sample_at(const SparseSpectrum& spectrum, NoiseStream& noise, Index numerator,
                         Index denominator, SampleLedger* ledger = nullptr) {
  const Index num = numerator % denominator;
  const double scale = -2.0 * std::numbers::pi / static_cast<double>(denominator);
  Complex acc{};
  for (const auto& [j, v] : spectrum.entries()) {
    const double angle = scale * static_cast<double>(mul_mod(num, j % denominator, denominator));
    acc += v * Complex(std::cos(angle), std::sin(angle));
  }
  if (ledger != nullptr) ledger->record(num, denominator);
  return acc + noise.next();
}

/// Samples f at ((n * multiplier) mod M) / M for n = 0..M-1.
template <SampleSource S>
DenseVector batch_subsampled(S& sampler, Index modulus, Index multiplier) {
  std::vector<Index> nums(modulus);
  for (Index n = 0; n < modulus; ++n) nums[n] = mul_mod(n, multiplier, modulus);
  DenseVector out(modulus);
  sampler.sample_batch(nums, modulus, out);
  return out;
}

inline constexpr Index kOracleLimit = Index{1} << 20;

/// Dense Nyquist samples f_n = sum_j exp(-2 pi i n j / N) fhat_j for n in [0, N).
inline DenseVector dense_oracle_dft(const SparseSpectrum& spectrum) {
  const Index n = spectrum.ambient_size();
  if (n > kOracleLimit) {
    throw OracleTooLarge("dense oracle refused: N = " + std::to_string(n) + " exceeds 2^20");
  }
  DenseVector dense(n);
  for (const auto& [j, v] : spectrum.entries()) dense[j] = v;
  DftPlan(n).execute(dense, Direction::forward);
  return dense;
}

}  // namespace smfft
