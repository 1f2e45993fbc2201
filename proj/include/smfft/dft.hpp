#pragma once

// Arbitrary-length discrete Fourier transform.
//
//   forward:  X_n = sum_j exp(-2 pi i n j / L) x_j
//   inverse:  x_j = (1/L) sum_n exp(+2 pi i n j / L) X_n
//
// Powers of two use an iterative radix-2 FFT, other lengths of at least
// kDirectCutoff go through Bluestein's chirp-z reduction to a padded power of
// two, and short lengths are summed directly.

#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "smfft/core_math.hpp"

namespace smfft {

enum class Direction { forward, inverse };

namespace detail {

/// In-place radix-2 transform with the forward (negative) sign.
class Radix2 {
 public:
  Radix2() = default;
  explicit Radix2(std::size_t n) : n_(n), twiddle_(n / 2), rev_(n) {
    const unsigned bits = n > 1 ? static_cast<unsigned>(std::countr_zero(n)) : 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (unsigned b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      rev_[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = Complex(std::cos(angle), std::sin(angle));
    }
  }

  std::size_t size() const { return n_; }

  void operator()(std::span<Complex> a) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const Complex t = twiddle_[k * stride] * a[start + k + half];
          a[start + k + half] = a[start + k] - t;
          a[start + k] += t;
        }
      }
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<Complex> twiddle_;
  std::vector<std::size_t> rev_;
};

}  // namespace detail

/// Reusable transform plan for one length.
class DftPlan {
 public:
  static constexpr std::size_t kDirectCutoff = 64;

  explicit DftPlan(std::size_t n) : n_(n) {
    if (n == 0) return;
    if (std::has_single_bit(n)) {
      kind_ = Kind::radix2;
      radix2_ = detail::Radix2(n);
    } else if (n < kDirectCutoff) {
      kind_ = Kind::direct;
      roots_.resize(n);
      for (std::size_t k = 0; k < n; ++k) roots_[k] = root(k, n);
    } else {
      kind_ = Kind::bluestein;
      init_bluestein();
    }
  }

  std::size_t size() const { return n_; }

  /// Transforms `data` in place.
  void execute(std::span<Complex> data, Direction dir) const {
    if (n_ == 0) return;
    if (dir == Direction::inverse) {
      for (auto& v : data) v = std::conj(v);
    }
    forward(data);
    if (dir == Direction::inverse) {
      const double scale = 1.0 / static_cast<double>(n_);
      for (auto& v : data) v = std::conj(v) * scale;
    }
  }

 private:
  enum class Kind { direct, radix2, bluestein };

  // exp(-2 pi i k / n) with k reduced first.
  static Complex root(std::size_t k, std::size_t n) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k % n) / static_cast<double>(n);
    return {std::cos(angle), std::sin(angle)};
  }

  void init_bluestein() {
    const std::size_t padded = std::bit_ceil(2 * n_ - 1);
    radix2_ = detail::Radix2(padded);
    chirp_.resize(n_);
    const std::size_t two_n = 2 * n_;
    for (std::size_t k = 0; k < n_; ++k) {
      // exp(-pi i k^2 / n) = exp(-2 pi i (k^2 mod 2n) / 2n)
      const auto k2 = static_cast<std::size_t>(static_cast<unsigned __int128>(k) * k % two_n);
      chirp_[k] = root(k2, two_n);
    }
    kernel_.assign(padded, Complex{});
    kernel_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n_; ++k) {
      kernel_[k] = std::conj(chirp_[k]);
      kernel_[padded - k] = std::conj(chirp_[k]);
    }
    radix2_(kernel_);
  }

  void forward(std::span<Complex> data) const {
    switch (kind_) {
      case Kind::radix2:
        radix2_(data);
        return;
      case Kind::direct: {
        std::vector<Complex> out(n_);
        for (std::size_t n = 0; n < n_; ++n) {
          Complex acc{};
          std::size_t idx = 0;
          for (std::size_t j = 0; j < n_; ++j) {
            acc += roots_[idx] * data[j];
            idx += n;
            if (idx >= n_) idx %= n_;
          }
          out[n] = acc;
        }
        std::copy(out.begin(), out.end(), data.begin());
        return;
      }
      case Kind::bluestein: {
        const std::size_t padded = kernel_.size();
        std::vector<Complex> work(padded);
        for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
        radix2_(work);
        for (std::size_t k = 0; k < padded; ++k) work[k] *= kernel_[k];
        // Inverse via conjugation; the 1/padded factor is applied below.
        for (auto& v : work) v = std::conj(v);
        radix2_(work);
        const double scale = 1.0 / static_cast<double>(padded);
        for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(work[k]) * scale * chirp_[k];
        return;
      }
    }
  }

  std::size_t n_ = 0;
  Kind kind_ = Kind::direct;
  detail::Radix2 radix2_;
  std::vector<Complex> roots_;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_;
};

inline DenseVector dft(std::span<const Complex> values, Direction dir) {
  DenseVector out(values.begin(), values.end());
  DftPlan(out.size()).execute(out, dir);
  return out;
}

}  // namespace smfft
