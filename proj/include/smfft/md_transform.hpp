#pragma once

// d-dimensional sparse transforms through a rank-1 lattice.
//
// With g = (1, M, ..., M^{d-1}) and N = M^d, sampling f on the line x = t g
// turns the d-dimensional spectrum into a 1-D spectrum re-indexed by
// j -> j . g (base-M digits, least significant first). Distinct multi-indices
// in [0, M)^d map to distinct integers in [0, N), so the 1-D problem carries
// no aliasing and the result maps back exactly.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "smfft/core_math.hpp"
#include "smfft/dft.hpp"
#include "smfft/errors.hpp"
#include "smfft/signal.hpp"
#include "smfft/support_recovery.hpp"
#include "smfft/value_recovery.hpp"

namespace smfft {

using MultiIndex = std::vector<Index>;

struct RankOneLattice {
  int dims = 1;
  Index axis_size = 1;
  std::vector<Index> generator;  // M^i
  Index total = 1;               // M^d

  static RankOneLattice make(int dims, Index axis_size) {
    if (dims < 1) throw Error("RankOneLattice: dims must be >= 1");
    if (axis_size < 1) throw Error("RankOneLattice: axis size must be >= 1");
    RankOneLattice lat;
    lat.dims = dims;
    lat.axis_size = axis_size;
    unsigned __int128 power = 1;
    for (int i = 0; i < dims; ++i) {
      lat.generator.push_back(static_cast<Index>(power));
      power *= axis_size;
      if (power > (static_cast<unsigned __int128>(1) << 62)) {
        throw Error("RankOneLattice: M^d exceeds 2^62");
      }
    }
    lat.total = static_cast<Index>(power);
    return lat;
  }
};

inline Index flatten_index(std::span<const Index> multi, const RankOneLattice& lattice) {
  if (multi.size() != static_cast<std::size_t>(lattice.dims)) {
    throw IndexOutOfRange("flatten_index: expected " + std::to_string(lattice.dims) +
                          " components, got " + std::to_string(multi.size()));
  }
  Index flat = 0;
  for (int i = 0; i < lattice.dims; ++i) {
    if (multi[i] >= lattice.axis_size) {
      throw IndexOutOfRange("flatten_index: component " + std::to_string(multi[i]) +
                            " outside [0, " + std::to_string(lattice.axis_size) + ")");
    }
    flat += multi[i] * lattice.generator[i];
  }
  return flat;
}

inline MultiIndex unflatten_index(Index flat, const RankOneLattice& lattice) {
  if (flat >= lattice.total) {
    throw IndexOutOfRange("unflatten_index: " + std::to_string(flat) + " outside [0, " +
                          std::to_string(lattice.total) + ")");
  }
  MultiIndex out(lattice.dims);
  for (int i = 0; i < lattice.dims; ++i) {
    out[i] = flat % lattice.axis_size;
    flat /= lattice.axis_size;
  }
  return out;
}

/// x_n = (n g mod N) / N as numerators over the common denominator N.
struct LatticePoint {
  std::vector<Index> numerators;
  Index denominator = 1;
};

inline LatticePoint lattice_point(Index n, const RankOneLattice& lattice) {
  LatticePoint p;
  p.denominator = lattice.total;
  for (Index g : lattice.generator) p.numerators.push_back(mul_mod(n, g, lattice.total));
  return p;
}

/// Sparse nonnegative spectrum on [0, M)^d.
struct MdSpectrum {
  RankOneLattice lattice;
  std::map<MultiIndex, double> entries;

  std::size_t size() const { return entries.size(); }

  void set(const MultiIndex& j, double amplitude) {
    flatten_index(j, lattice);  // range check
    if (!(amplitude >= 0.0)) throw Error("MdSpectrum: amplitudes must be nonnegative");
    if (amplitude == 0.0) {
      entries.erase(j);
    } else {
      entries[j] = amplitude;
    }
  }

  static MdSpectrum random(const RankOneLattice& lattice, std::size_t r, double lo, double hi,
                           Rng& rng) {
    const SparseSpectrum flat = SparseSpectrum::random(lattice.total, r, lo, hi, rng);
    MdSpectrum out{lattice, {}};
    for (const auto& [j, v] : flat.entries()) out.entries[unflatten_index(j, lattice)] = v;
    return out;
  }
};

/// The 1-D spectrum seen along the rank-1 line.
inline SparseSpectrum flatten_spectrum(const MdSpectrum& spectrum) {
  SparseSpectrum flat(spectrum.lattice.total);
  for (const auto& [j, v] : spectrum.entries) flat.set(flatten_index(j, spectrum.lattice), v);
  return flat;
}

inline MdSpectrum unflatten_spectrum(const SparseSpectrum& flat, const RankOneLattice& lattice) {
  MdSpectrum out{lattice, {}};
  for (const auto& [j, v] : flat.entries()) out.entries[unflatten_index(j, lattice)] = v;
  return out;
}

/// 1-D sampler for the d-dimensional signal restricted to the rank-1 line:
/// a request at q/P returns sum_j exp(-2 pi i (q/P) (j . g)) fhat_j.
inline Sampler md_sample_adapter(const MdSpectrum& spectrum, NoiseModel noise = {},
                                 SampleLedger* ledger = nullptr) {
  return Sampler(flatten_spectrum(spectrum), noise, ledger);
}

/// Tensor-grid samples f(n / M), n in [0, M)^d, stored at flatten_index(n),
/// computed by forward transforms along each axis. Test-scale only.
inline DenseVector dense_md_samples(const MdSpectrum& spectrum) {
  const RankOneLattice& lat = spectrum.lattice;
  if (lat.total > kOracleLimit) {
    throw OracleTooLarge("dense d-dimensional oracle refused: N = " + std::to_string(lat.total));
  }
  DenseVector data(lat.total);
  for (const auto& [j, v] : spectrum.entries) data[flatten_index(j, lat)] = v;
  const Index m = lat.axis_size;
  const DftPlan plan(m);
  DenseVector line(m);
  for (int axis = 0; axis < lat.dims; ++axis) {
    const Index stride = lat.generator[axis];
    for (Index base = 0; base < lat.total; ++base) {
      if ((base / stride) % m != 0) continue;
      for (Index k = 0; k < m; ++k) line[k] = data[base + k * stride];
      plan.execute(line, Direction::forward);
      for (Index k = 0; k < m; ++k) data[base + k * stride] = line[k];
    }
  }
  return data;
}

/// Inverse of dense_md_samples: coefficients from tensor-grid samples.
inline DenseVector dense_md_coefficients(DenseVector data, const RankOneLattice& lat) {
  const Index m = lat.axis_size;
  const DftPlan plan(m);
  DenseVector line(m);
  for (int axis = 0; axis < lat.dims; ++axis) {
    const Index stride = lat.generator[axis];
    for (Index base = 0; base < lat.total; ++base) {
      if ((base / stride) % m != 0) continue;
      for (Index k = 0; k < m; ++k) line[k] = data[base + k * stride];
      plan.execute(line, Direction::inverse);
      for (Index k = 0; k < m; ++k) data[base + k * stride] = line[k];
    }
  }
  return data;
}

struct MdRecovery {
  MdSpectrum recovered;
  SupportResult support;
  int draws_used = 0;
};

/// Support then values on the flattened 1-D problem, mapped back to [0, M)^d.
/// Recovered amplitudes below the detection threshold delta*mu/2 are treated
/// as spurious support and discarded.
template <SampleSource S>
MdRecovery md_sfft(S& sampler, const RankOneLattice& lattice, const SupportParams& params, Rng& rng) {
  MdRecovery out;
  out.recovered.lattice = lattice;
  out.support = find_support(sampler, lattice.total, params, rng);
  const ValueResult values = compute_values(out.support.support, lattice.total, params, sampler, rng);
  out.draws_used = values.draws_used;
  const double floor = params.delta * params.mu / 2.0;
  for (const auto& [j, v] : values.values.entries()) {
    if (v >= floor) out.recovered.entries[unflatten_index(j, lattice)] = v;
  }
  return out;
}

inline MdRecovery md_sfft(const MdSpectrum& spectrum, const SupportParams& params, Rng& rng,
                          NoiseModel noise = {}, SampleLedger* ledger = nullptr) {
  Sampler sampler = md_sample_adapter(spectrum, noise, ledger);
  return md_sfft(sampler, spectrum.lattice, params, rng);
}

inline double relative_l2_error(const MdSpectrum& recovered, const MdSpectrum& truth) {
  return relative_l2_error(flatten_spectrum(recovered), flatten_spectrum(truth));
}

}  // namespace smfft
