// Recovers a 5-sparse 2-D spectrum on a 256 x 256 grid from a few thousand
// samples and checks the result against the ground truth.

#include <cstdio>

#include "smfft/md_transform.hpp"

int main() {
  using namespace smfft;
  const RankOneLattice grid = RankOneLattice::make(2, 256);
  MdSpectrum truth{grid, {}};
  truth.set({3, 200}, 1.0);
  truth.set({17, 17}, 0.6);
  truth.set({255, 0}, 1.4);
  truth.set({128, 64}, 0.9);
  truth.set({0, 1}, 1.1);

  SupportParams params;
  params.r_bound = 5;
  params.p_fail = 1e-3;

  SampleLedger ledger;
  Rng rng(2024);
  const MdRecovery result = md_sfft(truth, params, rng, {}, &ledger);

  for (const auto& [j, v] : result.recovered.entries) {
    std::printf("(%3llu, %3llu)  %.12f\n", static_cast<unsigned long long>(j[0]),
                static_cast<unsigned long long>(j[1]), v);
  }
  std::printf("samples used: %zu of %llu grid points\n", ledger.unique_count(),
              static_cast<unsigned long long>(grid.total));
  std::printf("relative l2 error: %.3e\n", relative_l2_error(result.recovered, truth));
  return relative_l2_error(result.recovered, truth) < 1e-8 ? 0 : 1;
}
