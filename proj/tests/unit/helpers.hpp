#pragma once

#include <memory>

#include "resctl/system.hpp"

namespace resctl::fixtures {

/// n_q equally spaced resonances over the window, each of width wf * spacing.
inline GeneratorParams spaced_params(Eigen::Index n_q, Eigen::Index n_alpha, EnergyWindow w, double wf,
                                     std::uint64_t seed) {
  GeneratorParams p;
  p.n_alpha = n_alpha;
  p.window = w;
  p.seed = seed;
  const double sp = w.width() / static_cast<double>(n_q);
  for (Eigen::Index k = 0; k < n_q; ++k) {
    p.centers.push_back(w.lo + (static_cast<double>(k) + 0.5) * sp);
    p.widths.push_back(wf * sp);
    p.dipoles.push_back(1.0);
  }
  return p;
}

inline std::shared_ptr<const ResonanceSystem> make_shared_system(const GeneratorParams& p) {
  return std::make_shared<const ResonanceSystem>(generate_synthetic(p));
}

}  // namespace resctl::fixtures

namespace resctl::fixtures {

/// 16 resonances on 256 states over 10 meV bins: N_A = 16 relative control is well posed.
inline GeneratorParams well_posed_params(double wf, std::uint64_t seed) {
  return spaced_params(16, 256, {4.80, 4.96}, wf, seed);
}

/// Narrow, evenly spaced resonances with disjoint supports (tail cutoff keeps them apart).
inline GeneratorParams disjoint_params(Eigen::Index n_q, Eigen::Index per_resonance, std::uint64_t seed) {
  auto p = spaced_params(n_q, n_q * per_resonance, {4.80, 4.80 + 0.01 * static_cast<double>(n_q)}, 0.02, seed);
  p.tail_cutoff = 5.0;
  return p;
}

}  // namespace resctl::fixtures
