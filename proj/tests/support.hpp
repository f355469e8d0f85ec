#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "leelab/fock.hpp"
#include "leelab/manifold.hpp"
#include "oracles.hpp"

namespace testing_support {

inline constexpr double kPi = 3.14159265358979323846;

inline leelab::ModelParams params(double lambda, int n, double m = 1.0, double mu_p = 0.5) {
  leelab::ModelParams p;
  p.mass = m;
  p.mu_p = mu_p;
  p.coupling = lambda;
  p.n = n;
  return p;
}

inline leelab::Model model(const leelab::ManifoldSpec& spec, double cutoff,
                           const leelab::ModelParams& p, bool prune = true) {
  return leelab::Model(leelab::build_catalog(spec, cutoff, p.mass, prune), p);
}

inline leelab::ManifoldSpec square_torus(double x1 = 0.0, double x2 = 0.0) {
  return leelab::ManifoldSpec::torus(2 * kPi, 2 * kPi, x1, x2);
}

inline std::vector<oracle::ModeData> mode_data(const leelab::ModeCatalog& catalog) {
  std::vector<oracle::ModeData> out;
  for (const auto& m : catalog) out.push_back({m.sigma, m.omega, m.f_at_impurity});
  return out;
}

// Position of every oracle state inside the library sector.
inline std::vector<std::size_t> sector_positions(const leelab::SectorBasis& sector,
                                                 const std::vector<oracle::Counts>& states) {
  std::vector<std::size_t> pos;
  for (const auto& s : states) {
    std::vector<std::uint32_t> counts(s.begin(), s.end());
    pos.push_back(sector.find(counts).value());
  }
  return pos;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
