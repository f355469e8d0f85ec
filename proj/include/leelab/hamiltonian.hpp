#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "leelab/principal.hpp"

namespace leelab {

// Explicit truncated Hamiltonian on F^(n+1) (+) F^(n). The upper block is the
// free (n+1)-boson energy, the lower block the free n-boson energy plus the
// bare splitting mu(Lambda); b = lambda phi^(+)(x) couples them.
struct BlockHamiltonian {
  SectorBasis upper;
  SectorBasis lower;
  DenseVector<double> upper_h0;
  DenseVector<double> lower_h0;
  double bare_mass = 0.0;
  DenseMatrix<double> coupling;  // dim(lower) x dim(upper)

  Eigen::Index upper_dim() const { return upper_h0.size(); }
  Eigen::Index lower_dim() const { return lower_h0.size(); }
  Eigen::Index dimension() const { return upper_dim() + lower_dim(); }

  DenseMatrix<double> full() const;
};

BlockHamiltonian assemble_h(const Model& model, std::size_t ceiling = kDefaultSectorCeiling);

template <class S>
struct BlockResolvent {
  S E{};
  DenseMatrix<S> alpha;  // upper-upper
  DenseMatrix<S> beta;   // lower-upper
  DenseMatrix<S> gamma;  // upper-lower
  DenseMatrix<S> delta;  // lower-lower, Phi(E)^{-1}
  double phi_condition = 0.0;  // 1 / rcond of Phi(E)

  DenseMatrix<S> full() const;
};

/// Resolvent assembled from a^{-1} = (H0 - E)^{-1} on the upper block and
/// the renormalized principal operator on the lower block.
template <class S>
BlockResolvent<S> block_resolvent(const Model& model, const BlockHamiltonian& h, S E);

// (H - E)^{-1} by dense LU.
template <class S>
DenseMatrix<S> direct_resolvent(const BlockHamiltonian& h, S E);

/// max-norm of R(E1) - R(E2) - (E1 - E2) R(E1) R(E2), R from the block formulas.
double pseudo_resolvent_residual(const Model& model, const BlockHamiltonian& h, Complex E1,
                                 Complex E2);

struct DecayRow {
  double lambda_k = 0.0;
  std::size_t probe = 0;
  double norm = 0.0;       // || |l| R(-|l|) x - x ||
  double beta_norm = 0.0;  // || |l| beta(-|l|) x_upper ||
};

// Canonical basis vectors followed by `random_count` fixed-seed unit vectors.
std::vector<DenseVector<double>> decay_probes(const BlockHamiltonian& h,
                                              std::size_t random_count = 10,
                                              std::uint64_t seed = 12345);

std::vector<DecayRow> decay_check(const Model& model, const BlockHamiltonian& h,
                                  std::span<const double> magnitudes,
                                  std::span<const DenseVector<double>> probes);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// || sum_k g_k a_k |f> || / (||g|| ||f||) for a state |f> in `sector`.
double lowering_norm_ratio(const SectorBasis& sector, const SectorBasis& below,
                           const DenseVector<double>& g, const DenseVector<double>& f);

}  // namespace leelab
