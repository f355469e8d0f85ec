#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <memory>
#include <vector>

#include "leelab/fock.hpp"

namespace leelab {

using Complex = std::complex<double>;

template <class S>
using DenseMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using DenseVector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct RenormResult {
  double cutoff = 0.0;
  double bare_mass = 0.0;
  // Weyl-law growth rate d mu / d ln(cutoff) at the cutoff. The dropped sum
  // itself diverges logarithmically.
  double tail_estimate = 0.0;
  std::vector<double> level_sigma;
  std::vector<double> level_partial_sum;
};

/// mu(Lambda) = mu_p + sum_{sigma <= Lambda} lambda^2 f^2 / (2 omega (omega - mu_p)).
RenormResult bare_mass(const Model& model);

// Throws domain_violation unless Re(E) <= n m + mu_p.
template <class S>
void check_spectral_parameter(const Model& model, S E);

/// Renormalized kinetic sum
///   sum_sigma lambda^2 f^2 / (2 omega (omega - mu_p) (h0 - E + omega))
/// over the catalog modes.
template <class S>
S k_sum(const Model& model, S E, double h0);

// d k_sum / dE.
template <class S>
S k_sum_derivative(const Model& model, S E, double h0);

/// Weyl-law estimate of the k_sum contribution from modes above the cutoff
/// (integral of the summand against the asymptotic density 1/(4 pi)).
double k_sum_tail_estimate(const Model& model, double E, double h0);

template <class S>
struct PrincipalMatrix {
  S E{};
  double cutoff = 0.0;
  DenseMatrix<S> matrix;
};

/// Principal operator on one sector with the hopping structure cached, so
/// that repeated evaluations at different E only redo the arithmetic.
class PrincipalOperator {
 public:
  PrincipalOperator(const Model& model, const SectorBasis& sector);

  const Model& model() const { return *model_; }
  const SectorBasis& sector() const { return *sector_; }
  std::size_t dimension() const { return sector_->size(); }

  template <class S>
  DenseMatrix<S> matrix(S E) const;

  template <class S>
  DenseMatrix<S> derivative(S E) const;

  // Matrix-free y = Phi(E) x for sectors too large for dense storage.
  DenseVector<double> apply(double E, const DenseVector<double>& x) const;
  DenseVector<double> apply_derivative(double E, const DenseVector<double>& x) const;

  double diagonal(double E, std::size_t i) const;

 private:
  const Model* model_;
  const SectorBasis* sector_;
  std::vector<double> couplings_;       // lambda f_k / sqrt(2 omega_k)
  std::vector<std::size_t> active_;     // modes with non-zero coupling
  std::vector<double> lower_h0_;        // energies of the (n-1)-sector states
  std::unique_ptr<RaisingMap> raising_; // (n-1) -> n, absent when n == 0
};

template <class S>
PrincipalMatrix<S> assemble_phi(const Model& model, const SectorBasis& sector, S E);

template <class S>
DenseMatrix<S> phi_derivative(const Model& model, const SectorBasis& sector, S E);

// CSV of (row, col, value) triplets; complex values as value_re,value_im.
void write_triplets(std::ostream& os, const DenseMatrix<double>& m);

}  // namespace leelab
