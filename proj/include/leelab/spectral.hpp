#pragma once

#include <optional>
#include <span>
#include <vector>

#include "leelab/principal.hpp"

namespace leelab {

struct SpectralOptions {
  // Sectors larger than this use the matrix-free Lanczos path.
  std::size_t dense_ceiling = 5000;
  // Number of lowest eigenvalues reported per flow sample.
  std::size_t eigen_count = 4;
  double overlap_threshold = 0.9;
  int max_refinements = 6;
  double residual_tol = 1e-12;
};

struct LowestEigen {
  double value = 0.0;
  DenseVector<double> vector;
  std::vector<double> values;  // ascending, at most eigen_count entries
  bool degenerate = false;
  double max_abs_entry = 0.0;  // max-norm of Phi(E), used for root tolerances
};

/// Lowest eigenpair of Phi(E). When the lowest level is degenerate and a
/// reference vector is given, the returned vector is the normalized
/// projection of the reference onto the degenerate subspace.
LowestEigen lowest_eigen(const PrincipalOperator& op, double E, const SpectralOptions& opts = {},
                         const DenseVector<double>* reference = nullptr);

struct FlowSample {
  double E = 0.0;
  std::vector<double> eigenvalues;
  DenseVector<double> ground_vector;
  double fh_derivative = 0.0;  // <w0| dPhi/dE |w0>
  bool degenerate = false;
};

/// Eigenvalue flow over a sorted grid. The grid is refined with midpoints
/// wherever adjacent lowest eigenvectors overlap by less than the threshold.
std::vector<FlowSample> eigen_flow(const Model& model, const SectorBasis& sector,
                                   std::span<const double> grid, const SpectralOptions& opts = {});

/// Central (or, at the threshold, one-sided) Richardson-extrapolated
/// derivative of the lowest eigenvalue.
double lowest_eigenvalue_slope(const PrincipalOperator& op, double E,
                               const SpectralOptions& opts = {});

struct GroundEnergyOptions {
  std::optional<double> lower_start;
  double rel_tol = 1e-10;
  int max_iterations = 200;
  SpectralOptions spectral;
};

struct GroundEnergy {
  double E_gr = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double omega_lo = 0.0;
  double omega_hi = 0.0;
  double residual = 0.0;     // |omega_0(E_gr)|
  double phi_max = 0.0;      // max |Phi(E_gr)_ij|
  bool at_threshold = false; // no binding: root sits at n m + mu_p
  int iterations = 0;
  DenseVector<double> ground_vector;
  double fh_derivative = 0.0;
};

/// Root of omega_0(E) = 0 below the threshold n m + mu_p, by bisection with
/// Newton steps driven by the Feynman-Hellmann derivative.
GroundEnergy ground_energy(const Model& model, const SectorBasis& sector,
                           const GroundEnergyOptions& opts = {});

struct Wavefunction {
  DenseVector<double> upper;   // (n+1)-boson amplitudes, enumerate_sector order
  DenseVector<double> lower;   // n-boson amplitudes
  double scale = 0.0;          // [-d omega_0/dE]^{-1/2}
  double fh_derivative = 0.0;  // <w0| dPhi/dE |w0>
  double fd_derivative = 0.0;  // finite-difference d omega_0/dE
  double normalization = 0.0;  // <Psi|Psi>
  double fh_identity = 0.0;    // [-d omega_0/dE]^{-1} <w0|-dPhi/dE|w0>
};

Wavefunction riesz_wavefunction(const Model& model, const SectorBasis& sector, double E_gr,
                                const DenseVector<double>& ground_vector,
                                const SpectralOptions& opts = {});

struct GroundStateReport {
  GroundEnergy root;
  std::vector<FlowSample> flow;
  Wavefunction wavefunction;
  std::optional<double> lower_bound;
  double upper_bound = 0.0;  // n m + mu_p
};

}  // namespace leelab
