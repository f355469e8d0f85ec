#pragma once

#include <optional>
#include <span>

#include "leelab/principal.hpp"
#include "leelab/spectral.hpp"

namespace leelab {

struct VariationalBound {
  // <Omega*| Phi(n m + mu_p) |Omega*> with Omega* = (a_0^dagger)^n |0> / sqrt(n!)
  double matrix_element = 0.0;
  // -n lambda^2 f_0^2 / (m (m + mu_p)), the closed form as printed
  double printed_closed_form = 0.0;
  // -n lambda^2 f_0^2 / (2 m (m - mu_p)), the one-term evaluation of the same
  // expectation (the kinetic part vanishes at E = n m + mu_p)
  double recomputed_closed_form = 0.0;
};

VariationalBound variational_upper(const Model& model, const SectorBasis& sector);

/// (n-1) m - n lambda^2 (1/(2 m^2 V) + C). mu_p does not enter.
double compact_lower(const Model& model, double heat_kernel_constant);

// E_* below which n lambda^2 (1/(2 m^2 V) + C) / ((n-1) m - E) < 1.
double invertibility_threshold(const Model& model, double heat_kernel_constant);

/// Spectral norm of D^{-1/2} U D^{-1/2} with D = H0 - E + mu_p and U the
/// (positive) one-boson exchange part of Phi(E).
double relative_potential_norm(const Model& model, const SectorBasis& sector, double E);

// (chi + w_s + w_t)^2 > (chi + w_s)(chi + w_t) for every retained mode pair.
bool crude_inequality_holds(const ModeCatalog& catalog, double chi);

// Default C: fitted over t in [1e-4, 10] on a log grid.
double default_heat_kernel_constant(const ManifoldSpec& spec);

struct BoundReport {
  VariationalBound variational;
  double lower_bound = 0.0;
  double heat_kernel_constant = 0.0;
  double threshold = 0.0;
  std::optional<double> e_gr;
  double omega0_at_threshold = 0.0;
  bool variational_negative = false;
  bool variational_dominates = false;  // matrix element >= omega_0(threshold)
  bool sandwich = false;               // lower <= E_gr < threshold
};

/// Variational value, compact lower bound and the root, compared. For n = 0
/// the variational part is left at zero.
BoundReport bound_report(const Model& model, const SectorBasis& sector, double heat_kernel_constant,
                         const GroundEnergyOptions& opts = {});

}  // namespace leelab
