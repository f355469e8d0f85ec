#include "leelab/bounds.hpp"

#include <cmath>

#include "leelab/error.hpp"

namespace leelab {

VariationalBound variational_upper(const Model& model, const SectorBasis& sector) {
  const auto& cat = model.catalog();
  require(cat.size() > 0 && cat[0].sigma == 0.0, "catalog must contain the zero mode");
  require(model.n() >= 1, "the trial state needs n >= 1");
  std::vector<std::uint32_t> counts(cat.size(), 0);
  counts[0] = std::uint32_t(model.n());
  const auto idx = sector.find(counts);
  require(idx.has_value(), "trial state missing from the sector");

  const auto phi = PrincipalOperator(model, sector).matrix(model.threshold());
  const double n = model.n(), m = model.mass(), mu = model.mu_p();
  const double lam2 = model.coupling() * model.coupling();
  const double f02 = cat[0].f_at_impurity * cat[0].f_at_impurity;

  VariationalBound v;
  v.matrix_element = phi(Eigen::Index(*idx), Eigen::Index(*idx));
  v.printed_closed_form = -n * lam2 * f02 / (m * (m + mu));
  v.recomputed_closed_form = -n * lam2 * f02 / (2.0 * m * (m - mu));
  return v;
}

double compact_lower(const Model& model, double heat_kernel_constant) {
  const double n = model.n(), m = model.mass();
  const double lam2 = model.coupling() * model.coupling();
  const double V = model.catalog().volume();
  return (n - 1.0) * m - n * lam2 * (1.0 / (2.0 * m * m * V) + heat_kernel_constant);
}

double invertibility_threshold(const Model& model, double heat_kernel_constant) {
  return compact_lower(model, heat_kernel_constant);
}

double relative_potential_norm(const Model& model, const SectorBasis& sector, double E) {
  PrincipalOperator op(model, sector);
  const DenseMatrix<double> phi = op.matrix(E);
  // U = diagonal kinetic part minus Phi, restricted to the exchange term
  DenseMatrix<double> u = -phi;
  DenseVector<double> dinv_sqrt(phi.rows());
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    const double h0 = sector[std::size_t(i)].h0;
    const double kin = (h0 - E + model.mu_p()) * (1.0 + k_sum(model, E, h0));
    u(i, i) += kin;
    const double d = h0 - E + model.mu_p();
    require(d > 0, "H0 - E + mu_p must be positive");
    dinv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  const DenseMatrix<double> scaled = dinv_sqrt.asDiagonal() * u * dinv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<DenseMatrix<double>> es(scaled, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool crude_inequality_holds(const ModeCatalog& catalog, double chi) {
  for (const auto& s : catalog)
    for (const auto& t : catalog) {
      const double lhs = (chi + s.omega + t.omega) * (chi + s.omega + t.omega);
      if (!(lhs > (chi + s.omega) * (chi + t.omega))) return false;
    }
  return true;
}

double default_heat_kernel_constant(const ManifoldSpec& spec) {
  const auto grid = logspace(1e-4, 10.0, 200);
  return heat_kernel_bound_constant(spec, grid);
}

BoundReport bound_report(const Model& model, const SectorBasis& sector, double heat_kernel_constant,
                         const GroundEnergyOptions& opts) {
  BoundReport r;
  r.heat_kernel_constant = heat_kernel_constant;
  r.lower_bound = compact_lower(model, heat_kernel_constant);
  r.threshold = model.threshold();
  if (model.n() >= 1) r.variational = variational_upper(model, sector);

  PrincipalOperator op(model, sector);
  r.omega0_at_threshold = lowest_eigen(op, r.threshold, opts.spectral).value;

  auto ground_opts = opts;
  if (!ground_opts.lower_start && r.lower_bound < r.threshold)
    ground_opts.lower_start = r.lower_bound;
  const auto root = ground_energy(model, sector, ground_opts);
  r.e_gr = root.E_gr;

  r.variational_negative = r.variational.matrix_element < 0.0;
  r.variational_dominates = r.variational.matrix_element >= r.omega0_at_threshold - 1e-10;
  r.sandwich = r.lower_bound <= root.E_gr && root.E_gr < r.threshold;
  return r;
}

}  // namespace leelab
