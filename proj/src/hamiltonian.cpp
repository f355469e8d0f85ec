#include "leelab/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "leelab/error.hpp"

namespace leelab {

namespace {

template <class S>
DenseMatrix<S> refined_inverse(const DenseMatrix<S>& a, double* condition) {
  Eigen::PartialPivLU<DenseMatrix<S>> lu(a);
  const double rc = lu.rcond();
  if (!(rc > 0) || !std::isfinite(rc)) fail(ErrorCode::singular, "matrix is numerically singular");
  if (condition) *condition = 1.0 / rc;
  const auto I = DenseMatrix<S>::Identity(a.rows(), a.cols());
  DenseMatrix<S> x = lu.solve(I);
  // one step of iterative refinement
  x += lu.solve(DenseMatrix<S>(I - a * x));
  return x;
}

}  // namespace

DenseMatrix<double> BlockHamiltonian::full() const {
  const auto nu = upper_dim(), nl = lower_dim();
  DenseMatrix<double> h = DenseMatrix<double>::Zero(nu + nl, nu + nl);
  h.topLeftCorner(nu, nu).diagonal() = upper_h0;
  h.bottomRightCorner(nl, nl).diagonal() = lower_h0.array() + bare_mass;
  h.bottomLeftCorner(nl, nu) = coupling;
  h.topRightCorner(nu, nl) = coupling.transpose();
  return h;
}

BlockHamiltonian assemble_h(const Model& model, std::size_t ceiling) {
  const auto& cat = model.catalog();
  BlockHamiltonian h{enumerate_sector(cat, model.n() + 1, ceiling),
                     enumerate_sector(cat, model.n(), ceiling),
                     {},
                     {},
                     bare_mass(model).bare_mass,
                     {}};
  h.upper_h0.resize(Eigen::Index(h.upper.size()));
  for (std::size_t i = 0; i < h.upper.size(); ++i) h.upper_h0[Eigen::Index(i)] = h.upper[i].h0;
  h.lower_h0.resize(Eigen::Index(h.lower.size()));
  for (std::size_t i = 0; i < h.lower.size(); ++i) h.lower_h0[Eigen::Index(i)] = h.lower[i].h0;

  h.coupling = DenseMatrix<double>::Zero(h.lower_dim(), h.upper_dim());
  const RaisingMap raise(h.lower, h.upper);
  for (std::size_t s = 0; s < h.lower.size(); ++s)
    for (std::size_t k = 0; k < cat.size(); ++k) {
      const double c = model.coupling() * cat[k].f_at_impurity / std::sqrt(2.0 * cat[k].omega);
      // <s| lambda phi^(+) |u> = c_k sqrt(n_k(u)) with u = a^dagger_k s
      h.coupling(Eigen::Index(s), Eigen::Index(raise.target(s, k))) += c * raise.amplitude(s, k);
    }
  return h;
}

template <class S>
DenseMatrix<S> BlockResolvent<S>::full() const {
  const auto nu = alpha.rows(), nl = delta.rows();
  DenseMatrix<S> r(nu + nl, nu + nl);
  r.topLeftCorner(nu, nu) = alpha;
  r.topRightCorner(nu, nl) = gamma;
  r.bottomLeftCorner(nl, nu) = beta;
  r.bottomRightCorner(nl, nl) = delta;
  return r;
}

template <class S>
BlockResolvent<S> block_resolvent(const Model& model, const BlockHamiltonian& h, S E) {
  require(h.lower.mode_count() == model.catalog().size(), "Hamiltonian built over another catalog");
  BlockResolvent<S> r;
  r.E = E;
  DenseVector<S> ainv(h.upper_dim());
  for (Eigen::Index i = 0; i < h.upper_dim(); ++i) {
    const S d = h.upper_h0[i] - E;
    if (std::abs(d) == 0.0) fail(ErrorCode::singular, "H0 - E is singular on the upper block");
    ainv[i] = S(1) / d;
  }
  const DenseMatrix<S> phi = PrincipalOperator(model, h.lower).matrix(E);
  r.delta = refined_inverse(phi, &r.phi_condition);
  const DenseMatrix<S> b = h.coupling.template cast<S>();
  const DenseMatrix<S> b_ainv = b * ainv.asDiagonal();
  r.beta = -r.delta * b_ainv;
  r.gamma = -(ainv.asDiagonal() * b.transpose()) * r.delta;
  r.alpha = -r.gamma * b_ainv;
  r.alpha.diagonal() += ainv;
  return r;
}

template <class S>
DenseMatrix<S> direct_resolvent(const BlockHamiltonian& h, S E) {
  DenseMatrix<S> a = h.full().template cast<S>();
  a.diagonal().array() -= E;
  return refined_inverse(a, nullptr);
}

double pseudo_resolvent_residual(const Model& model, const BlockHamiltonian& h, Complex E1,
                                 Complex E2) {
  if (E1 == E2) return 0.0;
  const auto r1 = block_resolvent(model, h, E1).full();
  const auto r2 = block_resolvent(model, h, E2).full();
  return (r1 - r2 - (E1 - E2) * (r1 * r2)).cwiseAbs().maxCoeff();
}

std::vector<DenseVector<double>> decay_probes(const BlockHamiltonian& h, std::size_t random_count,
                                              std::uint64_t seed) {
  const auto dim = h.dimension();
  std::vector<DenseVector<double>> probes;
  for (Eigen::Index i = 0; i < dim; ++i) probes.push_back(DenseVector<double>::Unit(dim, i));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t k = 0; k < random_count; ++k) {
    DenseVector<double> v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = unif(rng);
    probes.push_back(v.normalized());
  }
  return probes;
}

std::vector<DecayRow> decay_check(const Model& model, const BlockHamiltonian& h,
                                  std::span<const double> magnitudes,
                                  std::span<const DenseVector<double>> probes) {
  std::vector<DecayRow> rows;
  for (double mag : magnitudes) {
    require(mag > 0, "decay grid magnitudes must be positive");
    const auto r = block_resolvent(model, h, -mag);
    const DenseMatrix<double> full = r.full();
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const auto& x = probes[p];
      require(x.size() == h.dimension(), "probe length does not match the Hamiltonian");
      DecayRow row;
      row.lambda_k = mag;
      row.probe = p;
      row.norm = (mag * (full * x) - x).norm();
      row.beta_norm = (mag * (r.beta * x.head(h.upper_dim()))).norm();
      rows.push_back(row);
    }
  }
  return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, "log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double lowering_norm_ratio(const SectorBasis& sector, const SectorBasis& below,
                           const DenseVector<double>& g, const DenseVector<double>& f) {
  const RaisingMap raise(below, sector);
  require(std::size_t(g.size()) == sector.mode_count(), "test function length mismatch");
  require(std::size_t(f.size()) == sector.size(), "state length mismatch");
  DenseVector<double> out = DenseVector<double>::Zero(Eigen::Index(below.size()));
  for (std::size_t s = 0; s < below.size(); ++s)
    for (std::size_t k = 0; k < sector.mode_count(); ++k)
      out[Eigen::Index(s)] +=
          g[Eigen::Index(k)] * raise.amplitude(s, k) * f[Eigen::Index(raise.target(s, k))];
  return out.norm() / (g.norm() * f.norm());
}

template struct BlockResolvent<double>;
template struct BlockResolvent<Complex>;
template BlockResolvent<double> block_resolvent(const Model&, const BlockHamiltonian&, double);
template BlockResolvent<Complex> block_resolvent(const Model&, const BlockHamiltonian&, Complex);
template DenseMatrix<double> direct_resolvent(const BlockHamiltonian&, double);
template DenseMatrix<Complex> direct_resolvent(const BlockHamiltonian&, Complex);

}  // namespace leelab
