#include "leelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "leelab/error.hpp"

namespace leelab {

namespace {

using Vec = DenseVector<double>;

void fix_sign(Vec& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0) v = -v;
}

LowestEigen dense_lowest(const PrincipalOperator& op, double E, const SpectralOptions& opts,
                         const Vec* reference) {
  const DenseMatrix<double> m = op.matrix(E);
  Eigen::SelfAdjointEigenSolver<DenseMatrix<double>> es(m);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::no_convergence, "dense eigensolver failed for Phi(E)");
  LowestEigen out;
  const auto& vals = es.eigenvalues();
  out.value = vals[0];
  const std::size_t count = std::min<std::size_t>(opts.eigen_count, std::size_t(vals.size()));
  for (std::size_t i = 0; i < count; ++i) out.values.push_back(vals[Eigen::Index(i)]);
  out.max_abs_entry = m.cwiseAbs().maxCoeff();

  Eigen::Index deg = 1;
  while (deg < vals.size() && vals[deg] - vals[0] < 1e-10) ++deg;
  out.degenerate = deg > 1;
  if (out.degenerate && reference != nullptr && reference->size() == m.rows()) {
    const auto basis = es.eigenvectors().leftCols(deg);
    Vec proj = basis * (basis.transpose() * *reference);
    if (proj.norm() > 1e-8) {
      out.vector = proj.normalized();
      return out;
    }
  }
  out.vector = es.eigenvectors().col(0);
  fix_sign(out.vector);
  return out;
}

// Explicitly restarted Lanczos with full reorthogonalization for the lowest
// eigenpair of the matrix-free operator.
LowestEigen lanczos_lowest(const PrincipalOperator& op, double E, const SpectralOptions& opts) {
  const auto dim = Eigen::Index(op.dimension());
  const Eigen::Index krylov = std::min<Eigen::Index>(dim, 60);

  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vec start(dim);
  for (Eigen::Index i = 0; i < dim; ++i) start[i] = unif(rng);
  start.normalize();

  double max_diag = 0.0;
  for (std::size_t i = 0; i < op.dimension(); ++i)
    max_diag = std::max(max_diag, std::abs(op.diagonal(E, i)));

  LowestEigen out;
  for (int restart = 0; restart < 500; ++restart) {
    DenseMatrix<double> V(dim, krylov);
    std::vector<double> alpha, beta;
    V.col(0) = start;
    Eigen::Index used = 0;
    for (Eigen::Index j = 0; j < krylov; ++j) {
      Vec w = op.apply(E, V.col(j));
      const double a = V.col(j).dot(w);
      alpha.push_back(a);
      used = j + 1;
      for (int pass = 0; pass < 2; ++pass)
        w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
      const double b = w.norm();
      if (j + 1 == krylov || b < 1e-14 * std::max(1.0, std::abs(a))) break;
      beta.push_back(b);
      V.col(j + 1) = w / b;
    }
    DenseMatrix<double> T = DenseMatrix<double>::Zero(used, used);
    for (Eigen::Index i = 0; i < used; ++i) T(i, i) = alpha[std::size_t(i)];
    for (Eigen::Index i = 0; i + 1 < used; ++i) T(i, i + 1) = T(i + 1, i) = beta[std::size_t(i)];
    Eigen::SelfAdjointEigenSolver<DenseMatrix<double>> es(T);
    Vec x = V.leftCols(used) * es.eigenvectors().col(0);
    x.normalize();
    const double theta = es.eigenvalues()[0];
    const double res = (op.apply(E, x) - theta * x).norm();

    out.value = theta;
    out.vector = x;
    out.values.clear();
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(used, Eigen::Index(opts.eigen_count)); ++i)
      out.values.push_back(es.eigenvalues()[i]);
    out.degenerate = used > 1 && es.eigenvalues()[1] - theta < 1e-10;
    out.max_abs_entry = max_diag;
    if (res < opts.residual_tol * std::max(1.0, std::abs(theta)) || used == dim) {
      fix_sign(out.vector);
      return out;
    }
    start = x;
  }
  fail(ErrorCode::no_convergence, "Lanczos did not reach the residual tolerance");
}

bool overlap_ok(const Vec& a, const Vec& b, double threshold) {
  return std::abs(a.dot(b)) > threshold;
}

}  // namespace

LowestEigen lowest_eigen(const PrincipalOperator& op, double E, const SpectralOptions& opts,
                         const DenseVector<double>* reference) {
  if (op.dimension() <= opts.dense_ceiling) return dense_lowest(op, E, opts, reference);
  return lanczos_lowest(op, E, opts);
}

static double fh_of(const PrincipalOperator& op, double E, const Vec& v,
                    const SpectralOptions& opts) {
  if (op.dimension() <= opts.dense_ceiling) return v.dot(op.derivative(E) * v);
  return v.dot(op.apply_derivative(E, v));
}

double lowest_eigenvalue_slope(const PrincipalOperator& op, double E,
                               const SpectralOptions& opts) {
  const double h = 1e-5 * (1.0 + std::abs(E));
  const double thr = op.model().threshold();
  auto w = [&](double x) { return lowest_eigen(op, x, opts).value; };
  if (E + h <= thr) {
    auto central = [&](double s) { return (w(E + s) - w(E - s)) / (2.0 * s); };
    return (4.0 * central(h / 2) - central(h)) / 3.0;
  }
  // backward second-order differences, Richardson-extrapolated
  const double f0 = w(E);
  auto backward = [&](double s) { return (3.0 * f0 - 4.0 * w(E - s) + w(E - 2.0 * s)) / (2.0 * s); };
  return (4.0 * backward(h / 2) - backward(h)) / 3.0;
}

std::vector<FlowSample> eigen_flow(const Model& model, const SectorBasis& sector,
                                   std::span<const double> grid, const SpectralOptions& opts) {
  require(!grid.empty(), "flow grid is empty");
  require(std::is_sorted(grid.begin(), grid.end()), "flow grid must be sorted");
  PrincipalOperator op(model, sector);

  auto sample = [&](double E, const Vec* ref) {
    check_spectral_parameter(model, E);
    auto le = lowest_eigen(op, E, opts, ref);
    FlowSample s;
    s.E = E;
    s.eigenvalues = le.values;
    s.ground_vector = le.vector;
    s.degenerate = le.degenerate;
    s.fh_derivative = fh_of(op, E, le.vector, opts);
    return s;
  };

  std::vector<FlowSample> out;
  out.push_back(sample(grid[0], nullptr));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    // refine the interval (E_prev, E_next] until adjacent eigenvectors agree
    std::vector<double> pending{grid[i]};
    int depth = 0;
    while (!pending.empty()) {
      const double target = pending.back();
      FlowSample next = sample(target, &out.back().ground_vector);
      if (!overlap_ok(out.back().ground_vector, next.ground_vector, opts.overlap_threshold) &&
          depth < opts.max_refinements && next.E - out.back().E > 1e-12) {
        pending.push_back(0.5 * (out.back().E + target));
        ++depth;
        continue;
      }
      out.push_back(std::move(next));
      pending.pop_back();
    }
  }
  return out;
}

GroundEnergy ground_energy(const Model& model, const SectorBasis& sector,
                           const GroundEnergyOptions& opts) {
  PrincipalOperator op(model, sector);
  const double thr = model.threshold();
  GroundEnergy g;

  auto eval = [&](double E) { return lowest_eigen(op, E, opts.spectral); };

  auto hi_eig = eval(thr);
  if (std::abs(hi_eig.value) <= 1e-14 * std::max(1.0, hi_eig.max_abs_entry)) {
    g.E_gr = thr;
    g.bracket_lo = g.bracket_hi = thr;
    g.omega_hi = g.omega_lo = hi_eig.value;
    g.residual = std::abs(hi_eig.value);
    g.phi_max = hi_eig.max_abs_entry;
    g.at_threshold = true;
    g.ground_vector = hi_eig.vector;
    g.fh_derivative = fh_of(op, thr, hi_eig.vector, opts.spectral);
    return g;
  }
  if (hi_eig.value > 0) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "no sign change: omega_0(%.17g) = %.17g > 0 at the threshold; no bound state "
                  "below n m + mu_p in this truncation",
                  thr, hi_eig.value);
    fail(ErrorCode::no_sign_change, buf);
  }

  double hi = thr, w_hi = hi_eig.value;
  double lo = opts.lower_start.value_or(thr - 1.0);
  if (lo >= hi) lo = hi - 1.0;
  double w_lo = eval(lo).value;
  double width = hi - lo;
  for (int k = 0; w_lo <= 0; ++k) {
    if (k > 60) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "no sign change: omega_0(%.17g) = %.17g and omega_0(%.17g) = %.17g", lo, w_lo,
                    hi, w_hi);
      fail(ErrorCode::no_sign_change, buf);
    }
    hi = lo;
    w_hi = w_lo;
    width *= 2.0;
    lo = hi - width;
    w_lo = eval(lo).value;
  }

  double x = 0.5 * (lo + hi);
  LowestEigen cur;
  for (int it = 0; it < opts.max_iterations; ++it) {
    cur = lowest_eigen(op, x, opts.spectral);
    g.iterations = it + 1;
    const double w = cur.value;
    if (w > 0) {
      lo = x;
      w_lo = w;
    } else {
      hi = x;
      w_hi = w;
    }
    const double tol_w = opts.rel_tol * (1.0 + std::abs(x));
    const double tol_res = opts.rel_tol * cur.max_abs_entry;
    if (std::abs(w) <= tol_res) {
      // tighten the bracket around the converged Newton iterate
      const double d = 0.25 * tol_w;
      const double wl = eval(x - d).value, wr = eval(x + d).value;
      if (wl > 0 && wr < 0) {
        lo = x - d;
        w_lo = wl;
        hi = x + d;
        w_hi = wr;
      }
      if (hi - lo <= tol_w) break;
    }
    const double d = fh_of(op, x, cur.vector, opts.spectral);
    const double newton = d < 0 ? x - w / d : std::numeric_limits<double>::quiet_NaN();
    x = (std::isfinite(newton) && newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
  }
  if (!(std::abs(cur.value) <= opts.rel_tol * cur.max_abs_entry &&
        hi - lo <= opts.rel_tol * (1.0 + std::abs(x))))
    fail(ErrorCode::no_convergence, "ground-state root finder did not converge");

  g.E_gr = x;
  g.bracket_lo = lo;
  g.bracket_hi = hi;
  g.omega_lo = w_lo;
  g.omega_hi = w_hi;
  g.residual = std::abs(cur.value);
  g.phi_max = cur.max_abs_entry;
  g.ground_vector = cur.vector;
  g.fh_derivative = fh_of(op, x, cur.vector, opts.spectral);
  return g;
}

Wavefunction riesz_wavefunction(const Model& model, const SectorBasis& sector, double E_gr,
                                const DenseVector<double>& ground_vector,
                                const SpectralOptions& opts) {
  const int n = sector.boson_number();
  const double floor_upper = (n + 1) * model.mass();
  require(E_gr < floor_upper, "E_gr must lie below the (n+1)-boson free spectrum");
  require(std::size_t(ground_vector.size()) == sector.size(), "eigenvector length mismatch");

  PrincipalOperator op(model, sector);
  Vec v = ground_vector.normalized();
  Wavefunction wf;
  wf.fh_derivative = fh_of(op, E_gr, v, opts);
  if (!(wf.fh_derivative < 0))
    fail(ErrorCode::assertion_failed, "Feynman-Hellmann derivative is not negative");
  wf.scale = 1.0 / std::sqrt(-wf.fh_derivative);

  const auto& cat = model.catalog();
  const auto upper = enumerate_sector(cat, n + 1, std::numeric_limits<std::size_t>::max());
  const RaisingMap raise(sector, upper);
  wf.upper = Vec::Zero(Eigen::Index(upper.size()));
  for (std::size_t s = 0; s < sector.size(); ++s) {
    if (v[Eigen::Index(s)] == 0.0) continue;
    for (std::size_t k = 0; k < cat.size(); ++k) {
      const double c = model.coupling() * cat[k].f_at_impurity / std::sqrt(2.0 * cat[k].omega);
      if (c == 0.0) continue;
      wf.upper[Eigen::Index(raise.target(s, k))] += c * raise.amplitude(s, k) * v[Eigen::Index(s)];
    }
  }
  for (std::size_t u = 0; u < upper.size(); ++u)
    wf.upper[Eigen::Index(u)] *= -wf.scale / (upper[u].h0 - E_gr);
  wf.lower = wf.scale * v;
  wf.normalization = wf.upper.squaredNorm() + wf.lower.squaredNorm();
  wf.fd_derivative = lowest_eigenvalue_slope(op, E_gr, opts);
  wf.fh_identity = wf.fh_derivative / wf.fd_derivative;
  return wf;
}

}  // namespace leelab
