#include "leelab/principal.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "leelab/error.hpp"

namespace leelab {

namespace {

double real_part(double x) { return x; }
double real_part(Complex x) { return x.real(); }

}  // namespace

RenormResult bare_mass(const Model& model) {
  const auto& cat = model.catalog();
  const double lam2 = model.coupling() * model.coupling();
  const double mu_p = model.mu_p();

  RenormResult r;
  r.cutoff = cat.cutoff();
  double sum = 0.0;
  for (const auto& mode : cat) {
    const double f2 = mode.f_at_impurity * mode.f_at_impurity;
    sum += lam2 * f2 / (2.0 * mode.omega * (mode.omega - mu_p));
    const bool new_level =
        r.level_sigma.empty() ||
        std::abs(mode.sigma - r.level_sigma.back()) > 1e-12 * std::max(1.0, mode.sigma);
    if (new_level) {
      r.level_sigma.push_back(mode.sigma);
      r.level_partial_sum.push_back(sum);
    } else {
      r.level_partial_sum.back() = sum;
    }
  }
  r.bare_mass = mu_p + sum;
  const double lambda = cat.cutoff();
  const double w = std::sqrt(lambda + model.mass() * model.mass());
  r.tail_estimate = lam2 / (4.0 * std::numbers::pi) * lambda / (2.0 * w * (w - mu_p));
  return r;
}

template <class S>
void check_spectral_parameter(const Model& model, S E) {
  const double re = real_part(E);
  const double thr = model.threshold();
  if (!std::isfinite(re) || re > thr + 1e-14 * std::max(1.0, std::abs(thr))) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "spectral parameter Re(E) = %.17g lies above the threshold n m + mu_p = %.17g",
                  re, thr);
    fail(ErrorCode::domain_violation, buf);
  }
}

template <class S>
S k_sum(const Model& model, S E, double h0) {
  check_spectral_parameter(model, E);
  const double lam2 = model.coupling() * model.coupling();
  if (lam2 == 0.0) return S(0);
  S sum(0);
  for (const auto& mode : model.catalog()) {
    const double f2 = mode.f_at_impurity * mode.f_at_impurity;
    if (f2 == 0.0) continue;
    const double w = lam2 * f2 / (2.0 * mode.omega * (mode.omega - model.mu_p()));
    sum += w / (h0 - E + mode.omega);
  }
  return sum;
}

template <class S>
S k_sum_derivative(const Model& model, S E, double h0) {
  check_spectral_parameter(model, E);
  const double lam2 = model.coupling() * model.coupling();
  if (lam2 == 0.0) return S(0);
  S sum(0);
  for (const auto& mode : model.catalog()) {
    const double f2 = mode.f_at_impurity * mode.f_at_impurity;
    if (f2 == 0.0) continue;
    const double w = lam2 * f2 / (2.0 * mode.omega * (mode.omega - model.mu_p()));
    const S den = h0 - E + mode.omega;
    sum += w / (den * den);
  }
  return sum;
}

double k_sum_tail_estimate(const Model& model, double E, double h0) {
  // With d sigma = 2 omega d omega the Weyl integral reduces to
  //   lambda^2/(4 pi) int_{omega_c}^inf d omega / ((omega - mu_p)(omega + c)).
  const double lam2 = model.coupling() * model.coupling();
  const double c = h0 - E;
  const double mu_p = model.mu_p();
  const double wc = std::sqrt(model.catalog().cutoff() + model.mass() * model.mass());
  const double pref = lam2 / (4.0 * std::numbers::pi);
  const double s = c + mu_p;
  if (std::abs(s) < 1e-12) return pref / (wc - mu_p);
  return pref * std::log((wc + c) / (wc - mu_p)) / s;
}

PrincipalOperator::PrincipalOperator(const Model& model, const SectorBasis& sector)
    : model_(&model), sector_(&sector) {
  require(sector.mode_count() == model.catalog().size(), "sector built over a different catalog");
  require(sector.boson_number() == model.n(), "sector boson number differs from the model's n");
  const auto& cat = model.catalog();
  couplings_.resize(cat.size());
  for (std::size_t k = 0; k < cat.size(); ++k) {
    couplings_[k] = model.coupling() * cat[k].f_at_impurity / std::sqrt(2.0 * cat[k].omega);
    if (couplings_[k] != 0.0) active_.push_back(k);
  }
  if (sector.boson_number() > 0) {
    const auto lower = enumerate_sector(cat, sector.boson_number() - 1,
                                        std::numeric_limits<std::size_t>::max());
    lower_h0_.reserve(lower.size());
    for (const auto& occ : lower.states()) lower_h0_.push_back(occ.h0);
    raising_ = std::make_unique<RaisingMap>(lower, sector);
  }
}

double PrincipalOperator::diagonal(double E, std::size_t i) const {
  const double h0 = (*sector_)[i].h0;
  return (h0 - E + model_->mu_p()) * (1.0 + k_sum(*model_, E, h0));
}

template <class S>
DenseMatrix<S> PrincipalOperator::matrix(S E) const {
  check_spectral_parameter(*model_, E);
  const std::size_t dim = sector_->size();
  DenseMatrix<S> m = DenseMatrix<S>::Zero(Eigen::Index(dim), Eigen::Index(dim));
  const double mu_p = model_->mu_p();
  for (std::size_t i = 0; i < dim; ++i) {
    const double h0 = (*sector_)[i].h0;
    m(Eigen::Index(i), Eigen::Index(i)) = (h0 - E + mu_p) * (S(1) + k_sum(*model_, E, h0));
  }
  if (!raising_) return m;
  const auto& cat = model_->catalog();
  for (std::size_t s = 0; s < lower_h0_.size(); ++s) {
    const S base = lower_h0_[s] - E;
    for (auto sig : active_) {
      const auto row = Eigen::Index(raising_->target(s, sig));
      const double cs = couplings_[sig] * raising_->amplitude(s, sig);
      for (auto tau : active_) {
        const auto col = Eigen::Index(raising_->target(s, tau));
        const double ct = couplings_[tau] * raising_->amplitude(s, tau);
        m(row, col) -= cs * ct / (base + cat[sig].omega + cat[tau].omega);
      }
    }
  }
  return m;
}

template <class S>
DenseMatrix<S> PrincipalOperator::derivative(S E) const {
  check_spectral_parameter(*model_, E);
  const std::size_t dim = sector_->size();
  DenseMatrix<S> m = DenseMatrix<S>::Zero(Eigen::Index(dim), Eigen::Index(dim));
  const double mu_p = model_->mu_p();
  for (std::size_t i = 0; i < dim; ++i) {
    const double h0 = (*sector_)[i].h0;
    m(Eigen::Index(i), Eigen::Index(i)) =
        -(S(1) + k_sum(*model_, E, h0)) + (h0 - E + mu_p) * k_sum_derivative(*model_, E, h0);
  }
  if (!raising_) return m;
  const auto& cat = model_->catalog();
  for (std::size_t s = 0; s < lower_h0_.size(); ++s) {
    const S base = lower_h0_[s] - E;
    for (auto sig : active_) {
      const auto row = Eigen::Index(raising_->target(s, sig));
      const double cs = couplings_[sig] * raising_->amplitude(s, sig);
      for (auto tau : active_) {
        const auto col = Eigen::Index(raising_->target(s, tau));
        const double ct = couplings_[tau] * raising_->amplitude(s, tau);
        const S den = base + cat[sig].omega + cat[tau].omega;
        m(row, col) -= cs * ct / (den * den);
      }
    }
  }
  return m;
}

DenseVector<double> PrincipalOperator::apply(double E, const DenseVector<double>& x) const {
  check_spectral_parameter(*model_, E);
  const std::size_t dim = sector_->size();
  require(std::size_t(x.size()) == dim, "vector length does not match the sector");
  DenseVector<double> y(x.size());
  for (std::size_t i = 0; i < dim; ++i) y[Eigen::Index(i)] = diagonal(E, i) * x[Eigen::Index(i)];
  if (!raising_) return y;
  const auto& cat = model_->catalog();
  for (std::size_t s = 0; s < lower_h0_.size(); ++s) {
    const double base = lower_h0_[s] - E;
    for (auto sig : active_) {
      const double cs = couplings_[sig] * raising_->amplitude(s, sig);
      double acc = 0.0;
      for (auto tau : active_) {
        const double ct = couplings_[tau] * raising_->amplitude(s, tau);
        acc += ct * x[Eigen::Index(raising_->target(s, tau))] /
               (base + cat[sig].omega + cat[tau].omega);
      }
      y[Eigen::Index(raising_->target(s, sig))] -= cs * acc;
    }
  }
  return y;
}

DenseVector<double> PrincipalOperator::apply_derivative(double E,
                                                        const DenseVector<double>& x) const {
  check_spectral_parameter(*model_, E);
  const std::size_t dim = sector_->size();
  require(std::size_t(x.size()) == dim, "vector length does not match the sector");
  const double mu_p = model_->mu_p();
  DenseVector<double> y(x.size());
  for (std::size_t i = 0; i < dim; ++i) {
    const double h0 = (*sector_)[i].h0;
    const double d = -(1.0 + k_sum(*model_, E, h0)) + (h0 - E + mu_p) * k_sum_derivative(*model_, E, h0);
    y[Eigen::Index(i)] = d * x[Eigen::Index(i)];
  }
  if (!raising_) return y;
  const auto& cat = model_->catalog();
  for (std::size_t s = 0; s < lower_h0_.size(); ++s) {
    const double base = lower_h0_[s] - E;
    for (auto sig : active_) {
      const double cs = couplings_[sig] * raising_->amplitude(s, sig);
      double acc = 0.0;
      for (auto tau : active_) {
        const double ct = couplings_[tau] * raising_->amplitude(s, tau);
        const double den = base + cat[sig].omega + cat[tau].omega;
        acc += ct * x[Eigen::Index(raising_->target(s, tau))] / (den * den);
      }
      y[Eigen::Index(raising_->target(s, sig))] -= cs * acc;
    }
  }
  return y;
}

template <class S>
PrincipalMatrix<S> assemble_phi(const Model& model, const SectorBasis& sector, S E) {
  PrincipalOperator op(model, sector);
  return {E, model.catalog().cutoff(), op.matrix(E)};
}

template <class S>
DenseMatrix<S> phi_derivative(const Model& model, const SectorBasis& sector, S E) {
  PrincipalOperator op(model, sector);
  return op.derivative(E);
}

void write_triplets(std::ostream& os, const DenseMatrix<double>& m) {
  os << "row,col,value\n";
  char buf[96];
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%td,%td,%.17g\n", i, j, m(i, j));
      os << buf;
    }
}

template void check_spectral_parameter(const Model&, double);
template void check_spectral_parameter(const Model&, Complex);
template double k_sum(const Model&, double, double);
template Complex k_sum(const Model&, Complex, double);
template double k_sum_derivative(const Model&, double, double);
template Complex k_sum_derivative(const Model&, Complex, double);
template DenseMatrix<double> PrincipalOperator::matrix(double) const;
template DenseMatrix<Complex> PrincipalOperator::matrix(Complex) const;
template DenseMatrix<double> PrincipalOperator::derivative(double) const;
template DenseMatrix<Complex> PrincipalOperator::derivative(Complex) const;
template PrincipalMatrix<double> assemble_phi(const Model&, const SectorBasis&, double);
template PrincipalMatrix<Complex> assemble_phi(const Model&, const SectorBasis&, Complex);
template DenseMatrix<double> phi_derivative(const Model&, const SectorBasis&, double);
template DenseMatrix<Complex> phi_derivative(const Model&, const SectorBasis&, Complex);

}  // namespace leelab
