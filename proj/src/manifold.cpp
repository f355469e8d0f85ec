#include "leelab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <tuple>

#include "leelab/error.hpp"

namespace leelab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTailRelTol = 1e-14;
constexpr long kMaxSeriesTerms = 50'000'000;

// sum_{k in Z} exp(-c k^2), truncated once the geometric tail envelope is
// below kTailRelTol of the partial sum.
double theta_sum(double c) {
  double sum = 1.0;
  for (long k = 1; k < kMaxSeriesTerms; ++k) {
    const double term = std::exp(-c * double(k) * double(k));
    sum += 2.0 * term;
    const double next = std::exp(-c * double(k + 1) * double(k + 1));
    const double ratio = std::exp(-c * double(2 * k + 3));
    const double tail = 2.0 * next / (1.0 - ratio);
    if (tail < kTailRelTol * sum) return sum;
  }
  fail(ErrorCode::no_convergence, "heat kernel: theta series did not converge at the term ceiling");
}

double reduce_mod(double x, double period) {
  double r = std::fmod(x, period);
  return r < 0 ? r + period : r;
}

}  // namespace

ManifoldSpec ManifoldSpec::torus(double L1, double L2, double x1, double x2) {
  ManifoldSpec s;
  s.kind = ManifoldKind::torus;
  s.L1 = L1;
  s.L2 = L2;
  s.impurity[0] = x1;
  s.impurity[1] = x2;
  s.validate();
  s.impurity[0] = reduce_mod(x1, L1);
  s.impurity[1] = reduce_mod(x2, L2);
  return s;
}

ManifoldSpec ManifoldSpec::sphere(double radius, double theta, double phi) {
  ManifoldSpec s;
  s.kind = ManifoldKind::sphere;
  s.radius = radius;
  s.impurity[0] = theta;
  s.impurity[1] = phi;
  s.validate();
  return s;
}

double ManifoldSpec::volume() const {
  return kind == ManifoldKind::torus ? L1 * L2 : 4.0 * kPi * radius * radius;
}

void ManifoldSpec::validate() const {
  if (kind == ManifoldKind::torus) {
    require(std::isfinite(L1) && std::isfinite(L2) && L1 > 0 && L2 > 0,
            "torus side lengths must be positive");
    require(std::isfinite(impurity[0]) && std::isfinite(impurity[1]),
            "torus impurity coordinates must be finite");
  } else {
    require(std::isfinite(radius) && radius > 0, "sphere radius must be positive");
    require(impurity[0] >= 0 && impurity[0] <= kPi,
            "sphere impurity polar angle must lie in [0, pi]");
    require(std::isfinite(impurity[1]), "sphere impurity azimuth must be finite");
  }
}

ModeCatalog::ModeCatalog(ManifoldSpec spec, double cutoff, double mass, bool prune_uncoupled,
                         std::vector<Mode> modes)
    : spec_(spec),
      cutoff_(cutoff),
      mass_(mass),
      volume_(spec.volume()),
      prune_uncoupled_(prune_uncoupled),
      modes_(std::move(modes)) {}

void ModeCatalog::write_csv(std::ostream& os) const {
  os << "index,sigma,omega,f_at_impurity\n";
  char buf[160];
  for (const auto& m : modes_) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", m.index, m.sigma, m.omega,
                  m.f_at_impurity);
    os << buf;
  }
}

ModeCatalog build_catalog(const ManifoldSpec& spec, double cutoff, double mass,
                          bool prune_uncoupled, std::size_t mode_ceiling) {
  spec.validate();
  require(std::isfinite(cutoff) && cutoff >= 0, "cutoff must be non-negative");
  require(std::isfinite(mass) && mass > 0, "boson mass must be positive");

  const double V = spec.volume();
  const double coupling_floor = 1e-12 / std::sqrt(V);
  std::vector<Mode> modes;

  auto push = [&](double sigma, double f, int q1, int q2, int parity) {
    if (prune_uncoupled && std::abs(f) <= coupling_floor) return;
    if (modes.size() >= mode_ceiling)
      fail(ErrorCode::ceiling_exceeded,
           "mode catalog exceeds the mode ceiling of " + std::to_string(mode_ceiling));
    Mode m;
    m.sigma = sigma;
    m.f_at_impurity = f;
    m.omega = std::sqrt(sigma + mass * mass);
    m.q1 = q1;
    m.q2 = q2;
    m.parity = parity;
    modes.push_back(m);
  };

  if (spec.kind == ManifoldKind::torus) {
    const double g1 = 2.0 * kPi / spec.L1;
    const double g2 = 2.0 * kPi / spec.L2;
    const long K1 = static_cast<long>(std::floor(std::sqrt(cutoff) / g1));
    const long K2 = static_cast<long>(std::floor(std::sqrt(cutoff) / g2));
    const double amp = std::sqrt(2.0 / V);
    push(0.0, 1.0 / std::sqrt(V), 0, 0, 0);
    for (long k1 = 0; k1 <= K1; ++k1) {
      for (long k2 = -K2; k2 <= K2; ++k2) {
        // one representative of each +-k pair
        if (k1 == 0 && k2 <= 0) continue;
        const double sigma = (g1 * k1) * (g1 * k1) + (g2 * k2) * (g2 * k2);
        if (sigma > cutoff) continue;
        const double phase = g1 * k1 * spec.impurity[0] + g2 * k2 * spec.impurity[1];
        push(sigma, amp * std::cos(phase), int(k1), int(k2), 0);
        push(sigma, amp * std::sin(phase), int(k1), int(k2), 1);
      }
    }
  } else {
    const double r = spec.radius;
    const double theta = spec.impurity[0];
    const double phi = spec.impurity[1];
    for (int l = 0;; ++l) {
      const double sigma = double(l) * double(l + 1) / (r * r);
      if (sigma > cutoff) break;
      push(sigma, std::sph_legendre(unsigned(l), 0u, theta) / r, l, 0, 0);
      for (int m = 1; m <= l; ++m) {
        const double y = std::sqrt(2.0) * std::sph_legendre(unsigned(l), unsigned(m), theta) / r;
        push(sigma, y * std::cos(m * phi), l, m, 0);
        push(sigma, y * std::sin(m * phi), l, m, 1);
      }
    }
  }

  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    return std::tie(a.sigma, a.q1, a.q2, a.parity) < std::tie(b.sigma, b.q1, b.q2, b.parity);
  });
  for (std::size_t i = 0; i < modes.size(); ++i) modes[i].index = i;
  return ModeCatalog(spec, cutoff, mass, prune_uncoupled, std::move(modes));
}

double heat_kernel_diag(const ManifoldSpec& spec, double t) {
  spec.validate();
  require(std::isfinite(t) && t > 0, "heat kernel time must be positive");
  if (spec.kind == ManifoldKind::torus) {
    // Full degenerate levels sum to (degeneracy)/V at any point, so the
    // spectral sum factorizes into one theta series per direction.
    const double c1 = std::pow(2.0 * kPi / spec.L1, 2) * t;
    const double c2 = std::pow(2.0 * kPi / spec.L2, 2) * t;
    return theta_sum(c1) * theta_sum(c2) / spec.volume();
  }
  const double r2 = spec.radius * spec.radius;
  const double s = t / r2;
  double sum = 0.0;
  for (long l = 0; l < kMaxSeriesTerms; ++l) {
    const double term = double(2 * l + 1) * std::exp(-double(l) * double(l + 1) * s);
    sum += term;
    const double q = double(2 * l + 5) / double(2 * l + 3) * std::exp(-2.0 * double(l + 2) * s);
    const double next = double(2 * l + 3) * std::exp(-double(l + 1) * double(l + 2) * s);
    if (q < 1.0 && next / (1.0 - q) < kTailRelTol * sum) return sum / (4.0 * kPi * r2);
  }
  fail(ErrorCode::no_convergence, "heat kernel: sphere series did not converge at the term ceiling");
}

double heat_kernel_diag_images(const ManifoldSpec& spec, double t) {
  spec.validate();
  require(spec.kind == ManifoldKind::torus, "image sum is only available on the torus");
  require(std::isfinite(t) && t > 0, "heat kernel time must be positive");
  const double c1 = spec.L1 * spec.L1 / (4.0 * t);
  const double c2 = spec.L2 * spec.L2 / (4.0 * t);
  return theta_sum(c1) * theta_sum(c2) / (4.0 * kPi * t);
}

double heat_kernel_bound_constant(const ManifoldSpec& spec, std::span<const double> t_grid) {
  require(!t_grid.empty(), "heat kernel bound needs a non-empty time grid");
  const double inv_volume = 1.0 / spec.volume();
  double c = 0.0;
  for (double t : t_grid) {
    require(t > 0, "heat kernel grid times must be positive");
    c = std::max(c, t * (heat_kernel_diag(spec, t) - inv_volume));
  }
  return c;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  require(lo > 0 && hi > 0 && count > 0, "logspace needs positive endpoints");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(a + (b - a) * double(i) / double(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  require(count > 0, "linspace needs at least one point");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * double(i) / double(count - 1);
  out.back() = hi;
  return out;
}

}  // namespace leelab
