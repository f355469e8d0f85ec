#include "leelab/lightfront.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "leelab/error.hpp"

namespace leelab::lightfront {

namespace {

constexpr double kPi = std::numbers::pi;

// int_{v0}^inf dv / (v^2 + k)
double tail_inv(double k, double v0) { return std::atan2(std::sqrt(k), v0) / std::sqrt(k); }

// int_{v0}^inf dv / (v^2 + k)^2
double tail_inv_sq(double k, double v0) {
  return (tail_inv(k, v0) - v0 / (v0 * v0 + k)) / (2.0 * k);
}

// int_{v0}^inf dv / ((v^2 + g)^2 (v^2 + g + delta))
double radial_tail(double g, double delta, double v0) {
  const double d = g + delta;
  const double A = 1.0 / (delta * delta);
  const double t1 = A * tail_inv(d, v0);
  const double t2 = A * tail_inv(g, v0);
  const double t3 = tail_inv_sq(g, v0) / delta;
  const double closed = t1 - t2 + t3;
  const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
  if (closed > 0 && scale < 1e4 * closed) return closed;
  // partial fractions cancel badly here; integrate with v = v0 + w u / (1 - u)
  const double w = std::sqrt(v0 * v0 + g);
  auto f = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double one_minus = 1.0 - u;
    const double v = v0 + w * u / one_minus;
    const double p = v * v + g;
    return w / (one_minus * one_minus * p * p * (v * v + d));
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 18, 1e-13,
                                                                        &err);
}

}  // namespace

namespace {

// (0, inf) split at lo < hi: [0, lo] linearly, [lo, hi] in log p, and the
// tail beyond hi on the half-line map. For integrands whose features sit at
// widely separated scales.
QuadratureResult integrate_split(const std::function<double(double)>& f, double lo, double hi,
                                 double abs_tol) {
  QuadratureResult total;
  auto add = [&](const QuadratureResult& r) {
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
  };
  add(integrate(f, 0.0, lo, abs_tol / 3));
  add(integrate([&](double x) {
    const double p = std::exp(x);
    return f(p) * p;
  }, std::log(lo), std::log(hi), abs_tol / 3));
  add(integrate_half_line([&](double u) { return f(hi + u); }, hi, abs_tol / 3));
  return total;
}

}  // namespace

void Params::validate() const {
  require(std::isfinite(mass) && mass > 0, "light-front mass must be positive");
  require(mu_p > 0 && mu_p < mass, "light-front binding energy must satisfy 0 < mu_p < m");
  require(std::isfinite(coupling) && coupling >= 0, "coupling must be non-negative");
  require(n >= 0, "boson number must be non-negative");
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol) {
  QuadratureResult r;
  auto counted = [&](double x) {
    ++r.evaluations;
    return f(x);
  };
  // boost stops on error <= tol * L1; translate the absolute target using a
  // coarse L1 estimate, but never ask for more than ~1e-12 relative
  double l1 = 0.0, coarse_err = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  GK::integrate(counted, a, b, 0, 0.0, &coarse_err, &l1);
  const double tol = l1 > 0 ? std::max(0.5 * abs_tol / l1, 1e-12) : 1e-12;
  r.value = GK::integrate(counted, a, b, 18, tol, &r.error, &l1);
  if (!(r.error <= abs_tol) && !(r.error <= 1e-11 * l1))
  {
    char msg[160];
    std::snprintf(msg, sizeof msg, "quadrature tolerance not met: value %.6g, error %.3g > %.3g",
                  r.value, r.error, abs_tol);
    fail(ErrorCode::no_convergence, msg);
  }
  return r;
}

QuadratureResult integrate_half_line(const std::function<double(double)>& f, double scale,
                                     double abs_tol) {
  require(scale > 0, "half-line map scale must be positive");
  auto mapped = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double one_minus = 1.0 - u;
    return f(scale * u / one_minus) * scale / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, abs_tol);
}

double omega_lf(double p, double p_perp, double m) {
  require(p > 0, "longitudinal momentum must be positive");
  return (m * m + p * p + p_perp * p_perp) / (2.0 * p);
}

QuadratureResult k1(const Params& params, double E, double h0) {
  params.validate();
  const double m = params.mass, mu = params.mu_p;
  const double delta = h0 - E + mu;
  require(h0 >= 0, "h0 must be non-negative");
  require(delta >= 0, "K1 needs h0 - E + mu_p >= 0");
  const double pref = params.coupling * params.coupling / (4.0 * kPi);
  if (delta == 0.0 || pref == 0.0) return {};
  auto integrand = [&](double p) {
    const double A = p * p + m * m - 2.0 * p * mu;
    const double B = p * p + m * m + 2.0 * p * (h0 - E);
    const double sa = std::sqrt(A), sb = std::sqrt(B);
    // 1/sqrt(A) - 1/sqrt(B) without cancellation
    return 2.0 * p * delta / (sa * sb * (sa + sb));
  };
  auto r = integrate_half_line(integrand, m, 1e-10 / pref);
  r.value *= pref;
  r.error *= pref;
  return r;
}

double k1_log_constant(const Params& params) {
  return params.coupling * params.coupling / (8.0 * kPi);
}

double k1_log_lower_bound(const Params& params, double E, double h0) {
  const double delta = h0 - E + params.mu_p;
  require(delta >= 0, "K1 bound needs h0 - E + mu_p >= 0");
  return k1_log_constant(params) * std::log((delta + params.mass) / params.mass);
}

QuadratureResult k1_feynman_bound(const Params& params, double E, double h0) {
  params.validate();
  const double m = params.mass;
  const double delta = h0 - E + params.mu_p;
  require(delta >= 0, "K1 bound needs h0 - E + mu_p >= 0");
  // v = sqrt(1 - u) removes the endpoint singularity
  auto f = [&](double v) { return 2.0 / (m + delta * (1.0 - v * v)); };
  auto r = integrate(f, 0.0, 1.0);
  const double pref = k1_log_constant(params) * delta;
  r.value *= pref;
  r.error *= pref;
  return r;
}

double k1_chain_min_slack(const Params& params, double E, double h0, std::size_t size) {
  params.validate();
  const double m = params.mass, mu = params.mu_p;
  const double delta = h0 - E + mu;
  require(delta >= 0 && size > 0, "invalid chain check arguments");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size; ++i) {
    const double s = (double(i) + 0.5) / double(size);
    const double p = m * s / (1.0 - s);
    const double A = p * p + m * m - 2.0 * p * mu;
    const double B = p * p + m * m + 2.0 * p * (h0 - E);
    const double sa = std::sqrt(A), sb = std::sqrt(B);
    // rationalized difference >= difference with sqrt(A) raised to sqrt(B)
    const double exact = 2.0 * p * delta / (sa * sb * (sa + sb));
    const double lowered = delta * p / (B * sa);
    worst = std::min(worst, (exact - lowered) / std::max(exact, 1e-300));
    for (std::size_t j = 0; j < size; ++j) {
      const double u = (double(j) + 0.5) / double(size);
      // Feynman denominator grows when the 2 p mu_p (1 - u) term is dropped
      const double feyn = u * B + (1.0 - u) * A;
      const double dropped = p * p + m * m + 2.0 * u * p * delta;
      worst = std::min(worst, (dropped - feyn) / dropped);
      // (1 - u)^{-1/2} >= 1 in the final logarithmic step
      const double w = 1.0 / (m + delta * u);
      worst = std::min(worst, (w / std::sqrt(1.0 - u) - w) / w);
    }
  }
  return worst;
}

double transverse_integral(double a, double b, double delta) {
  require(a > delta && b > delta && delta > 0, "transverse integral needs a, b > delta > 0");
  return 2.0 * kPi / std::sqrt(a) * radial_tail(b - delta, delta, std::sqrt(a)) +
         2.0 * kPi / std::sqrt(b) * radial_tail(a - delta, delta, std::sqrt(b));
}

UNormBound u_norm_bound(const Params& params, double E) {
  params.validate();
  const double m = params.mass;
  const double n = params.n;
  const double delta = (n - 1.0) * m + params.mu_p - E;
  require(delta > 0, "u_norm_bound needs E < (n-1) m + mu_p");
  const double lam2 = params.coupling * params.coupling;

  UNormBound r;
  r.closed_form = 0.5 * lam2 * kPi * n / delta;
  r.decoupled_value = lam2 * n / (4.0 * kPi * (m + delta));
  if (lam2 == 0.0 || n == 0.0) return r;

  auto a_of = [&](double p) { return delta + (m * m + p * p) / (2.0 * p); };
  const double norm = 1.0 / (32.0 * std::pow(kPi, 4));
  // p = m t^2/(1-t)^2 absorbs the 1/sqrt(p) endpoint singularity:
  // dp / sqrt(p) = 2 sqrt(m) dt / (1-t)^2
  auto sqrt_map = [&](double t) { return m * t * t / ((1.0 - t) * (1.0 - t)); };
  auto weight = [&](double t) { return 2.0 * std::sqrt(m) / ((1.0 - t) * (1.0 - t)); };
  auto outer = [&](double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double a = a_of(sqrt_map(s));
    auto inner = [&](double t) {
      if (t <= 0.0 || t >= 1.0) return 0.0;
      return transverse_integral(a, a_of(sqrt_map(t)), delta) * weight(t);
    };
    return integrate(inner, 0.0, 1.0, 1e-10).value * weight(s);
  };
  const auto I = integrate(outer, 0.0, 1.0, 1e-8);
  const double integral = norm * I.value;
  r.quadrature_value = lam2 * n * std::sqrt(integral);
  r.error = lam2 * n * norm * I.error / (2.0 * std::sqrt(integral));
  return r;
}

double lower_bound(const Params& params) {
  params.validate();
  return params.mass * (params.n - 1) + params.mu_p -
         params.coupling * params.coupling * kPi * params.n / 2.0;
}

BetaDecay beta_decay(const Params& params, double magnitude) {
  params.validate();
  const double m = params.mass, nm = params.n * params.mass, L = magnitude;
  const double den1 = nm * nm + L * L - 4.0 * m * m;
  const double den2 = (nm + L) * (nm + L) - 4.0 * m * m;
  require(L > 0 && den1 > 0 && den2 > 0, "beta_decay magnitude too small for the closed form");

  BetaDecay r;
  r.printed = (nm + L) / den1 - 4.0 * m / den2;
  const double D = nm + L;
  r.g_norm_sq_closed = 1.0 / (4.0 * kPi * (m + D));

  // ||g||^2 = int dp/2pi int dp_perp/2pi (1/2p) / (D + omega)^2, both axes numeric
  auto outer = [&](double p) {
    const double Q = p * p + 2.0 * D * p + m * m;
    auto inner = [&](double k) {
      const double s = Q + k * k;
      return 2.0 * p / (s * s);
    };
    // even in p_perp
    return 2.0 * integrate_half_line(inner, std::sqrt(Q), 1e-14).value / (2.0 * kPi);
  };
  const double lo = std::min(m, m * m / (2.0 * D)), hi = std::max(m, 2.0 * D);
  const auto I = integrate_split(outer, lo, hi, 1e-10);
  r.g_norm_sq = I.value / (2.0 * kPi);
  r.error = I.error / (2.0 * kPi);
  return r;
}

}  // namespace leelab::lightfront
