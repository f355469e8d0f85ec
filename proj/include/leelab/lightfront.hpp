#pragma once

#include <cstddef>
#include <functional>

namespace leelab::lightfront {

struct Params {
  double mass = 1.0;
  double mu_p = 0.5;
  double coupling = 1.0;
  int n = 2;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

// Adaptive Gauss-Kronrod on [a, b]; throws no_convergence when the error
// estimate exceeds `abs_tol`.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-10);

// Integral over (0, inf) after mapping p = scale * u / (1 - u).
QuadratureResult integrate_half_line(const std::function<double(double)>& f, double scale,
                                     double abs_tol = 1e-10);

/// (m^2 + p^2 + p_perp^2) / (2 p), minimized at p = m, p_perp = 0.
double omega_lf(double p, double p_perp, double m);

/// K_1(E) at the scalar stand-in h0 for H_0, after the exact transverse
/// integration:
///   lambda^2/2 int dp/2pi [ (p^2+m^2-2p mu_p)^{-1/2} - (p^2+m^2+2p(h0-E))^{-1/2} ].
QuadratureResult k1(const Params& params, double E, double h0);

// Constant of the logarithmic lower bound K_1 >= C0 ln((h0-E+mu_p+m)/m).
double k1_log_constant(const Params& params);
double k1_log_lower_bound(const Params& params, double E, double h0);

// Intermediate Feynman-parameter form of the lower-bound chain:
//   lambda^2/(8 pi) D int_0^1 (1-u)^{-1/2} / (m + D u) du,  D = h0 - E + mu_p.
QuadratureResult k1_feynman_bound(const Params& params, double E, double h0);

/// Smallest slack over a size x size (p, u) grid of the pointwise inequalities
/// used in the K_1 lower-bound chain. Non-negative means every step holds.
double k1_chain_min_slack(const Params& params, double E, double h0, std::size_t size = 100);

struct UNormBound {
  double quadrature_value = 0.0;  // lambda^2 n [4D integral]^{1/2}
  double decoupled_value = 0.0;   // lambda^2 n / (4 pi (m + Delta)), the exact middle line
  double closed_form = 0.0;       // (lambda^2/2) pi n / Delta
  double error = 0.0;
};

/// Delta = (n-1) m + mu_p - E must be positive.
UNormBound u_norm_bound(const Params& params, double E);

// Radial/angular-reduced transverse integral
//   int dx dy / ((c0 + x^2 + y^2)^2 (a + x^2)(b + y^2)),  c0 = a + b - delta.
double transverse_integral(double a, double b, double delta);

/// m (n-1) + mu_p - lambda^2 pi n / 2.
double lower_bound(const Params& params);

struct BetaDecay {
  double printed = 0.0;              // the displayed closed form
  double g_norm_sq = 0.0;            // quadrature of ||g||^2
  double g_norm_sq_closed = 0.0;     // 1 / (4 pi (m + n m + |l|))
  double error = 0.0;
};

BetaDecay beta_decay(const Params& params, double magnitude);

}  // namespace leelab::lightfront
