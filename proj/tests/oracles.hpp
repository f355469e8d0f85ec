#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's sector, principal-operator or resolvent code.

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct ModeData {
  double sigma;
  double omega;
  double f;
};

using Counts = std::vector<int>;

inline void enumerate(std::size_t modes, int n, std::size_t start, Counts& cur,
                      std::vector<Counts>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  for (std::size_t k = start; k < modes; ++k) {
    ++cur[k];
    enumerate(modes, n - 1, k, cur, out);
    --cur[k];
  }
}

inline std::vector<Counts> states(std::size_t modes, int n) {
  std::vector<Counts> out;
  Counts cur(modes, 0);
  if (n >= 0) enumerate(modes, n, 0, cur, out);
  return out;
}

inline double energy(const Counts& c, const std::vector<ModeData>& modes) {
  double e = 0;
  for (std::size_t k = 0; k < c.size(); ++k) e += c[k] * modes[k].omega;
  return e;
}

// mu(Lambda), summed from the largest sigma down.
inline double bare_mass(const std::vector<ModeData>& modes, double lambda, double mu_p) {
  double s = 0;
  for (std::size_t k = modes.size(); k-- > 0;) {
    const auto& md = modes[k];
    s += lambda * lambda * md.f * md.f / (2 * md.omega * (md.omega - mu_p));
  }
  return mu_p + s;
}

// Normal-ordered cutoff form
//   Phi_L(E) = H0 - E + mu(L) - sum_s c_s^2 (H0 - E + w_s)^{-1}
//              - sum_{s,t} c_s c_t a_t^dag (H0 - E + w_s + w_t)^{-1} a_s
// on the n-boson states in `basis` order, c_s = lambda f_s / sqrt(2 w_s).
template <class S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> phi_cutoff(const std::vector<ModeData>& modes,
                                                            double lambda, double mu_bare,
                                                            const std::vector<Counts>& basis,
                                                            S E) {
  const std::size_t M = modes.size();
  std::map<Counts, std::size_t> index;
  for (std::size_t i = 0; i < basis.size(); ++i) index[basis[i]] = i;
  std::vector<double> c(M);
  for (std::size_t k = 0; k < M; ++k) c[k] = lambda * modes[k].f / std::sqrt(2 * modes[k].omega);

  const auto dim = Eigen::Index(basis.size());
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> phi =
      Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const double hj = energy(basis[j], modes);
    S diag = S(hj) - E + S(mu_bare);
    for (std::size_t s = 0; s < M; ++s) diag -= S(c[s] * c[s]) / (S(hj) - E + S(modes[s].omega));
    phi(Eigen::Index(j), Eigen::Index(j)) += diag;

    for (std::size_t s = 0; s < M; ++s) {
      if (basis[j][s] == 0) continue;
      Counts low = basis[j];
      const double a_s = std::sqrt(double(low[s]));
      --low[s];
      const double hl = energy(low, modes);
      for (std::size_t t = 0; t < M; ++t) {
        Counts up = low;
        const double a_t = std::sqrt(double(up[t] + 1));
        ++up[t];
        const std::size_t i = index.at(up);
        phi(Eigen::Index(i), Eigen::Index(j)) -=
            S(c[s] * c[t] * a_s * a_t) / (S(hl) - E + S(modes[s].omega + modes[t].omega));
      }
    }
  }
  return phi;
}

// Explicit truncated Hamiltonian [[H0_up, b^T], [b, H0_low + mu]] in the
// oracle's own state order: upper (n+1) states first.
inline Eigen::MatrixXd hamiltonian(const std::vector<ModeData>& modes, double lambda,
                                   double mu_bare, int n) {
  const auto up = states(modes.size(), n + 1);
  const auto low = states(modes.size(), n);
  std::map<Counts, std::size_t> up_index;
  for (std::size_t i = 0; i < up.size(); ++i) up_index[up[i]] = i;
  const auto du = Eigen::Index(up.size()), dl = Eigen::Index(low.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(du + dl, du + dl);
  for (Eigen::Index i = 0; i < du; ++i) h(i, i) = energy(up[std::size_t(i)], modes);
  for (Eigen::Index j = 0; j < dl; ++j) {
    const auto& state = low[std::size_t(j)];
    h(du + j, du + j) = energy(state, modes) + mu_bare;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      Counts raised = state;
      const double amp = std::sqrt(double(raised[k] + 1));
      ++raised[k];
      const auto i = Eigen::Index(up_index.at(raised));
      const double v = lambda * modes[k].f / std::sqrt(2 * modes[k].omega) * amp;
      h(du + j, i) += v;
      h(i, du + j) += v;
    }
  }
  return h;
}

// Torus Laplacian eigenvalues (2 pi k1/L1)^2 + (2 pi k2/L2)^2 <= cutoff by
// brute-force lattice enumeration, with multiplicity.
inline std::vector<double> torus_sigmas(double L1, double L2, double cutoff) {
  const double pi = 3.14159265358979323846;
  std::vector<double> out;
  const int r1 = int(std::ceil(std::sqrt(cutoff) * L1 / (2 * pi))) + 1;
  const int r2 = int(std::ceil(std::sqrt(cutoff) * L2 / (2 * pi))) + 1;
  for (int k1 = -r1; k1 <= r1; ++k1)
    for (int k2 = -r2; k2 <= r2; ++k2) {
      const double s = std::pow(2 * pi * k1 / L1, 2) + std::pow(2 * pi * k2 / L2, 2);
      if (s <= cutoff * (1 + 1e-12)) out.push_back(s);
    }
  std::sort(out.begin(), out.end());
  return out;
}

// Torus heat kernel diagonal by direct summation over the integer lattice.
inline double torus_heat_kernel(double L1, double L2, double t) {
  const double pi = 3.14159265358979323846;
  auto theta = [&](double L) {
    double s = 1.0;
    for (int k = 1; k < 10000; ++k) {
      const double term = 2.0 * std::exp(-std::pow(2 * pi * k / L, 2) * t);
      s += term;
      if (term < 1e-18 * s) break;
    }
    return s;
  };
  return theta(L1) * theta(L2) / (L1 * L2);
}

inline double binomial(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace oracle
