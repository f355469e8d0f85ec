#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace leelab {

enum class ManifoldKind { torus, sphere };

// Compact surface carrying the impurity. Torus coordinates are (x1, x2) in
// [0, L1) x [0, L2); sphere coordinates are polar/azimuthal angles.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::torus;
  double L1 = 0.0;
  double L2 = 0.0;
  double radius = 0.0;
  double impurity[2] = {0.0, 0.0};

  static ManifoldSpec torus(double L1, double L2, double x1 = 0.0, double x2 = 0.0);
  static ManifoldSpec sphere(double radius, double theta = 0.0, double phi = 0.0);

  double volume() const;
  void validate() const;
};

struct Mode {
  std::size_t index = 0;
  double sigma = 0.0;
  double f_at_impurity = 0.0;
  double omega = 0.0;
  // (k1, k2) on the torus, (l, m) on the sphere; parity 0 = cosine, 1 = sine.
  int q1 = 0;
  int q2 = 0;
  int parity = 0;
};

inline constexpr std::size_t kDefaultModeCeiling = 100000;

class ModeCatalog {
 public:
  ModeCatalog(ManifoldSpec spec, double cutoff, double mass, bool prune_uncoupled,
              std::vector<Mode> modes);

  const ManifoldSpec& spec() const { return spec_; }
  double cutoff() const { return cutoff_; }
  double mass() const { return mass_; }
  double volume() const { return volume_; }
  bool pruned() const { return prune_uncoupled_; }

  std::size_t size() const { return modes_.size(); }
  const Mode& operator[](std::size_t i) const { return modes_[i]; }
  const std::vector<Mode>& modes() const { return modes_; }
  auto begin() const { return modes_.begin(); }
  auto end() const { return modes_.end(); }

  // CSV with header: index,sigma,omega,f_at_impurity
  void write_csv(std::ostream& os) const;

 private:
  ManifoldSpec spec_;
  double cutoff_;
  double mass_;
  double volume_;
  bool prune_uncoupled_;
  std::vector<Mode> modes_;
};

/// All Laplace-Beltrami modes with sigma <= cutoff, sorted by sigma. The
/// constant mode is always index 0. With `prune_uncoupled`, modes whose
/// eigenfunction vanishes at the impurity are dropped.
ModeCatalog build_catalog(const ManifoldSpec& spec, double cutoff, double mass,
                          bool prune_uncoupled,
                          std::size_t mode_ceiling = kDefaultModeCeiling);

// Diagonal heat kernel K_t(x, x) at the impurity, by spectral summation.
double heat_kernel_diag(const ManifoldSpec& spec, double t);

// Torus only: the same diagonal via the Poisson-resummed image sum.
double heat_kernel_diag_images(const ManifoldSpec& spec, double t);

/// Smallest C with K_t <= 1/V + C/t on every grid time.
double heat_kernel_bound_constant(const ManifoldSpec& spec, std::span<const double> t_grid);

std::vector<double> logspace(double lo, double hi, std::size_t count);
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace leelab
