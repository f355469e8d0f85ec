#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "leelab/manifold.hpp"

namespace leelab {

// Physical parameters of the model. The two blocks of the Hamiltonian are
// "n+1 bosons, atom without level shift" (upper) and "n bosons, atom carrying
// the level splitting mu" (lower).
struct ModelParams {
  double mass = 1.0;
  double mu_p = 0.5;
  double coupling = 1.0;
  int n = 1;

  void validate() const;
};

class Model {
 public:
  Model(ModeCatalog catalog, ModelParams params);

  const ModeCatalog& catalog() const { return catalog_; }
  const ModelParams& params() const { return params_; }

  double mass() const { return params_.mass; }
  double mu_p() const { return params_.mu_p; }
  double coupling() const { return params_.coupling; }
  int n() const { return params_.n; }

  // Free threshold n*m + mu_p of the lower sector.
  double threshold() const { return params_.n * params_.mass + params_.mu_p; }

 private:
  ModeCatalog catalog_;
  ModelParams params_;
};

struct Occupation {
  std::vector<std::uint32_t> counts;
  std::uint32_t total = 0;
  double h0 = 0.0;
};

struct LadderResult {
  double amplitude = 0.0;
  Occupation result;
};

double h0_energy(const Occupation& occ, const ModeCatalog& catalog);

/// a_sigma |occ>: amplitude sqrt(n_sigma); the result is meaningless when
/// the amplitude is zero.
LadderResult lower_element(const Occupation& occ, std::size_t mode, const ModeCatalog& catalog);

/// a^dagger_sigma |occ>: amplitude sqrt(n_sigma + 1).
LadderResult raise_element(const Occupation& occ, std::size_t mode, const ModeCatalog& catalog);

inline constexpr std::size_t kDefaultSectorCeiling = 200000;

// Binomial C(M+n-1, n); saturates at SIZE_MAX.
std::size_t sector_dimension(std::size_t modes, int n);

class SectorBasis {
 public:
  std::size_t size() const { return states_.size(); }
  int boson_number() const { return n_; }
  std::size_t mode_count() const { return modes_; }

  const Occupation& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<Occupation>& states() const { return states_; }

  std::optional<std::size_t> find(const std::vector<std::uint32_t>& counts) const;

 private:
  friend SectorBasis enumerate_sector(const ModeCatalog&, int, std::size_t);

  struct Hash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept;
  };

  int n_ = 0;
  std::size_t modes_ = 0;
  std::vector<Occupation> states_;
  std::unordered_map<std::vector<std::uint32_t>, std::size_t, Hash> index_;
};

/// Complete n-boson occupation basis, ordered lexicographically by the
/// non-decreasing list of occupied mode indices.
SectorBasis enumerate_sector(const ModeCatalog& catalog, int n,
                             std::size_t ceiling = kDefaultSectorCeiling);

// For every lower-sector state s and mode k: index of a^dagger_k |s> in the
// upper sector and the amplitude sqrt(n_k(s) + 1).
class RaisingMap {
 public:
  RaisingMap(const SectorBasis& lower, const SectorBasis& upper);

  std::size_t lower_size() const { return lower_size_; }
  std::size_t mode_count() const { return modes_; }
  std::size_t target(std::size_t s, std::size_t k) const { return target_[s * modes_ + k]; }
  double amplitude(std::size_t s, std::size_t k) const { return amplitude_[s * modes_ + k]; }

 private:
  std::size_t lower_size_;
  std::size_t modes_;
  std::vector<std::size_t> target_;
  std::vector<double> amplitude_;
};

}  // namespace leelab
