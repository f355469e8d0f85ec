#include "leelab/fock.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "leelab/error.hpp"

namespace leelab {

void ModelParams::validate() const {
  require(std::isfinite(mass) && mass > 0, "boson mass m must be positive");
  require(std::isfinite(mu_p) && mu_p > 0 && mu_p < mass,
          "physical binding energy must satisfy 0 < mu_p < m");
  require(std::isfinite(coupling) && coupling >= 0, "coupling lambda must be non-negative");
  require(n >= 0, "boson number n must be non-negative");
}

Model::Model(ModeCatalog catalog, ModelParams params)
    : catalog_(std::move(catalog)), params_(params) {
  params_.validate();
  require(std::abs(catalog_.mass() - params_.mass) <= 1e-15 * params_.mass,
          "catalog and model disagree on the boson mass");
  require(catalog_.size() > 0, "mode catalog is empty");
}

double h0_energy(const Occupation& occ, const ModeCatalog& catalog) {
  double e = 0.0;
  for (std::size_t k = 0; k < occ.counts.size(); ++k)
    if (occ.counts[k]) e += occ.counts[k] * catalog[k].omega;
  return e;
}

LadderResult lower_element(const Occupation& occ, std::size_t mode, const ModeCatalog& catalog) {
  require(mode < occ.counts.size(), "mode index out of range");
  LadderResult r;
  const auto nk = occ.counts[mode];
  if (nk == 0) return r;
  r.amplitude = std::sqrt(double(nk));
  r.result = occ;
  r.result.counts[mode] -= 1;
  r.result.total -= 1;
  r.result.h0 = h0_energy(r.result, catalog);
  return r;
}

LadderResult raise_element(const Occupation& occ, std::size_t mode, const ModeCatalog& catalog) {
  require(mode < occ.counts.size(), "mode index out of range");
  LadderResult r;
  r.amplitude = std::sqrt(double(occ.counts[mode]) + 1.0);
  r.result = occ;
  r.result.counts[mode] += 1;
  r.result.total += 1;
  r.result.h0 = h0_energy(r.result, catalog);
  return r;
}

std::size_t sector_dimension(std::size_t modes, int n) {
  if (n == 0) return 1;
  if (modes == 0) return 0;
  // C(modes + n - 1, n) computed incrementally; every partial product is
  // itself a binomial coefficient so the division is exact.
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  std::size_t c = 1;
  for (int i = 1; i <= n; ++i) {
    const std::size_t num = modes - 1 + std::size_t(i);
    if (c > kMax / num) return kMax;
    c = c * num / std::size_t(i);
  }
  return c;
}

std::size_t SectorBasis::Hash::operator()(const std::vector<std::uint32_t>& v) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (auto x : v) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 1099511628211ull;
  }
  return std::size_t(h);
}

std::optional<std::size_t> SectorBasis::find(const std::vector<std::uint32_t>& counts) const {
  auto it = index_.find(counts);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SectorBasis enumerate_sector(const ModeCatalog& catalog, int n, std::size_t ceiling) {
  require(n >= 0, "boson number must be non-negative");
  const std::size_t M = catalog.size();
  require(M > 0, "cannot enumerate a sector over an empty catalog");
  const std::size_t dim = sector_dimension(M, n);
  if (dim > ceiling)
    fail(ErrorCode::ceiling_exceeded, "sector dimension C(M+n-1,n) = " +
                                          (dim == std::numeric_limits<std::size_t>::max()
                                               ? std::string("overflow")
                                               : std::to_string(dim)) +
                                          " exceeds the ceiling " + std::to_string(ceiling));
  SectorBasis basis;
  basis.n_ = n;
  basis.modes_ = M;
  basis.states_.reserve(dim);
  basis.index_.reserve(dim);

  // Walk non-decreasing index tuples (i_1 <= ... <= i_n) in lexicographic order.
  std::vector<std::size_t> idx(std::size_t(n), 0);
  for (;;) {
    Occupation occ;
    occ.counts.assign(M, 0);
    for (auto i : idx) occ.counts[i] += 1;
    occ.total = std::uint32_t(n);
    occ.h0 = h0_energy(occ, catalog);
    basis.index_.emplace(occ.counts, basis.states_.size());
    basis.states_.push_back(std::move(occ));

    int pos = n - 1;
    while (pos >= 0 && idx[std::size_t(pos)] == M - 1) --pos;
    if (pos < 0) break;
    const std::size_t v = idx[std::size_t(pos)] + 1;
    for (int j = pos; j < n; ++j) idx[std::size_t(j)] = v;
  }
  return basis;
}

RaisingMap::RaisingMap(const SectorBasis& lower, const SectorBasis& upper)
    : lower_size_(lower.size()), modes_(lower.mode_count()) {
  require(upper.boson_number() == lower.boson_number() + 1,
          "raising map needs sectors with n and n+1 bosons");
  require(upper.mode_count() == lower.mode_count(), "sectors built over different catalogs");
  target_.resize(lower_size_ * modes_);
  amplitude_.resize(lower_size_ * modes_);
  std::vector<std::uint32_t> scratch;
  for (std::size_t s = 0; s < lower_size_; ++s) {
    scratch = lower[s].counts;
    for (std::size_t k = 0; k < modes_; ++k) {
      scratch[k] += 1;
      auto hit = upper.find(scratch);
      if (!hit) fail(ErrorCode::invalid_argument, "raised state missing from the upper sector");
      target_[s * modes_ + k] = *hit;
      amplitude_[s * modes_ + k] = std::sqrt(double(scratch[k]));
      scratch[k] -= 1;
    }
  }
}

}  // namespace leelab
