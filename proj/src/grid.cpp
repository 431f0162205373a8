#include "tunnelsim/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tunnelsim/error.hpp"

namespace tunnelsim {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Grid::Grid(double z_min, double z_max, std::size_t n) : z_min_(z_min), n_(n) {
  if (!is_power_of_two(n)) {
    throw ConfigError("grid.n_points must be a power of two, got " + std::to_string(n));
  }
  if (!(z_max > z_min)) throw ConfigError("grid.z_max must exceed grid.z_min");
  dz_ = (z_max - z_min) / static_cast<double>(n);
}

double Grid::k(std::size_t j) const noexcept {
  const double dk = 2.0 * std::numbers::pi / span();
  const auto jj = static_cast<long>(j);
  const auto nn = static_cast<long>(n_);
  return dk * static_cast<double>(jj < nn / 2 ? jj : jj - nn);
}

double Grid::k_max() const noexcept { return std::numbers::pi / dz_; }

std::vector<double> Grid::positions() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = z(j);
  return out;
}

std::vector<double> Grid::wavenumbers() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = k(j);
  return out;
}

Grid Grid::covering(double lo, double hi) const {
  const double need_lo = std::min(lo, z_min());
  const double need_hi = std::max(hi, z_max());
  std::size_t n = n_;
  while (static_cast<double>(n) * dz_ < need_hi - need_lo + 2.0 * dz_) n <<= 1;
  if (n == n_) return *this;
  // Split the slack evenly and snap to this grid's lattice.
  const double slack = static_cast<double>(n) * dz_ - (need_hi - need_lo);
  const double start = need_lo - 0.5 * slack;
  const double shift = std::floor((z_min_ - start) / dz_);
  Grid g;
  g.dz_ = dz_;
  g.n_ = n;
  g.z_min_ = z_min_ - shift * dz_;
  if (g.z_min_ > need_lo) g.z_min_ -= dz_;
  return g;
}

std::size_t Grid::offset_in(const Grid& outer) const {
  const double rel = (z_min_ - outer.z_min_) / dz_;
  const double idx = std::round(rel);
  if (std::abs(outer.dz_ - dz_) > 1e-12 * dz_ || std::abs(rel - idx) > 1e-6 || idx < 0.0 ||
      static_cast<std::size_t>(idx) + n_ > outer.n_) {
    throw ConfigError("grids are not aligned sub-lattices");
  }
  return static_cast<std::size_t>(idx);
}

Grid Grid::window(std::size_t first, std::size_t n) const {
  if (!is_power_of_two(n)) throw ConfigError("window size must be a power of two");
  Grid g;
  g.dz_ = dz_;
  g.n_ = n;
  g.z_min_ = z_min_ + static_cast<double>(first) * dz_;
  return g;
}

Grid Grid::refined() const { return Grid(z_min(), z_max(), 2 * n_); }

}  // namespace tunnelsim
