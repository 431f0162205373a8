#pragma once

#include <cstddef>
#include <vector>

namespace tunnelsim {

/// Uniform periodic grid z_j = z_min + j dz, j = 0..n-1, with n a power of two.
class Grid {
 public:
  Grid() = default;
  /// Throws ConfigError unless n is a power of two and z_max > z_min.
  Grid(double z_min, double z_max, std::size_t n);

  double z_min() const noexcept { return z_min_; }
  double z_max() const noexcept { return z_min_ + static_cast<double>(n_) * dz_; }
  double dz() const noexcept { return dz_; }
  double span() const noexcept { return static_cast<double>(n_) * dz_; }
  std::size_t size() const noexcept { return n_; }

  double z(std::size_t j) const noexcept { return z_min_ + static_cast<double>(j) * dz_; }
  /// FFT-ordered wavenumber of mode j.
  double k(std::size_t j) const noexcept;
  double k_max() const noexcept;

  std::vector<double> positions() const;
  std::vector<double> wavenumbers() const;

  /// Smallest grid with the same dz and lattice alignment whose span covers
  /// [lo, hi] as well as this grid. Point count doubles as needed.
  Grid covering(double lo, double hi) const;

  /// Index of this grid's first point on `outer`; throws unless the lattices align.
  std::size_t offset_in(const Grid& outer) const;

  /// Sub-lattice of n points (a power of two) starting at index `first`.
  Grid window(std::size_t first, std::size_t n) const;

  /// Same span, dz halved.
  Grid refined() const;

  bool operator==(const Grid&) const = default;

 private:
  double z_min_ = 0.0;
  double dz_ = 1.0;
  std::size_t n_ = 0;
};

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

}  // namespace tunnelsim
