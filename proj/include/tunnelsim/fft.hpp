#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace tunnelsim {

/// In-place 1D complex FFT workspace owning its FFTW plans and aligned buffer.
/// Plans use FFTW_ESTIMATE so results are reproducible run to run. One instance
/// per evolution; instances are not shared between threads.
class FftWorkspace {
 public:
  explicit FftWorkspace(std::size_t n);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
  FftWorkspace(FftWorkspace&& other) noexcept;
  FftWorkspace& operator=(FftWorkspace&& other) noexcept;

  std::span<std::complex<double>> data() noexcept { return {buffer_, n_}; }
  std::span<const std::complex<double>> data() const noexcept { return {buffer_, n_}; }
  std::size_t size() const noexcept { return n_; }

  /// Unnormalized forward transform, sum_j x_j exp(-i k_j z_j).
  void forward();
  /// Inverse transform including the 1/n factor.
  void backward();

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  std::complex<double>* buffer_ = nullptr;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

}  // namespace tunnelsim
