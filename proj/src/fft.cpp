#include "tunnelsim/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>
#include <utility>

namespace tunnelsim {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftWorkspace::FftWorkspace(std::size_t n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  buffer_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (buffer_ == nullptr) throw std::bad_alloc();
  auto* raw = reinterpret_cast<fftw_complex*>(buffer_);
  const int size = static_cast<int>(n);
  forward_plan_ = fftw_plan_dft_1d(size, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_1d(size, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
  for (std::size_t j = 0; j < n; ++j) buffer_[j] = 0.0;
}

FftWorkspace::~FftWorkspace() { release(); }

FftWorkspace::FftWorkspace(FftWorkspace&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      buffer_(std::exchange(other.buffer_, nullptr)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      backward_plan_(std::exchange(other.backward_plan_, nullptr)) {}

FftWorkspace& FftWorkspace::operator=(FftWorkspace&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    buffer_ = std::exchange(other.buffer_, nullptr);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    backward_plan_ = std::exchange(other.backward_plan_, nullptr);
  }
  return *this;
}

void FftWorkspace::release() noexcept {
  if (buffer_ == nullptr) return;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  fftw_free(buffer_);
  buffer_ = nullptr;
}

void FftWorkspace::forward() { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }

void FftWorkspace::backward() {
  fftw_execute(static_cast<fftw_plan>(backward_plan_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) buffer_[j] *= scale;
}

}  // namespace tunnelsim
