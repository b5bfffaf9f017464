#include "wdec/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace wdec {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
  spec_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * bins()));
  std::lock_guard lock(planner_mutex());
  auto* c = reinterpret_cast<fftw_complex*>(spec_);
  fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, c, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), c, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  }
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void RealFft::inverse() { fftw_execute(static_cast<fftw_plan>(inv_)); }

ComplexFft::ComplexFft(std::size_t n) : n_(n) {
  buf_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n_));
  std::lock_guard lock(planner_mutex());
  auto* b = reinterpret_cast<fftw_complex*>(buf_);
  fwd_ = fftw_plan_dft_1d(static_cast<int>(n_), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_1d(static_cast<int>(n_), b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  }
  fftw_free(buf_);
}

void ComplexFft::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void ComplexFft::inverse() { fftw_execute(static_cast<fftw_plan>(inv_)); }

}  // namespace wdec
