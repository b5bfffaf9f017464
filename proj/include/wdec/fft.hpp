#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace wdec {

// Thin RAII wrappers over FFTW plans with owned aligned buffers. Instances are
// not shareable between threads; plan creation itself is serialized.

class RealFft {
public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  std::span<double> real() { return {real_, n_}; }
  std::span<std::complex<double>> spectrum() { return {spec_, bins()}; }

  void forward();  // real() -> spectrum()
  void inverse();  // spectrum() -> real(), unnormalized

private:
  std::size_t n_;
  double* real_;
  std::complex<double>* spec_;
  void* fwd_;
  void* inv_;
};

class ComplexFft {
public:
  explicit ComplexFft(std::size_t n);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::size_t size() const { return n_; }
  std::span<std::complex<double>> data() { return {buf_, n_}; }

  void forward();  // in place
  void inverse();  // in place, unnormalized

private:
  std::size_t n_;
  std::complex<double>* buf_;
  void* fwd_;
  void* inv_;
};

}  // namespace wdec
