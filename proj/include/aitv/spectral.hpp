#pragma once

#include <complex>
#include <string>
#include <vector>

#include "aitv/grid.hpp"

namespace aitv {

// Small dense convolution kernel with an explicit anchor (the tap that sits
// on the output pixel).
struct ConvKernel {
  int rows = 0;
  int cols = 0;
  int anchor_row = 0;
  int anchor_col = 0;
  std::vector<double> taps;  // row-major

  double at(int r, int c) const { return taps[static_cast<std::size_t>(r) * cols + c]; }
  bool is_identity() const {
    return rows == 1 && cols == 1 && taps.size() == 1 && taps[0] == 1.0;
  }
};

// Normalized Gaussian taps on an rows x cols grid of offsets centred on the
// geometric middle (half-integer offsets when a side is even).
ConvKernel gaussian_kernel(int rows, int cols, double sigma);

// Linear-motion blur: unit-length line segment of the given length and
// direction (degrees, counter-clockwise from horizontal), rasterized with
// linear falloff and normalized.  length <= 1 gives the identity.
ConvKernel motion_kernel(double length, double angle_deg);

ConvKernel identity_kernel();

// Parses "identity", "gaussian:RxC:sigma" or "motion:length:angle".
ConvKernel parse_kernel_spec(const std::string& spec);

// Frequency-domain multiplier table for an M x N periodic grid.
class SpectralKernel {
 public:
  SpectralKernel() = default;
  SpectralKernel(int rows, int cols, std::vector<std::complex<double>> mult,
                 bool identity = false);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_identity() const { return identity_; }

  const std::complex<double>& at(int p, int q) const {
    return mult_[static_cast<std::size_t>(p) * cols_ + q];
  }
  const std::complex<double>* data() const { return mult_.data(); }
  std::size_t size() const { return mult_.size(); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  bool identity_ = false;
  std::vector<std::complex<double>> mult_;
};

// DFT of the kernel zero-padded onto an M x N periodic grid with its anchor
// at the origin.  Throws DataError if the kernel does not fit in the grid.
SpectralKernel kernel_spectrum(const ConvKernel& ker, int rows, int cols);

// Multipliers of the backward-difference operators matching `gradient`:
//   Dx -> 1 - exp(-2*pi*i*q/N),  Dy -> 1 - exp(-2*pi*i*p/M).
SpectralKernel dx_spectrum(int rows, int cols);
SpectralKernel dy_spectrum(int rows, int cols);

// Periodic Laplacian -DivAdj(Grad(.)); its multiplier is
// 2cos(2*pi*p/M) + 2cos(2*pi*q/N) - 4, real and nonpositive.
SpectralKernel laplacian_spectrum(int rows, int cols);

// Circular convolution via the frequency domain.  An identity spectrum
// returns the input unchanged, bit for bit.
ImageGrid circular_convolve(const ImageGrid& u, const SpectralKernel& spec);

// Reusable complex 2-D FFT plans for one grid shape.  Not copyable; callers
// that run concurrently must each own an instance.
class Dft2d {
 public:
  Dft2d(int rows, int cols);
  ~Dft2d();
  Dft2d(const Dft2d&) = delete;
  Dft2d& operator=(const Dft2d&) = delete;

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  // Unnormalized forward transform of a real grid.
  void forward(const double* src, std::complex<double>* out);
  std::vector<std::complex<double>> forward(const ImageGrid& g);

  // Inverse transform scaled by 1/(M*N); writes the real part and returns
  // the largest |imaginary part| seen.
  double inverse(const std::complex<double>* src, double* out);

  // Inverse transform that must be real: throws NumericalError when the
  // imaginary residue exceeds tol.
  ImageGrid inverse_real(const std::vector<std::complex<double>>& spec, double tol);

 private:
  int rows_ = 0;
  int cols_ = 0;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
  void* buf_in_ = nullptr;
  void* buf_out_ = nullptr;
};

}  // namespace aitv
