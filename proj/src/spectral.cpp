#include "aitv/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>

#include "aitv/errors.hpp"

namespace aitv {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void trim_zeros(std::vector<double>& taps, int& rows, int& cols,
                int& anchor_row, int& anchor_col) {
  auto row_zero = [&](int r) {
    for (int c = 0; c < cols; ++c)
      if (taps[static_cast<std::size_t>(r) * cols + c] != 0.0) return false;
    return true;
  };
  auto col_zero = [&](int c) {
    for (int r = 0; r < rows; ++r)
      if (taps[static_cast<std::size_t>(r) * cols + c] != 0.0) return false;
    return true;
  };
  int r0 = 0, r1 = rows - 1, c0 = 0, c1 = cols - 1;
  while (r0 < r1 && row_zero(r0)) ++r0;
  while (r1 > r0 && row_zero(r1)) --r1;
  while (c0 < c1 && col_zero(c0)) ++c0;
  while (c1 > c0 && col_zero(c1)) --c1;
  const int nr = r1 - r0 + 1, nc = c1 - c0 + 1;
  std::vector<double> out(static_cast<std::size_t>(nr) * nc);
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < nc; ++c)
      out[static_cast<std::size_t>(r) * nc + c] =
          taps[static_cast<std::size_t>(r + r0) * cols + (c + c0)];
  taps = std::move(out);
  rows = nr;
  cols = nc;
  anchor_row -= r0;
  anchor_col -= c0;
}

void normalize_sum(std::vector<double>& taps) {
  double s = 0.0;
  for (double t : taps) s += t;
  if (s <= 0.0) throw NumericalError("kernel taps sum to a nonpositive value");
  for (double& t : taps) t /= s;
}

}  // namespace

ConvKernel gaussian_kernel(int rows, int cols, double sigma) {
  if (rows < 1 || cols < 1)
    throw ParamError("gaussian kernel size must be positive");
  if (!(sigma > 0.0))
    throw ParamError("gaussian sigma must be positive");
  ConvKernel k;
  k.rows = rows;
  k.cols = cols;
  k.anchor_row = (rows - 1) / 2;
  k.anchor_col = (cols - 1) / 2;
  k.taps.resize(static_cast<std::size_t>(rows) * cols);
  const double cr = (rows - 1) / 2.0;
  const double cc = (cols - 1) / 2.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double dr = r - cr, dc = c - cc;
      k.taps[static_cast<std::size_t>(r) * cols + c] =
          std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
    }
  }
  normalize_sum(k.taps);
  return k;
}

ConvKernel motion_kernel(double length, double angle_deg) {
  if (!(length >= 1.0)) {
    if (length > 0.0) return identity_kernel();
    throw ParamError("motion length must be positive");
  }
  if (length == 1.0) return identity_kernel();

  double phi = std::fmod(angle_deg, 180.0);
  if (phi < 0.0) phi += 180.0;
  const double theta = phi * std::numbers::pi / 180.0;
  const double ux = std::cos(theta), uy = std::sin(theta);
  const double half = (length - 1.0) / 2.0;

  const int rx = static_cast<int>(std::ceil(half * std::abs(ux))) + 1;
  const int ry = static_cast<int>(std::ceil(half * std::abs(uy))) + 1;
  int rows = 2 * ry + 1, cols = 2 * rx + 1;
  int anchor_row = ry, anchor_col = rx;
  std::vector<double> taps(static_cast<std::size_t>(rows) * cols, 0.0);

  for (int r = -ry; r <= ry; ++r) {
    for (int c = -rx; c <= rx; ++c) {
      // Image rows grow downward; flip to put the angle in math orientation.
      const double px = c, py = -r;
      const double t = px * ux + py * uy;
      const double s = -px * uy + py * ux;
      const double dist =
          std::abs(t) <= half ? std::abs(s) : std::hypot(std::abs(t) - half, s);
      const double w = 1.0 - dist;
      if (w > 0.0)
        taps[static_cast<std::size_t>(r + ry) * cols + (c + rx)] = w;
    }
  }
  trim_zeros(taps, rows, cols, anchor_row, anchor_col);
  normalize_sum(taps);
  ConvKernel k;
  k.rows = rows;
  k.cols = cols;
  k.anchor_row = anchor_row;
  k.anchor_col = anchor_col;
  k.taps = std::move(taps);
  return k;
}

ConvKernel identity_kernel() {
  ConvKernel k;
  k.rows = 1;
  k.cols = 1;
  k.anchor_row = 0;
  k.anchor_col = 0;
  k.taps = {1.0};
  return k;
}

ConvKernel parse_kernel_spec(const std::string& spec) {
  if (spec == "identity") return identity_kernel();
  const auto fail = [&]() -> ConvKernel {
    throw ParamError("bad kernel spec '" + spec +
                     "' (expected identity, gaussian:RxC:sigma or motion:length:angle)");
  };
  if (spec.rfind("gaussian:", 0) == 0) {
    int r = 0, c = 0;
    double sigma = 0.0;
    char tail = 0;
    if (std::sscanf(spec.c_str(), "gaussian:%dx%d:%lf%c", &r, &c, &sigma, &tail) != 3)
      return fail();
    return gaussian_kernel(r, c, sigma);
  }
  if (spec.rfind("motion:", 0) == 0) {
    double len = 0.0, ang = 0.0;
    char tail = 0;
    if (std::sscanf(spec.c_str(), "motion:%lf:%lf%c", &len, &ang, &tail) != 2)
      return fail();
    return motion_kernel(len, ang);
  }
  return fail();
}

SpectralKernel::SpectralKernel(int rows, int cols,
                               std::vector<std::complex<double>> mult,
                               bool identity)
    : rows_(rows), cols_(cols), identity_(identity), mult_(std::move(mult)) {
  if (mult_.size() != static_cast<std::size_t>(rows) * cols)
    throw DataError("spectral table size does not match grid shape");
}

SpectralKernel kernel_spectrum(const ConvKernel& ker, int rows, int cols) {
  if (ker.rows < 1 || ker.cols < 1 || ker.taps.empty())
    throw DataError("empty convolution kernel");
  if (ker.rows > rows || ker.cols > cols)
    throw DataError("kernel larger than image: " + std::to_string(ker.rows) + "x" +
                    std::to_string(ker.cols) + " vs " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  if (ker.is_identity()) {
    std::vector<std::complex<double>> mult(static_cast<std::size_t>(rows) * cols,
                                           {1.0, 0.0});
    return SpectralKernel(rows, cols, std::move(mult), true);
  }
  ImageGrid pad(rows, cols, 0.0);
  for (int r = 0; r < ker.rows; ++r) {
    for (int c = 0; c < ker.cols; ++c) {
      const int i = ((r - ker.anchor_row) % rows + rows) % rows;
      const int j = ((c - ker.anchor_col) % cols + cols) % cols;
      pad(i, j) += ker.at(r, c);
    }
  }
  Dft2d dft(rows, cols);
  return SpectralKernel(rows, cols, dft.forward(pad));
}

SpectralKernel dx_spectrum(int rows, int cols) {
  std::vector<std::complex<double>> mult(static_cast<std::size_t>(rows) * cols);
  for (int p = 0; p < rows; ++p) {
    for (int q = 0; q < cols; ++q) {
      const double a = 2.0 * std::numbers::pi * q / cols;
      mult[static_cast<std::size_t>(p) * cols + q] =
          std::complex<double>(1.0 - std::cos(a), std::sin(a));
    }
  }
  return SpectralKernel(rows, cols, std::move(mult));
}

SpectralKernel dy_spectrum(int rows, int cols) {
  std::vector<std::complex<double>> mult(static_cast<std::size_t>(rows) * cols);
  for (int p = 0; p < rows; ++p) {
    const double a = 2.0 * std::numbers::pi * p / rows;
    const std::complex<double> m(1.0 - std::cos(a), std::sin(a));
    for (int q = 0; q < cols; ++q) mult[static_cast<std::size_t>(p) * cols + q] = m;
  }
  return SpectralKernel(rows, cols, std::move(mult));
}

SpectralKernel laplacian_spectrum(int rows, int cols) {
  std::vector<std::complex<double>> mult(static_cast<std::size_t>(rows) * cols);
  for (int p = 0; p < rows; ++p) {
    const double cp = std::cos(2.0 * std::numbers::pi * p / rows);
    for (int q = 0; q < cols; ++q) {
      const double cq = std::cos(2.0 * std::numbers::pi * q / cols);
      mult[static_cast<std::size_t>(p) * cols + q] = 2.0 * cp + 2.0 * cq - 4.0;
    }
  }
  return SpectralKernel(rows, cols, std::move(mult));
}

ImageGrid circular_convolve(const ImageGrid& u, const SpectralKernel& spec) {
  if (u.rows() != spec.rows() || u.cols() != spec.cols())
    throw DataError("spectral table shape does not match image");
  if (spec.is_identity()) return u;
  Dft2d dft(u.rows(), u.cols());
  auto hat = dft.forward(u);
  for (std::size_t n = 0; n < hat.size(); ++n) hat[n] *= spec.data()[n];
  const double linf = std::max(std::abs(u.max_value()), std::abs(u.min_value()));
  return dft.inverse_real(hat, 1e-8 * std::max(linf, 1.0));
}

Dft2d::Dft2d(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw ParamError("transform shape must be positive");
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  auto* in = fftw_alloc_complex(n);
  auto* out = fftw_alloc_complex(n);
  if (!in || !out) {
    fftw_free(in);
    fftw_free(out);
    throw NumericalError("fftw allocation failed");
  }
  buf_in_ = in;
  buf_out_ = out;
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_2d(rows, cols, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_2d(rows, cols, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw NumericalError("fftw planning failed");
}

Dft2d::~Dft2d() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(static_cast<fftw_complex*>(buf_in_));
  fftw_free(static_cast<fftw_complex*>(buf_out_));
}

void Dft2d::forward(const double* src, std::complex<double>* out) {
  const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
  auto* in = static_cast<fftw_complex*>(buf_in_);
  auto* buf = static_cast<fftw_complex*>(buf_out_);
  for (std::size_t k = 0; k < n; ++k) {
    in[k][0] = src[k];
    in[k][1] = 0.0;
  }
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  for (std::size_t k = 0; k < n; ++k) out[k] = {buf[k][0], buf[k][1]};
}

std::vector<std::complex<double>> Dft2d::forward(const ImageGrid& g) {
  if (g.rows() != rows_ || g.cols() != cols_)
    throw DataError("image shape does not match transform plan");
  std::vector<std::complex<double>> out(g.size());
  forward(g.data(), out.data());
  return out;
}

double Dft2d::inverse(const std::complex<double>* src, double* out) {
  const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
  auto* in = static_cast<fftw_complex*>(buf_in_);
  auto* buf = static_cast<fftw_complex*>(buf_out_);
  for (std::size_t k = 0; k < n; ++k) {
    in[k][0] = src[k].real();
    in[k][1] = src[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double scale = 1.0 / static_cast<double>(n);
  double max_imag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = buf[k][0] * scale;
    max_imag = std::max(max_imag, std::abs(buf[k][1]) * scale);
  }
  return max_imag;
}

ImageGrid Dft2d::inverse_real(const std::vector<std::complex<double>>& spec,
                              double tol) {
  if (spec.size() != static_cast<std::size_t>(rows_) * cols_)
    throw DataError("spectrum size does not match transform plan");
  ImageGrid out(rows_, cols_);
  const double imag = inverse(spec.data(), out.data());
  if (imag > tol)
    throw NumericalError("inverse transform not real: residue " +
                         std::to_string(imag));
  return out;
}

}  // namespace aitv
