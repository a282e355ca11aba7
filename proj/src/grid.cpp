#include "aitv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aitv/errors.hpp"

namespace aitv {

ImageGrid::ImageGrid(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1)
    throw ParamError("grid dimensions must be positive, got " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  values_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

double ImageGrid::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

double ImageGrid::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

bool ImageGrid::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

VectorField gradient(const ImageGrid& u) {
  const int M = u.rows(), N = u.cols();
  VectorField g(M, N);
  for (int i = 0; i < M; ++i) {
    const int im = (i == 0) ? M - 1 : i - 1;
    for (int j = 0; j < N; ++j) {
      const int jm = (j == 0) ? N - 1 : j - 1;
      g.x(i, j) = u(i, j) - u(i, jm);
      g.y(i, j) = u(i, j) - u(im, j);
    }
  }
  return g;
}

ImageGrid divergence_adjoint(const VectorField& w) {
  if (!w.x.same_shape(w.y)) throw DataError("vector field components differ in shape");
  const int M = w.rows(), N = w.cols();
  ImageGrid out(M, N);
  for (int i = 0; i < M; ++i) {
    const int ip = (i == M - 1) ? 0 : i + 1;
    for (int j = 0; j < N; ++j) {
      const int jp = (j == N - 1) ? 0 : j + 1;
      out(i, j) = w.x(i, j) - w.x(i, jp) + w.y(i, j) - w.y(ip, j);
    }
  }
  return out;
}

double inner(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DataError("inner product of grids with different shapes");
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

double inner(const VectorField& a, const VectorField& b) {
  return inner(a.x, b.x) + inner(a.y, b.y);
}

double norm_l2(const ImageGrid& g) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) s += g[n] * g[n];
  return std::sqrt(s);
}

double norm_l1(const VectorField& w) {
  double s = 0.0;
  for (std::size_t n = 0; n < w.x.size(); ++n) s += std::abs(w.x[n]) + std::abs(w.y[n]);
  return s;
}

double norm_l21(const VectorField& w) {
  double s = 0.0;
  for (std::size_t n = 0; n < w.x.size(); ++n) s += std::hypot(w.x[n], w.y[n]);
  return s;
}

double norm_l2(const VectorField& w) {
  double s = 0.0;
  for (std::size_t n = 0; n < w.x.size(); ++n) s += w.x[n] * w.x[n] + w.y[n] * w.y[n];
  return std::sqrt(s);
}

double aitv_value(const ImageGrid& u, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw ParamError("aitv weight must lie in [0,1], got " + std::to_string(alpha));
  const VectorField g = gradient(u);
  return norm_l1(g) - alpha * norm_l21(g);
}

}  // namespace aitv
