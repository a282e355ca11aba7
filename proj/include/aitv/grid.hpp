#pragma once

#include <cstddef>
#include <vector>

namespace aitv {

// Dense M x N image of doubles, row-major.  Row index i runs down the image,
// column index j runs across.
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * cols_ + j]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  bool same_shape(const ImageGrid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double max_value() const;
  double min_value() const;
  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

// Pair of grids holding the two components of a discrete vector field,
// e.g. a gradient.  x is the horizontal (column) component, y the vertical.
struct VectorField {
  ImageGrid x;
  ImageGrid y;

  VectorField() = default;
  VectorField(int rows, int cols) : x(rows, cols), y(rows, cols) {}
  int rows() const { return x.rows(); }
  int cols() const { return x.cols(); }
};

// Stack of equally shaped channels (grayscale: 1, RGB: 3, lifted: 6).
struct MultiChannelImage {
  std::vector<ImageGrid> channels;

  MultiChannelImage() = default;
  MultiChannelImage(int nchan, int rows, int cols)
      : channels(nchan, ImageGrid(rows, cols)) {}
  explicit MultiChannelImage(ImageGrid g) { channels.push_back(std::move(g)); }

  int rows() const { return channels.empty() ? 0 : channels[0].rows(); }
  int cols() const { return channels.empty() ? 0 : channels[0].cols(); }
  int nchannels() const { return static_cast<int>(channels.size()); }
  bool consistent() const {
    for (const auto& c : channels)
      if (!c.same_shape(channels[0])) return false;
    return true;
  }
};

// Backward differences with periodic wrap:
//   (Dx u)(i,j) = u(i,j) - u(i,j-1),  (Dy u)(i,j) = u(i,j) - u(i-1,j).
VectorField gradient(const ImageGrid& u);

// Adjoint of `gradient` under the Euclidean inner product; equals -div for
// the matching discretization.
ImageGrid divergence_adjoint(const VectorField& w);

double inner(const ImageGrid& a, const ImageGrid& b);
double inner(const VectorField& a, const VectorField& b);

double norm_l2(const ImageGrid& g);

// Sum over pixels of |wx| + |wy|.
double norm_l1(const VectorField& w);
// Sum over pixels of sqrt(wx^2 + wy^2).
double norm_l21(const VectorField& w);
double norm_l2(const VectorField& w);

// Anisotropic-minus-isotropic total variation of u with weight alpha:
// ||grad u||_1 - alpha * ||grad u||_{2,1}.
double aitv_value(const ImageGrid& u, double alpha);

}  // namespace aitv
