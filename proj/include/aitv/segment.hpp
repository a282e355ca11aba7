#pragma once

#include <cstdint>
#include <vector>

#include "aitv/grid.hpp"
#include "aitv/solver.hpp"
#include "aitv/spectral.hpp"

namespace aitv {

// Pixel labels in 1..K plus the cluster centroids (K rows, one per label,
// in the feature space that was clustered).
struct Segmentation {
  int rows = 0;
  int cols = 0;
  int K = 0;
  std::vector<int> labels;
  std::vector<std::vector<double>> centroids;

  int label(int i, int j) const { return labels[static_cast<std::size_t>(i) * cols + j]; }
};

struct KmeansResult {
  std::vector<std::vector<double>> centroids;  // K x dim
  std::vector<int> labels;                     // 0-based
  double wcss = 0.0;
};

// Lloyd iterations from kmeans++ seeds, several restarts, best
// within-cluster sum of squares wins (first such restart on ties).  Empty
// clusters are reseeded at the point farthest from its centroid.
// Deterministic for a given seed.
KmeansResult kmeans(const std::vector<double>& points, int n, int dim, int K,
                    std::uint64_t seed, int restarts = 10, int max_iter = 100);

// K-level thresholding of a grayscale image by 1-d k-means; labels are
// ordered by ascending centroid intensity.
Segmentation threshold_grayscale(const ImageGrid& u, int K, std::uint64_t seed);

// K-level labeling of a multi-channel image; labels are ordered by
// lexicographically ascending centroid.
Segmentation threshold_multichannel(const MultiChannelImage& u, int K,
                                    std::uint64_t seed);

// sRGB (D65) to CIELAB.  Inputs are clipped to [0,1] first (smoothing can
// overshoot the channel range slightly); the number of clipped samples is
// reported through `clamped` when given.
MultiChannelImage rgb_to_lab(const MultiChannelImage& rgb,
                             std::size_t* clamped = nullptr);

// Appends the Lab rendition to the RGB channels and rescales each of the six
// channels to [0,1] (a constant channel becomes all zeros).
MultiChannelImage lift_and_stack(const MultiChannelImage& rgb);

// Image whose pixels are the centroid of their assigned cluster.
MultiChannelImage piecewise_constant(const Segmentation& seg);

// Piecewise-constant image in the units of `values`: each pixel takes the
// mean of its cluster over the given channels.  Used to reconstruct RGB
// output when the clustering ran in a lifted feature space.
MultiChannelImage cluster_means_image(const Segmentation& seg,
                                      const MultiChannelImage& values);

struct SatResult {
  SmoothResult smooth;
  Segmentation seg;
  ImageGrid f_tilde;  // piecewise-constant approximation in u's units
};

struct SlatResult {
  std::vector<SmoothResult> smooth;  // per input channel
  Segmentation seg;                  // from the lifted 6-channel features
  MultiChannelImage f_tilde;         // RGB cluster means of the smoothed image
};

// Smoothing-and-thresholding for grayscale images.
SatResult sat_pipeline(const ImageGrid& f, const ConvKernel& blur,
                       const AdmmConfig& cfg, int K, std::uint64_t seed);

// Channelwise smoothing, Lab lifting, then 6-d clustering for color images.
SlatResult slat_pipeline(const MultiChannelImage& f, const ConvKernel& blur,
                         const AdmmConfig& cfg, int K, std::uint64_t seed);

}  // namespace aitv
