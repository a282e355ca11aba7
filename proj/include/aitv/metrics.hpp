#pragma once

#include <vector>

#include "aitv/grid.hpp"
#include "aitv/segment.hpp"

namespace aitv {

struct RegionMask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> in;  // 1 inside the region

  std::size_t count() const;
};

RegionMask mask_of_label(const Segmentation& seg, int label);

// 2|A∩B| / (|A|+|B|); two empty regions agree perfectly (1.0).
double dice(const RegionMask& a, const RegionMask& b);

enum class PsnrVariant {
  paper,     // 20*log10(n*P / sum of squared errors)
  standard,  // 20*log10(P / rms error)
};

// Peak signal-to-noise ratio over all channels; n is the total sample count.
// Identical images give +infinity.
double psnr(const MultiChannelImage& ref, const MultiChannelImage& test,
            double peak, PsnrVariant variant);
double psnr(const ImageGrid& ref, const ImageGrid& test, double peak,
            PsnrVariant variant);

// Map from predicted label to ground-truth label (index k-1 holds the match
// of predicted label k).  One-channel centroids are assumed intensity-ordered
// on both sides, so the map is the identity; otherwise labels are paired
// greedily by descending region overlap (lowest label first on ties).
std::vector<int> match_labels(const Segmentation& seg, const Segmentation& gt);

// Per-region overlap after matching: entry k-1 is the DICE between predicted
// region k and its matched ground-truth region.
std::vector<double> region_dice(const Segmentation& seg, const Segmentation& gt);

}  // namespace aitv
