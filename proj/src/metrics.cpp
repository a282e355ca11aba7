#include "aitv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aitv/errors.hpp"

namespace aitv {

std::size_t RegionMask::count() const {
  std::size_t c = 0;
  for (auto v : in) c += v;
  return c;
}

RegionMask mask_of_label(const Segmentation& seg, int label) {
  if (label < 1 || label > seg.K)
    throw ParamError("label " + std::to_string(label) + " outside 1.." +
                     std::to_string(seg.K));
  RegionMask m;
  m.rows = seg.rows;
  m.cols = seg.cols;
  m.in.resize(seg.labels.size());
  for (std::size_t n = 0; n < seg.labels.size(); ++n)
    m.in[n] = seg.labels[n] == label ? 1 : 0;
  return m;
}

double dice(const RegionMask& a, const RegionMask& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.in.size() != b.in.size())
    throw DataError("region masks differ in shape");
  std::size_t inter = 0, ca = 0, cb = 0;
  for (std::size_t n = 0; n < a.in.size(); ++n) {
    inter += a.in[n] & b.in[n];
    ca += a.in[n];
    cb += b.in[n];
  }
  if (ca + cb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(ca + cb);
}

namespace {

double psnr_impl(double sse, double n, double peak, PsnrVariant variant) {
  if (!(peak > 0.0)) throw ParamError("peak must be positive");
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  if (variant == PsnrVariant::paper)
    return 20.0 * std::log10(n * peak / sse);
  return 20.0 * std::log10(peak / std::sqrt(sse / n));
}

}  // namespace

double psnr(const MultiChannelImage& ref, const MultiChannelImage& test,
            double peak, PsnrVariant variant) {
  if (ref.nchannels() != test.nchannels() || ref.rows() != test.rows() ||
      ref.cols() != test.cols())
    throw DataError("psnr inputs differ in shape");
  if (ref.channels.empty()) throw DataError("psnr of empty image");
  double sse = 0.0;
  std::size_t n = 0;
  for (int c = 0; c < ref.nchannels(); ++c) {
    const auto& rc = ref.channels[c];
    const auto& tc = test.channels[c];
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const double e = rc[k] - tc[k];
      sse += e * e;
    }
    n += rc.size();
  }
  return psnr_impl(sse, static_cast<double>(n), peak, variant);
}

double psnr(const ImageGrid& ref, const ImageGrid& test, double peak,
            PsnrVariant variant) {
  return psnr(MultiChannelImage(ref), MultiChannelImage(test), peak, variant);
}

std::vector<int> match_labels(const Segmentation& seg, const Segmentation& gt) {
  if (seg.K != gt.K) throw DataError("segmentations have different K");
  if (seg.rows != gt.rows || seg.cols != gt.cols)
    throw DataError("segmentations differ in shape");
  const int K = seg.K;

  const bool scalar = !seg.centroids.empty() && seg.centroids[0].size() == 1 &&
                      !gt.centroids.empty() && gt.centroids[0].size() == 1;
  std::vector<int> map(K);
  if (scalar) {
    // Both sides are intensity-ordered already.
    for (int k = 0; k < K; ++k) map[k] = k + 1;
    return map;
  }

  std::vector<std::vector<double>> d(K, std::vector<double>(K));
  for (int a = 1; a <= K; ++a) {
    const RegionMask ma = mask_of_label(seg, a);
    for (int b = 1; b <= K; ++b) d[a - 1][b - 1] = dice(ma, mask_of_label(gt, b));
  }
  std::vector<bool> used_a(K, false), used_b(K, false);
  for (int step = 0; step < K; ++step) {
    int best_a = -1, best_b = -1;
    double best = -1.0;
    for (int a = 0; a < K; ++a) {
      if (used_a[a]) continue;
      for (int b = 0; b < K; ++b) {
        if (used_b[b]) continue;
        if (d[a][b] > best) {
          best = d[a][b];
          best_a = a;
          best_b = b;
        }
      }
    }
    used_a[best_a] = true;
    used_b[best_b] = true;
    map[best_a] = best_b + 1;
  }
  return map;
}

std::vector<double> region_dice(const Segmentation& seg, const Segmentation& gt) {
  const std::vector<int> map = match_labels(seg, gt);
  std::vector<double> out(seg.K);
  for (int k = 1; k <= seg.K; ++k)
    out[k - 1] = dice(mask_of_label(seg, k), mask_of_label(gt, map[k - 1]));
  return out;
}

}  // namespace aitv
