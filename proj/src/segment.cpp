#include "aitv/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "aitv/errors.hpp"
#include "aitv/rng.hpp"

namespace aitv {

namespace {

double dist2(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double e = a[d] - b[d];
    s += e * e;
  }
  return s;
}

// kmeans++ seeding: first centre uniform, later centres drawn with
// probability proportional to the squared distance to the nearest centre.
std::vector<std::vector<double>> seed_centroids(const std::vector<double>& pts,
                                                int n, int dim, int K,
                                                Xoshiro256pp& rng,
                                                std::vector<double>& mind2) {
  std::vector<std::vector<double>> c;
  c.reserve(K);
  const std::size_t first = rng.below(static_cast<std::uint64_t>(n));
  c.emplace_back(pts.begin() + first * dim, pts.begin() + (first + 1) * dim);
  mind2.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    mind2[i] = dist2(&pts[static_cast<std::size_t>(i) * dim], c[0].data(), dim);
  while (static_cast<int>(c.size()) < K) {
    double total = std::accumulate(mind2.begin(), mind2.end(), 0.0);
    std::size_t pick;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double cum = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        cum += mind2[i];
        if (cum >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(static_cast<std::uint64_t>(n));
    }
    c.emplace_back(pts.begin() + pick * dim, pts.begin() + (pick + 1) * dim);
    const auto& nc = c.back();
    for (int i = 0; i < n; ++i) {
      const double d = dist2(&pts[static_cast<std::size_t>(i) * dim], nc.data(), dim);
      if (d < mind2[i]) mind2[i] = d;
    }
  }
  return c;
}

}  // namespace

namespace {

// K must not exceed the number of distinct points or Lloyd cannot fill all
// clusters.  Count distinct rows by sorting views.
int count_distinct(const std::vector<double>& pts, int n, int dim, int cap) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto row_less = [&](int a, int b) {
    const double* pa = &pts[static_cast<std::size_t>(a) * dim];
    const double* pb = &pts[static_cast<std::size_t>(b) * dim];
    return std::lexicographical_compare(pa, pa + dim, pb, pb + dim);
  };
  std::sort(idx.begin(), idx.end(), row_less);
  int distinct = 1;
  for (int i = 1; i < n && distinct < cap; ++i) {
    const double* pa = &pts[static_cast<std::size_t>(idx[i - 1]) * dim];
    const double* pb = &pts[static_cast<std::size_t>(idx[i]) * dim];
    if (!std::equal(pa, pa + dim, pb)) ++distinct;
  }
  return distinct;
}

}  // namespace

KmeansResult kmeans(const std::vector<double>& points, int n, int dim, int K,
                    std::uint64_t seed, int restarts, int max_iter) {
  if (n < 1 || dim < 1) throw ParamError("kmeans needs at least one point");
  if (points.size() != static_cast<std::size_t>(n) * dim)
    throw DataError("point buffer size does not match n*dim");
  if (K < 1) throw ParamError("K must be at least 1");
  if (K > n || count_distinct(points, n, dim, K) < K)
    throw DataError("fewer than K distinct points to cluster");
  if (restarts < 1 || max_iter < 1)
    throw ParamError("restarts and max_iter must be positive");

  Xoshiro256pp rng(seed);
  KmeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();

  std::vector<double> mind2;
  std::vector<int> labels(n), prev(n);
  std::vector<double> sums(static_cast<std::size_t>(K) * dim);
  std::vector<int> counts(K);

  for (int r = 0; r < restarts; ++r) {
    auto cent = seed_centroids(points, n, dim, K, rng, mind2);
    std::fill(prev.begin(), prev.end(), -1);

    for (int it = 0; it < max_iter; ++it) {
      for (int i = 0; i < n; ++i) {
        const double* p = &points[static_cast<std::size_t>(i) * dim];
        int bk = 0;
        double bd = dist2(p, cent[0].data(), dim);
        for (int k = 1; k < K; ++k) {
          const double d = dist2(p, cent[k].data(), dim);
          if (d < bd) {
            bd = d;
            bk = k;
          }
        }
        labels[i] = bk;
      }
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(counts.begin(), counts.end(), 0);
      for (int i = 0; i < n; ++i) {
        const double* p = &points[static_cast<std::size_t>(i) * dim];
        double* s = &sums[static_cast<std::size_t>(labels[i]) * dim];
        for (int d = 0; d < dim; ++d) s[d] += p[d];
        ++counts[labels[i]];
      }
      for (int k = 0; k < K; ++k) {
        if (counts[k] > 0) {
          for (int d = 0; d < dim; ++d)
            cent[k][d] = sums[static_cast<std::size_t>(k) * dim + d] / counts[k];
        } else {
          // Reseed a starved cluster at the point farthest from its centre.
          int far_i = 0;
          double far_d = -1.0;
          for (int i = 0; i < n; ++i) {
            const double d = dist2(&points[static_cast<std::size_t>(i) * dim],
                                   cent[labels[i]].data(), dim);
            if (d > far_d) {
              far_d = d;
              far_i = i;
            }
          }
          for (int d = 0; d < dim; ++d)
            cent[k][d] = points[static_cast<std::size_t>(far_i) * dim + d];
        }
      }
      if (labels == prev) break;
      prev = labels;
    }

    double wcss = 0.0;
    for (int i = 0; i < n; ++i)
      wcss += dist2(&points[static_cast<std::size_t>(i) * dim],
                    cent[labels[i]].data(), dim);
    if (wcss < best.wcss) {
      best.wcss = wcss;
      best.centroids = cent;
      best.labels = labels;
    }
  }
  return best;
}

namespace {

Segmentation relabel_sorted(const KmeansResult& km, int rows, int cols, int K) {
  // Order clusters by lexicographically ascending centroid.
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return km.centroids[a] < km.centroids[b];
  });
  std::vector<int> rank(K);
  for (int r = 0; r < K; ++r) rank[order[r]] = r;

  Segmentation seg;
  seg.rows = rows;
  seg.cols = cols;
  seg.K = K;
  seg.labels.resize(km.labels.size());
  for (std::size_t i = 0; i < km.labels.size(); ++i)
    seg.labels[i] = rank[km.labels[i]] + 1;
  seg.centroids.resize(K);
  for (int r = 0; r < K; ++r) seg.centroids[r] = km.centroids[order[r]];
  return seg;
}

}  // namespace

Segmentation threshold_grayscale(const ImageGrid& u, int K, std::uint64_t seed) {
  if (u.size() == 0) throw DataError("empty image");
  if (K < 2) throw ParamError("thresholding needs K >= 2");
  std::vector<double> pts(u.data(), u.data() + u.size());
  const KmeansResult km =
      kmeans(pts, static_cast<int>(u.size()), 1, K, seed);
  return relabel_sorted(km, u.rows(), u.cols(), K);
}

Segmentation threshold_multichannel(const MultiChannelImage& u, int K,
                                    std::uint64_t seed) {
  if (u.channels.empty() || !u.consistent())
    throw DataError("empty or ragged multi-channel image");
  const int n = static_cast<int>(u.channels[0].size());
  const int dim = u.nchannels();
  std::vector<double> pts(static_cast<std::size_t>(n) * dim);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d)
      pts[static_cast<std::size_t>(i) * dim + d] = u.channels[d][i];
  const KmeansResult km = kmeans(pts, n, dim, K, seed);
  return relabel_sorted(km, u.rows(), u.cols(), K);
}

MultiChannelImage rgb_to_lab(const MultiChannelImage& rgb, std::size_t* clamped) {
  if (rgb.nchannels() != 3 || !rgb.consistent())
    throw DataError("rgb_to_lab expects three equally shaped channels");
  const int M = rgb.rows(), N = rgb.cols();
  MultiChannelImage lab(3, M, N);
  const double eps = 216.0 / 24389.0;          // (6/29)^3
  const double kappa = 24389.0 / 27.0;
  auto fwd = [&](double t) {
    return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
  };
  std::size_t nclamp = 0;
  for (std::size_t n = 0; n < rgb.channels[0].size(); ++n) {
    auto lin = [&nclamp](double c) {
      if (c < 0.0 || c > 1.0) {
        c = std::clamp(c, 0.0, 1.0);
        ++nclamp;
      }
      return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    const double r = lin(rgb.channels[0][n]);
    const double g = lin(rgb.channels[1][n]);
    const double b = lin(rgb.channels[2][n]);
    const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = fwd(X / 0.95047);
    const double fy = fwd(Y);
    const double fz = fwd(Z / 1.08883);
    lab.channels[0][n] = 116.0 * fy - 16.0;
    lab.channels[1][n] = 500.0 * (fx - fy);
    lab.channels[2][n] = 200.0 * (fy - fz);
  }
  if (clamped) *clamped = nclamp;
  return lab;
}

MultiChannelImage lift_and_stack(const MultiChannelImage& rgb) {
  MultiChannelImage lab = rgb_to_lab(rgb);
  MultiChannelImage out;
  out.channels.reserve(6);
  for (const auto& c : rgb.channels) out.channels.push_back(c);
  for (const auto& c : lab.channels) out.channels.push_back(c);
  for (auto& c : out.channels) {
    const double lo = c.min_value(), hi = c.max_value();
    if (hi > lo) {
      const double s = 1.0 / (hi - lo);
      for (std::size_t n = 0; n < c.size(); ++n) c[n] = (c[n] - lo) * s;
    } else {
      for (std::size_t n = 0; n < c.size(); ++n) c[n] = 0.0;
    }
  }
  return out;
}

MultiChannelImage piecewise_constant(const Segmentation& seg) {
  if (seg.labels.empty() || seg.centroids.empty())
    throw DataError("empty segmentation");
  const int dim = static_cast<int>(seg.centroids[0].size());
  MultiChannelImage out(dim, seg.rows, seg.cols);
  for (std::size_t n = 0; n < seg.labels.size(); ++n) {
    const auto& c = seg.centroids[seg.labels[n] - 1];
    for (int d = 0; d < dim; ++d) out.channels[d][n] = c[d];
  }
  return out;
}

MultiChannelImage cluster_means_image(const Segmentation& seg,
                                      const MultiChannelImage& values) {
  if (values.channels.empty() || !values.consistent())
    throw DataError("empty or ragged multi-channel image");
  if (values.rows() != seg.rows || values.cols() != seg.cols)
    throw DataError("segmentation and image shapes differ");
  const int dim = values.nchannels();
  std::vector<double> sums(static_cast<std::size_t>(seg.K) * dim, 0.0);
  std::vector<long> counts(seg.K, 0);
  for (std::size_t n = 0; n < seg.labels.size(); ++n) {
    const int k = seg.labels[n] - 1;
    for (int d = 0; d < dim; ++d)
      sums[static_cast<std::size_t>(k) * dim + d] += values.channels[d][n];
    ++counts[k];
  }
  MultiChannelImage out(dim, seg.rows, seg.cols);
  for (std::size_t n = 0; n < seg.labels.size(); ++n) {
    const int k = seg.labels[n] - 1;
    for (int d = 0; d < dim; ++d)
      out.channels[d][n] = counts[k] > 0
                               ? sums[static_cast<std::size_t>(k) * dim + d] / counts[k]
                               : 0.0;
  }
  return out;
}

SatResult sat_pipeline(const ImageGrid& f, const ConvKernel& blur,
                       const AdmmConfig& cfg, int K, std::uint64_t seed) {
  SatResult res;
  res.smooth = admm_smooth(f, blur, cfg);
  res.seg = threshold_grayscale(res.smooth.u, K, seed);
  res.f_tilde = piecewise_constant(res.seg).channels[0];
  return res;
}

SlatResult slat_pipeline(const MultiChannelImage& f, const ConvKernel& blur,
                         const AdmmConfig& cfg, int K, std::uint64_t seed) {
  if (f.nchannels() != 3 || !f.consistent())
    throw DataError("color pipeline expects three equally shaped channels");
  SlatResult res;
  MultiChannelImage u(3, f.rows(), f.cols());
  for (int c = 0; c < 3; ++c) {
    res.smooth.push_back(admm_smooth(f.channels[c], blur, cfg));
    u.channels[c] = res.smooth.back().u;
  }
  const MultiChannelImage lifted = lift_and_stack(u);
  res.seg = threshold_multichannel(lifted, K, seed);
  // The lifted channels are rescaled for clustering; report the
  // reconstruction in the units of the smoothed RGB image.
  res.f_tilde = cluster_means_image(res.seg, u);
  return res;
}

}  // namespace aitv
