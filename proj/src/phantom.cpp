#include "aitv/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aitv/errors.hpp"

namespace aitv {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Uniform in [0,1) from a branch id, for reproducible shape jitter.
double jitter(std::uint64_t id, int salt) {
  return static_cast<double>(mix(id * 0x9e3779b97f4a7c15ULL + salt) >> 11) *
         0x1.0p-53;
}

struct Mask {
  int rows, cols;
  std::vector<std::uint8_t> in;
  Mask(int r, int c) : rows(r), cols(c), in(static_cast<std::size_t>(r) * c, 0) {}
  void stamp(double x, double y, double radius) {
    const int i0 = std::max(0, static_cast<int>(std::floor(y - radius)));
    const int i1 = std::min(rows - 1, static_cast<int>(std::ceil(y + radius)));
    const int j0 = std::max(0, static_cast<int>(std::floor(x - radius)));
    const int j1 = std::min(cols - 1, static_cast<int>(std::ceil(x + radius)));
    const double r2 = radius * radius;
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j)
        if ((i - y) * (i - y) + (j - x) * (j - x) <= r2)
          in[static_cast<std::size_t>(i) * cols + j] = 1;
  }
};

struct PathEnd {
  double x, y, ang;
};

PathEnd draw_path(Mask& m, double x, double y, double ang, double len,
                  double w0, double w1, double curv) {
  const double step = 0.5;
  const int steps = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const double w = w0 + (w1 - w0) * t;
    m.stamp(x, y, 0.5 * w);
    x += step * std::cos(ang);
    y += step * std::sin(ang);
    ang += curv * step;
  }
  return {x, y, ang};
}

void vessel_branch(Mask& m, double x, double y, double ang, double len,
                   double width, int depth, std::uint64_t id) {
  if (depth <= 0 || len < 6.0 || width < 0.9) return;
  const double curv = (jitter(id, 1) - 0.5) * 1.0 / len;
  const double w_end = width * 0.82;
  const PathEnd e = draw_path(m, x, y, ang, len, width, w_end, curv);
  const double spread1 = 0.30 + 0.30 * jitter(id, 2);
  const double spread2 = 0.30 + 0.30 * jitter(id, 3);
  const double child_w = w_end * 0.82;
  vessel_branch(m, e.x, e.y, e.ang - spread1, len * (0.70 + 0.12 * jitter(id, 4)),
                child_w, depth - 1, id * 2);
  vessel_branch(m, e.x, e.y, e.ang + spread2, len * (0.70 + 0.12 * jitter(id, 5)),
                child_w, depth - 1, id * 2 + 1);
}

Segmentation make_gt(int rows, int cols, int K, std::vector<int> labels,
                     std::vector<std::vector<double>> centroids) {
  Segmentation gt;
  gt.rows = rows;
  gt.cols = cols;
  gt.K = K;
  gt.labels = std::move(labels);
  gt.centroids = std::move(centroids);
  return gt;
}

}  // namespace

LabeledPhantom phantom_vessels(int rows, int cols) {
  if (rows < 64 || cols < 64) throw ParamError("vessel phantom needs at least 64x64");
  Mask m(rows, cols);
  const double sr = rows / 584.0, sc = cols / 565.0;
  const double s = 0.5 * (sr + sc);

  // Arcades fanning out of a nasal root, as in fundus images.
  const double rx = 90.0 * sc, ry = 0.50 * rows;
  const double deg = std::numbers::pi / 180.0;
  vessel_branch(m, rx, ry, -64.0 * deg, 165.0 * s, 6.8 * s, 5, 11);
  vessel_branch(m, rx, ry, -22.0 * deg, 175.0 * s, 6.6 * s, 5, 22);
  vessel_branch(m, rx, ry, 24.0 * deg, 175.0 * s, 6.6 * s, 5, 33);
  vessel_branch(m, rx, ry, 66.0 * deg, 165.0 * s, 6.8 * s, 5, 44);
  vessel_branch(m, rx, ry, 196.0 * deg, 70.0 * s, 4.5 * s, 3, 55);
  vessel_branch(m, rx, ry, 156.0 * deg, 70.0 * s, 4.5 * s, 3, 66);

  ImageGrid img(rows, cols, 200.0);
  std::vector<int> labels(m.in.size(), 1);
  for (std::size_t n = 0; n < m.in.size(); ++n) {
    if (m.in[n]) {
      img[n] = 255.0;
      labels[n] = 2;
    }
  }
  LabeledPhantom p;
  p.image = MultiChannelImage(std::move(img));
  p.gt = make_gt(rows, cols, 2, std::move(labels), {{200.0}, {255.0}});
  p.region_names = {"background", "vessels"};
  return p;
}

LabeledPhantom phantom_brain(int rows, int cols) {
  if (rows < 32 || cols < 32) throw ParamError("brain phantom needs at least 32x32");
  const double cy = (rows - 1) / 2.0, cx = (cols - 1) / 2.0;
  const double a = 0.46 * rows, b = 0.44 * cols;

  ImageGrid img(rows, cols, 10.0);
  std::vector<int> labels(img.size(), 1);
  const double values[4] = {10.0, 48.0, 106.0, 154.0};

  auto ventricle = [&](double i, double j, double vy, double vx, double tilt) {
    const double dy = i - (cy + vy), dx = j - (cx + vx);
    const double c = std::cos(tilt), s = std::sin(tilt);
    const double ry = (c * dy - s * dx) / 9.0;
    const double rx = (s * dy + c * dx) / 3.0;
    return ry * ry + rx * rx <= 1.0;
  };

  // Each interface carries its own lobed modulation so none of the region
  // boundaries is a bland ellipse.
  auto m_outer = [](double t) {
    return 1.0 + 0.06 * std::sin(3.0 * t + 0.7) + 0.04 * std::sin(5.0 * t + 2.1) +
           0.03 * std::sin(7.0 * t + 0.9);
  };
  auto m_csf = [](double t) {
    return 1.0 + 0.05 * std::sin(4.0 * t + 1.2) + 0.035 * std::sin(6.0 * t + 2.8);
  };
  auto m_gm = [](double t) {
    return 1.0 + 0.08 * std::sin(4.0 * t + 0.3) + 0.05 * std::sin(7.0 * t + 1.9);
  };

  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double dy = (i - cy) / a, dx = (j - cx) / b;
      const double theta = std::atan2(dy, dx);
      const double rho = std::sqrt(dx * dx + dy * dy);
      int region;  // 0 bg, 1 fluid, 2 gray, 3 white
      if (rho > m_outer(theta))
        region = 0;
      else if (rho > 0.84 * m_csf(theta))
        region = 1;
      else if (rho > 0.60 * m_gm(theta))
        region = 2;
      else
        region = 3;
      if (region == 3 && (ventricle(i, j, -6.0, -9.0, 0.5) ||
                          ventricle(i, j, -6.0, 9.0, -0.5)))
        region = 1;
      img(i, j) = values[region];
      labels[static_cast<std::size_t>(i) * cols + j] = region + 1;
    }
  }
  LabeledPhantom p;
  p.image = MultiChannelImage(std::move(img));
  p.gt = make_gt(rows, cols, 4, std::move(labels),
                 {{10.0}, {48.0}, {106.0}, {154.0}});
  p.region_names = {"background", "CSF", "GM", "WM"};
  return p;
}

LabeledPhantom phantom_shapes(int rows, int cols) {
  if (rows < 64 || cols < 64) throw ParamError("shapes phantom needs at least 64x64");
  const double sr = rows / 375.0, sc = cols / 500.0;
  // Well separated hues, with every channel at 0.3 or above: at the photon
  // counts the low-light experiments use, channels much darker than that are
  // dominated by zero-count pixels and the fidelity term loses its grip.
  const double colors[6][3] = {
      {0.30, 0.40, 0.90},  // background
      {0.90, 0.30, 0.30},  // rectangle
      {0.30, 0.90, 0.35},  // ellipse
      {0.95, 0.90, 0.30},  // ring
      {0.85, 0.30, 0.90},  // triangle
      {0.30, 0.90, 0.90},  // disc
  };

  auto in_rect = [&](double i, double j) {
    const double ci = 105.0 * sr, cj = 125.0 * sc, hi = 60.0 * sr, hj = 85.0 * sc;
    const double th = 18.0 * std::numbers::pi / 180.0;
    const double di = i - ci, dj = j - cj;
    const double u = std::cos(th) * dj + std::sin(th) * di;
    const double v = -std::sin(th) * dj + std::cos(th) * di;
    return std::abs(u) <= hj && std::abs(v) <= hi;
  };
  auto in_ellipse = [&](double i, double j) {
    const double di = (i - 95.0 * sr) / (62.0 * sr);
    const double dj = (j - 385.0 * sc) / (82.0 * sc);
    return di * di + dj * dj <= 1.0;
  };
  auto in_ring = [&](double i, double j) {
    const double di = i - 275.0 * sr, dj = j - 105.0 * sc;
    const double r = std::hypot(di / sr, dj / sc);
    return r >= 40.0 && r <= 50.0;
  };
  // Resolution-chart style grating; shares the rectangle color, so it is a
  // second component of that region.
  auto in_bars = [&](double i, double j) {
    const double y = i / sr, x = j / sc;
    if (y < 250.0 || y > 330.0) return false;
    return (x >= 172.0 && x <= 177.0) || (x >= 185.0 && x <= 190.0) ||
           (x >= 198.0 && x <= 203.0);
  };
  auto in_tri = [&](double i, double j) {
    const double px[3] = {245.0 * sc, 215.0 * sc, 460.0 * sc};
    const double py[3] = {215.0 * sr, 350.0 * sr, 290.0 * sr};
    double sgn[3];
    for (int k = 0; k < 3; ++k) {
      const int k2 = (k + 1) % 3;
      sgn[k] = (px[k2] - px[k]) * (i - py[k]) - (py[k2] - py[k]) * (j - px[k]);
    }
    const bool neg = sgn[0] < 0 || sgn[1] < 0 || sgn[2] < 0;
    const bool pos = sgn[0] > 0 || sgn[1] > 0 || sgn[2] > 0;
    return !(neg && pos);
  };
  auto in_disc = [&](double i, double j) {
    const double di = (i - 175.0 * sr) / sr, dj = (j - 295.0 * sc) / sc;
    return di * di + dj * dj <= 28.0 * 28.0;
  };

  auto region_at = [&](double i, double j) {
    if (in_rect(i, j) || in_bars(i, j)) return 1;
    if (in_ellipse(i, j)) return 2;
    if (in_ring(i, j)) return 3;
    if (in_tri(i, j)) return 4;
    if (in_disc(i, j)) return 5;
    return 0;
  };

  // Colors are box-averaged over a 2x2 pixel footprint, giving roughly two
  // pixels of soft edge as a lens would; labels stay crisp (center point).
  MultiChannelImage img(3, rows, cols);
  std::vector<int> labels(static_cast<std::size_t>(rows) * cols, 1);
  const int ss = 8;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int si = 0; si < ss; ++si) {
        for (int sj = 0; sj < ss; ++sj) {
          const double oi = (si + 0.5) / ss * 2.0 - 1.0;
          const double oj = (sj + 0.5) / ss * 2.0 - 1.0;
          const int reg = region_at(i + oi, j + oj);
          for (int c = 0; c < 3; ++c) acc[c] += colors[reg][c];
        }
      }
      for (int c = 0; c < 3; ++c) img.channels[c](i, j) = acc[c] / (ss * ss);
      labels[static_cast<std::size_t>(i) * cols + j] = region_at(i, j) + 1;
    }
  }
  std::vector<std::vector<double>> cent(6);
  for (int k = 0; k < 6; ++k) cent[k] = {colors[k][0], colors[k][1], colors[k][2]};
  LabeledPhantom p;
  p.image = std::move(img);
  p.gt = make_gt(rows, cols, 6, std::move(labels), std::move(cent));
  p.region_names = {"background", "rectangle", "ellipse", "ring", "triangle", "disc"};
  return p;
}

LabeledPhantom make_phantom(const std::string& name, int rows, int cols) {
  if (name == "vessels")
    return phantom_vessels(rows > 0 ? rows : 584, cols > 0 ? cols : 565);
  if (name == "brain")
    return phantom_brain(rows > 0 ? rows : 104, cols > 0 ? cols : 87);
  if (name == "shapes")
    return phantom_shapes(rows > 0 ? rows : 375, cols > 0 ? cols : 500);
  throw ParamError("unknown phantom '" + name + "' (vessels, brain, shapes)");
}

}  // namespace aitv
