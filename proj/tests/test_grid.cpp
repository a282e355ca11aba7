#include <doctest.h>

#include <cmath>

#include "aitv/errors.hpp"
#include "aitv/grid.hpp"
#include "aitv/rng.hpp"
#include "aitv/solver.hpp"
#include "aitv/spectral.hpp"

using namespace aitv;

namespace {

ImageGrid random_grid(int M, int N, Xoshiro256pp& rng, double lo = -1.0,
                      double hi = 1.0) {
  ImageGrid g(M, N);
  for (std::size_t n = 0; n < g.size(); ++n)
    g[n] = lo + (hi - lo) * rng.uniform01();
  return g;
}

VectorField random_field(int M, int N, Xoshiro256pp& rng) {
  VectorField w(M, N);
  for (std::size_t n = 0; n < w.x.size(); ++n) {
    w.x[n] = 2.0 * rng.uniform01() - 1.0;
    w.y[n] = 2.0 * rng.uniform01() - 1.0;
  }
  return w;
}

}  // namespace

TEST_CASE("gradient of a constant is zero") {
  ImageGrid u(6, 9, 3.25);
  VectorField g = gradient(u);
  for (std::size_t n = 0; n < g.x.size(); ++n) {
    CHECK(g.x[n] == 0.0);
    CHECK(g.y[n] == 0.0);
  }
}

TEST_CASE("gradient on the 2x2 example with periodic wrap") {
  ImageGrid u(2, 2);
  u(0, 0) = 0.0;
  u(0, 1) = 1.0;
  u(1, 0) = 2.0;
  u(1, 1) = 3.0;
  VectorField g = gradient(u);
  CHECK(g.x(0, 0) == -1.0);
  CHECK(g.x(0, 1) == 1.0);
  CHECK(g.x(1, 0) == -1.0);
  CHECK(g.x(1, 1) == 1.0);
  CHECK(g.y(0, 0) == -2.0);
  CHECK(g.y(0, 1) == -2.0);
  CHECK(g.y(1, 0) == 2.0);
  CHECK(g.y(1, 1) == 2.0);
}

TEST_CASE("single-row images have zero vertical differences") {
  Xoshiro256pp rng(7);
  ImageGrid u = random_grid(1, 17, rng);
  VectorField g = gradient(u);
  for (std::size_t n = 0; n < g.y.size(); ++n) CHECK(g.y[n] == 0.0);
}

TEST_CASE("divergence_adjoint is the exact adjoint of gradient") {
  Xoshiro256pp rng(11);
  for (auto [M, N] : {std::pair{1, 1}, {1, 7}, {5, 7}, {33, 17}, {64, 64}}) {
    ImageGrid u = random_grid(M, N, rng);
    VectorField w = random_field(M, N, rng);
    const double lhs = inner(gradient(u), w);
    const double rhs = inner(u, divergence_adjoint(w));
    const double tol = 1e-10 * (norm_l2(u) * norm_l2(w) + 1.0);
    CHECK(std::abs(lhs - rhs) <= tol);
  }
}

TEST_CASE("divergence_adjoint of the zero field is zero") {
  VectorField w(4, 5);
  ImageGrid d = divergence_adjoint(w);
  for (std::size_t n = 0; n < d.size(); ++n) CHECK(d[n] == 0.0);
}

TEST_CASE("field norms on a single nonzero pixel") {
  VectorField w(3, 3);
  w.x(1, 2) = 3.0;
  w.y(1, 2) = 4.0;
  CHECK(norm_l1(w) == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(norm_l21(w) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(norm_l2(w) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("norm ordering l21 <= l1 <= sqrt(2) l21") {
  Xoshiro256pp rng(13);
  VectorField w = random_field(9, 6, rng);
  const double l1 = norm_l1(w), l21 = norm_l21(w);
  CHECK(l21 <= l1 + 1e-12);
  CHECK(l1 <= std::sqrt(2.0) * l21 + 1e-12);
}

TEST_CASE("aitv_value basics") {
  ImageGrid c(4, 4, 2.0);
  CHECK(aitv_value(c, 0.0) == 0.0);
  CHECK(aitv_value(c, 1.0) == 0.0);

  // One vertical jump: every nonzero per-pixel gradient is 1-sparse, so the
  // value is (1 - alpha) per nonzero pair.
  ImageGrid u(3, 4, 0.0);
  for (int i = 0; i < 3; ++i) {
    u(i, 2) = 1.0;
    u(i, 3) = 1.0;
  }
  for (double a : {0.0, 0.5, 1.0})
    CHECK(aitv_value(u, a) == doctest::Approx(6.0 * (1.0 - a)).epsilon(1e-13));

  Xoshiro256pp rng(17);
  ImageGrid r = random_grid(8, 8, rng);
  CHECK(aitv_value(r, 0.7) >= 0.0);
  CHECK_THROWS_AS(aitv_value(r, -0.1), ParamError);
  CHECK_THROWS_AS(aitv_value(r, 1.1), ParamError);
}

TEST_CASE("energy_F at the all-ones fixed point equals lambda*M*N") {
  const int M = 4, N = 5;
  ImageGrid ones(M, N, 1.0);
  SpectralKernel I = kernel_spectrum(identity_kernel(), M, N);
  AdmmConfig cfg;
  cfg.lambda = 2.3;
  cfg.mu = 0.7;
  cfg.alpha = 0.4;
  CHECK(energy_F(ones, ones, I, cfg) ==
        doctest::Approx(2.3 * M * N).epsilon(1e-13));
}

TEST_CASE("energy_F respects the pointwise fidelity lower bound") {
  Xoshiro256pp rng(19);
  const int M = 6, N = 6;
  ImageGrid f = random_grid(M, N, rng, 0.2, 2.0);
  SpectralKernel I = kernel_spectrum(identity_kernel(), M, N);
  AdmmConfig cfg;
  cfg.lambda = 1.7;
  cfg.mu = 0.3;
  cfg.alpha = 0.6;
  double bound = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n)
    bound += f[n] - f[n] * std::log(f[n]);
  bound *= cfg.lambda;
  for (int t = 0; t < 5; ++t) {
    ImageGrid u = random_grid(M, N, rng, 0.05, 3.0);
    CHECK(energy_F(u, f, I, cfg) >= bound - 1e-10);
  }
}

TEST_CASE("energy_F with alpha=0 matches independently summed terms") {
  Xoshiro256pp rng(23);
  ImageGrid u = random_grid(5, 7, rng, 0.1, 2.0);
  ImageGrid f = random_grid(5, 7, rng, 0.1, 2.0);
  SpectralKernel I = kernel_spectrum(identity_kernel(), 5, 7);
  AdmmConfig cfg;
  cfg.lambda = 1.2;
  cfg.mu = 0.8;
  cfg.alpha = 0.0;
  double fid = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n)
    fid += u[n] - f[n] * std::log(u[n]);
  VectorField g = gradient(u);
  double expect = cfg.lambda * fid + 0.5 * cfg.mu * norm_l2(g) * norm_l2(g) +
                  norm_l1(g);
  CHECK(energy_F(u, f, I, cfg) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("energy_F rejects nonpositive blurred intensities") {
  ImageGrid u(2, 2, 1.0);
  u(1, 1) = 0.0;
  ImageGrid f(2, 2, 1.0);
  SpectralKernel I = kernel_spectrum(identity_kernel(), 2, 2);
  AdmmConfig cfg;
  CHECK_THROWS_AS(energy_F(u, f, I, cfg), DataError);
}

TEST_CASE("multi-channel consistency helper") {
  MultiChannelImage img(3, 4, 5);
  CHECK(img.consistent());
  CHECK(img.nchannels() == 3);
  img.channels.push_back(ImageGrid(2, 2));
  CHECK_FALSE(img.consistent());
}
