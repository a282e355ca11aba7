#include "aitv/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aitv/errors.hpp"

namespace aitv {

namespace {
inline double sgn(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }
}

Vec2 prox_l1_minus_l2(const Vec2& v, double alpha, double beta) {
  if (alpha < 0.0 || alpha > 1.0)
    throw ParamError("prox weight alpha must lie in [0,1], got " + std::to_string(alpha));
  if (!(beta > 0.0))
    throw ParamError("prox threshold beta must be positive");

  const double ax = std::abs(v.x), ay = std::abs(v.y);
  const double linf = std::max(ax, ay);

  if (linf > beta) {
    const double sx = std::max(ax - beta, 0.0) * sgn(v.x);
    const double sy = std::max(ay - beta, 0.0) * sgn(v.y);
    const double n = std::hypot(sx, sy);
    const double scale = (n + alpha * beta) / n;
    return {sx * scale, sy * scale};
  }
  if (linf > (1.0 - alpha) * beta) {
    const double mag = linf + (alpha - 1.0) * beta;
    if (ax >= ay) return {mag * sgn(v.x), 0.0};
    return {0.0, mag * sgn(v.y)};
  }
  return {0.0, 0.0};
}

Vec2 prox_l21(const Vec2& v, double beta) {
  if (!(beta > 0.0))
    throw ParamError("prox threshold beta must be positive");
  const double n = std::hypot(v.x, v.y);
  if (n <= beta) return {0.0, 0.0};
  const double scale = (n - beta) / n;
  return {v.x * scale, v.y * scale};
}

VectorField prox_field(const VectorField& w_in, double alpha, double beta,
                       RegMode mode) {
  if (!w_in.x.same_shape(w_in.y))
    throw DataError("vector field components differ in shape");
  VectorField out(w_in.rows(), w_in.cols());
  for (std::size_t n = 0; n < w_in.x.size(); ++n) {
    const Vec2 v{w_in.x[n], w_in.y[n]};
    const Vec2 r = mode == RegMode::aitv ? prox_l1_minus_l2(v, alpha, beta)
                                         : prox_l21(v, beta);
    out.x[n] = r.x;
    out.y[n] = r.y;
  }
  return out;
}

}  // namespace aitv
