#pragma once

#include "aitv/grid.hpp"

namespace aitv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Regularizer selector: the weighted anisotropic-minus-isotropic difference,
// or the plain isotropic coupled norm as the TV baseline.
enum class RegMode { aitv, iso };

// Exact minimizer of  beta*(|x|_1 - alpha*|x|_2) + 0.5*|x - v|^2  over R^2.
// Three regimes on |v|_inf: shrink-and-rescale above beta, a one-sparse
// solution on ((1-alpha)*beta, beta] (ties broken toward the x component),
// and zero at or below (1-alpha)*beta.  Comparisons are exact; no tolerance.
Vec2 prox_l1_minus_l2(const Vec2& v, double alpha, double beta);

// Minimizer of  beta*|x|_2 + 0.5*|x - v|^2  (isotropic shrinkage).
Vec2 prox_l21(const Vec2& v, double beta);

// Applies the selected per-pixel prox independently at every pixel.
VectorField prox_field(const VectorField& w_in, double alpha, double beta,
                       RegMode mode);

}  // namespace aitv
