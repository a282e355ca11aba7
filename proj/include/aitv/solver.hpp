#pragma once

#include <vector>

#include "aitv/grid.hpp"
#include "aitv/prox.hpp"
#include "aitv/spectral.hpp"

namespace aitv {

struct AdmmConfig {
  double lambda = 1.0;  // fidelity weight
  double mu = 1.0;      // quadratic smoothing weight
  double alpha = 0.5;   // anisotropic-minus-isotropic weight (aitv mode)
  double beta0 = 1.0;   // initial penalty
  double sigma = 1.25;  // penalty growth factor
  double eps = 1e-4;    // relative-change stopping tolerance
  int max_iter = 300;
  RegMode mode = RegMode::aitv;
  bool record_trace = false;
  bool check_linear_solve = false;
};

// Iterates of the alternating scheme.  v approximates the blurred image Au,
// w approximates grad u; y and z are the matching multipliers.
struct AdmmState {
  ImageGrid u, v, y;
  VectorField w, z;
  double beta = 1.0;
  int k = 0;
};

struct IterationRecord {
  int k = 0;
  double rel_err = 0.0;
  double res_au_v = 0.0;    // ||Au - v||_2
  double res_grad_w = 0.0;  // ||grad u - w||_2
  double lagrangian = 0.0;
  double energy = 0.0;      // NaN when log-fidelity is undefined (Au <= 0)
  double lin_residual = 0.0;  // relative residual of the u solve; NaN if unchecked
};

struct SmoothResult {
  ImageGrid u;
  int iterations = 0;
  double rel_err = 0.0;
  double res_au_v = 0.0;
  double res_grad_w = 0.0;
  std::vector<IterationRecord> trace;
};

// Residuals of the first-order optimality system at a state, reported raw
// and in scale-free form.
struct StationarityReport {
  double r_u = 0.0;  // || -mu*Lap(u) + A^T y + Grad^T z ||_2
  double r_v = 0.0;  // || lambda*(1 - f/v) - y ||_2
  double r_w = 0.0;  // l2 aggregate of pixelwise distances of z to the
                     // subdifferential of the regularizer at w
  double r_au_v = 0.0;
  double r_grad_w = 0.0;
  double s_u = 0.0;
  double s_v = 0.0;
  double s_w = 0.0;
  double s_au_v = 0.0;   // r_au_v / ||f||_2
  double s_grad_w = 0.0; // r_grad_w / ||f||_2
};

// Smooths a nonnegative image under Poissonian log-fidelity, quadratic
// gradient penalty and (weighted anisotropic - isotropic) total variation,
// by alternating minimization with multiplier updates and a geometrically
// growing penalty.  Stops when the relative change of u falls to cfg.eps
// or after cfg.max_iter sweeps.  When final_state is non-null the last
// iterate (including multipliers) is copied out for diagnostics.
SmoothResult admm_smooth(const ImageGrid& f, const ConvKernel& blur,
                         const AdmmConfig& cfg,
                         AdmmState* final_state = nullptr);

// Objective the scheme minimizes:
//   lambda * sum(Au - f.*log(Au)) + mu/2 * ||grad u||_2^2 + R(grad u)
// with R either the weighted difference or the isotropic coupled norm.
// Throws DataError naming the first pixel where Au <= 0.
double energy_F(const ImageGrid& u, const ImageGrid& f, const SpectralKernel& A,
                const AdmmConfig& cfg);

double augmented_lagrangian(const AdmmState& s, const ImageGrid& f,
                            const SpectralKernel& A, const AdmmConfig& cfg);

// One sweep of each subproblem, exposed for verification.  solve_u also
// reports the relative residual of the linear system it solves when
// lin_residual is non-null.
ImageGrid solve_u(const AdmmState& s, const SpectralKernel& A,
                  const AdmmConfig& cfg, double* lin_residual = nullptr);
ImageGrid solve_v(const ImageGrid& Au, const ImageGrid& y, const ImageGrid& f,
                  double lambda, double beta);
VectorField solve_w(const VectorField& grad_u, const VectorField& z, double beta,
                    double alpha, RegMode mode);

// y += beta*(Au - v), z += beta*(grad u - w), beta *= sigma, k += 1.
void update_multipliers(AdmmState& s, const ImageGrid& Au,
                        const VectorField& grad_u, double sigma);

StationarityReport stationarity_residuals(const AdmmState& s, const ImageGrid& f,
                                          const SpectralKernel& A,
                                          const AdmmConfig& cfg);

}  // namespace aitv
