#include "aitv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aitv/errors.hpp"
#include "aitv/prox.hpp"

namespace aitv {

namespace {

constexpr double kIntensityFloor = 1e-8;
constexpr double kDenomFloor = 1e-14;
constexpr double kTiny = 1e-300;

void validate_config(const AdmmConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw ParamError("fidelity weight lambda must be positive");
  if (!(cfg.mu >= 0.0)) throw ParamError("smoothing weight mu must be nonnegative");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
    throw ParamError("alpha must lie in [0,1], got " + std::to_string(cfg.alpha));
  if (!(cfg.beta0 > 0.0)) throw ParamError("beta0 must be positive");
  if (!(cfg.sigma > 1.0)) throw ParamError("penalty growth sigma must exceed 1");
  if (!(cfg.eps > 0.0)) throw ParamError("stopping tolerance eps must be positive");
  if (cfg.max_iter < 1) throw ParamError("max_iter must be at least 1");
}

ImageGrid clamp_floor(const ImageGrid& f) {
  ImageGrid out = f;
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (!std::isfinite(out[n])) throw DataError("non-finite input intensity");
    if (out[n] < 0.0) throw DataError("negative input intensity");
    out[n] = std::max(out[n], kIntensityFloor);
  }
  return out;
}

double sum_sq(const VectorField& g) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.x.size(); ++n)
    s += g.x[n] * g.x[n] + g.y[n] * g.y[n];
  return s;
}

double reg_value(const VectorField& g, const AdmmConfig& cfg) {
  return cfg.mode == RegMode::aitv ? norm_l1(g) - cfg.alpha * norm_l21(g)
                                   : norm_l21(g);
}

// Plans, multiplier tables and scratch buffers reused across sweeps.
struct Work {
  int M, N;
  Dft2d dft;
  SpectralKernel A;
  bool ident;
  std::vector<double> absA2;
  std::vector<std::complex<double>> gx, gy;
  std::vector<double> lapneg;  // |gx|^2 + |gy|^2, the negated laplacian multiplier
  ImageGrid rhs1, tx, ty;
  std::vector<std::complex<double>> F1, F2x, F2y, u_hat, scratch;

  Work(SpectralKernel spec, int rows, int cols)
      : M(rows),
        N(cols),
        dft(rows, cols),
        A(std::move(spec)),
        ident(A.is_identity()),
        rhs1(rows, cols),
        tx(rows, cols),
        ty(rows, cols) {
    const std::size_t n = static_cast<std::size_t>(M) * N;
    absA2.resize(n);
    for (std::size_t k = 0; k < n; ++k) absA2[k] = std::norm(A.data()[k]);
    const SpectralKernel dx = dx_spectrum(M, N), dy = dy_spectrum(M, N);
    gx.assign(dx.data(), dx.data() + n);
    gy.assign(dy.data(), dy.data() + n);
    lapneg.resize(n);
    for (std::size_t k = 0; k < n; ++k)
      lapneg[k] = std::norm(gx[k]) + std::norm(gy[k]);
    F1.resize(n);
    F2x.resize(n);
    F2y.resize(n);
    u_hat.resize(n);
    scratch.resize(n);
  }

  ImageGrid inverse_checked(const std::vector<std::complex<double>>& spec,
                            const ImageGrid& scale_ref) {
    const double linf =
        std::max(std::abs(scale_ref.max_value()), std::abs(scale_ref.min_value()));
    return dft.inverse_real(spec, 1e-6 * (1.0 + linf));
  }

  ImageGrid correlate(const ImageGrid& g) {
    if (ident) return g;
    auto hat = dft.forward(g);
    for (std::size_t k = 0; k < hat.size(); ++k) hat[k] *= std::conj(A.data()[k]);
    return inverse_checked(hat, g);
  }
};

// Minimizes the quadratic coupling in u by one frequency-domain solve of
//   [beta*A^T A + (mu+beta)*Grad^T Grad] u = A^T(beta*v - y) + DivAdj(beta*w - z).
void u_update(Work& wk, const AdmmState& s, double mu, ImageGrid& u_out,
              ImageGrid& Au_out, double* lin_res) {
  const double beta = s.beta;
  const std::size_t n = static_cast<std::size_t>(wk.M) * wk.N;
  for (std::size_t k = 0; k < n; ++k) {
    wk.rhs1[k] = beta * s.v[k] - s.y[k];
    wk.tx[k] = s.z.x[k] - beta * s.w.x[k];
    wk.ty[k] = s.z.y[k] - beta * s.w.y[k];
  }
  wk.dft.forward(wk.rhs1.data(), wk.F1.data());
  wk.dft.forward(wk.tx.data(), wk.F2x.data());
  wk.dft.forward(wk.ty.data(), wk.F2y.data());
  const std::complex<double>* A = wk.A.data();
  for (std::size_t k = 0; k < n; ++k) {
    const std::complex<double> num = std::conj(A[k]) * wk.F1[k] -
                                     std::conj(wk.gx[k]) * wk.F2x[k] -
                                     std::conj(wk.gy[k]) * wk.F2y[k];
    const double den = beta * wk.absA2[k] + (mu + beta) * wk.lapneg[k];
    if (den < kDenomFloor)
      throw NumericalError("singular spectral denominator at mode " +
                           std::to_string(k));
    wk.u_hat[k] = num / den;
  }
  const double imag = wk.dft.inverse(wk.u_hat.data(), u_out.data());
  const double linf =
      std::max(std::abs(u_out.max_value()), std::abs(u_out.min_value()));
  if (imag > 1e-6 * (1.0 + linf))
    throw NumericalError("u solve produced a non-real image");
  if (wk.ident) {
    Au_out = u_out;
  } else {
    for (std::size_t k = 0; k < n; ++k) wk.scratch[k] = A[k] * wk.u_hat[k];
    Au_out = wk.inverse_checked(wk.scratch, u_out);
  }

  if (lin_res) {
    // Re-apply both operators on the spatial side and compare against a
    // spatially assembled right-hand side.
    const ImageGrid AtAu = wk.correlate(Au_out);
    const ImageGrid lap = divergence_adjoint(gradient(u_out));
    const ImageGrid Atr = wk.correlate(wk.rhs1);
    VectorField bw(wk.M, wk.N);
    for (std::size_t k = 0; k < n; ++k) {
      bw.x[k] = -wk.tx[k];
      bw.y[k] = -wk.ty[k];
    }
    const ImageGrid div_bw = divergence_adjoint(bw);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double lhs = beta * AtAu[k] + (mu + beta) * lap[k];
      const double rhs = Atr[k] + div_bw[k];
      num += (lhs - rhs) * (lhs - rhs);
      den += rhs * rhs;
    }
    *lin_res = std::sqrt(num) / std::max(std::sqrt(den), kTiny);
  }
}

// Closed-form positive root of  beta*v^2 - t*v - lambda*f = 0, arranged to
// avoid cancellation when t is negative.
void v_update(const ImageGrid& Au, const ImageGrid& y, const ImageGrid& f,
              double lambda, double beta, ImageGrid& v_out) {
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double t = beta * Au[k] + y[k] - lambda;
    const double r = std::sqrt(t * t + 4.0 * lambda * beta * f[k]);
    v_out[k] = t >= 0.0 ? (t + r) / (2.0 * beta)
                        : (2.0 * lambda * f[k]) / (r - t);
  }
}

void w_update(const VectorField& gu, const VectorField& z, double beta,
              double alpha, RegMode mode, VectorField& w_out) {
  const double thr = 1.0 / beta;
  for (std::size_t k = 0; k < gu.x.size(); ++k) {
    const Vec2 p{gu.x[k] + z.x[k] / beta, gu.y[k] + z.y[k] / beta};
    const Vec2 r =
        mode == RegMode::aitv ? prox_l1_minus_l2(p, alpha, thr) : prox_l21(p, thr);
    w_out.x[k] = r.x;
    w_out.y[k] = r.y;
  }
}

double fidelity_or_nan(const ImageGrid& g, const ImageGrid& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (g[k] <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    s += g[k] - f[k] * std::log(g[k]);
  }
  return s;
}

}  // namespace

SmoothResult admm_smooth(const ImageGrid& f_in, const ConvKernel& blur,
                         const AdmmConfig& cfg, AdmmState* final_state) {
  validate_config(cfg);
  if (f_in.size() == 0) throw DataError("empty input image");
  const ImageGrid f = clamp_floor(f_in);
  const int M = f.rows(), N = f.cols();
  Work wk(kernel_spectrum(blur, M, N), M, N);

  AdmmState s;
  s.u = f;
  s.v = circular_convolve(f, wk.A);
  s.w = gradient(f);
  s.y = ImageGrid(M, N, 0.0);
  s.z = VectorField(M, N);
  s.beta = cfg.beta0;
  s.k = 0;

  ImageGrid u_new(M, N), Au(M, N), v_new(M, N);
  VectorField w_new(M, N);
  const std::size_t n = f.size();

  SmoothResult res;
  double rel = std::numeric_limits<double>::infinity();
  double r1 = 0.0, r2 = 0.0;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    double lin_res = std::numeric_limits<double>::quiet_NaN();
    u_update(wk, s, cfg.mu, u_new, Au,
             cfg.check_linear_solve ? &lin_res : nullptr);
    if (!u_new.all_finite())
      throw NumericalError("sweep " + std::to_string(k) +
                           " produced non-finite intensities");
    v_update(Au, s.y, f, cfg.lambda, s.beta, v_new);
    const VectorField gu = gradient(u_new);
    w_update(gu, s.z, s.beta, cfg.alpha, cfg.mode, w_new);

    double diff = 0.0, nrm = 0.0;
    r1 = r2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = u_new[j] - s.u[j];
      diff += d * d;
      nrm += u_new[j] * u_new[j];
      const double e1 = Au[j] - v_new[j];
      r1 += e1 * e1;
      const double ex = gu.x[j] - w_new.x[j];
      const double ey = gu.y[j] - w_new.y[j];
      r2 += ex * ex + ey * ey;
    }
    rel = std::sqrt(diff) / std::max(std::sqrt(nrm), kTiny);

    for (std::size_t j = 0; j < n; ++j) {
      s.y[j] += s.beta * (Au[j] - v_new[j]);
      s.z.x[j] += s.beta * (gu.x[j] - w_new.x[j]);
      s.z.y[j] += s.beta * (gu.y[j] - w_new.y[j]);
    }
    std::swap(s.u, u_new);
    std::swap(s.v, v_new);
    std::swap(s.w, w_new);

    if (cfg.record_trace) {
      IterationRecord rec;
      rec.k = k;
      rec.rel_err = rel;
      rec.res_au_v = std::sqrt(r1);
      rec.res_grad_w = std::sqrt(r2);
      double lag = std::numeric_limits<double>::quiet_NaN();
      const double fid_v = fidelity_or_nan(s.v, f);
      if (!std::isnan(fid_v)) {
        lag = cfg.lambda * fid_v + 0.5 * cfg.mu * sum_sq(gu) + reg_value(s.w, cfg);
        for (std::size_t j = 0; j < n; ++j) {
          const double e1 = Au[j] - s.v[j];
          const double ex = gu.x[j] - s.w.x[j];
          const double ey = gu.y[j] - s.w.y[j];
          lag += s.y[j] * e1 + 0.5 * s.beta * e1 * e1;
          lag += s.z.x[j] * ex + s.z.y[j] * ey +
                 0.5 * s.beta * (ex * ex + ey * ey);
        }
      }
      rec.lagrangian = lag;
      const double fid_u = fidelity_or_nan(Au, f);
      rec.energy = std::isnan(fid_u)
                       ? fid_u
                       : cfg.lambda * fid_u + 0.5 * cfg.mu * sum_sq(gu) +
                             reg_value(gu, cfg);
      rec.lin_residual = lin_res;
      res.trace.push_back(rec);
    }

    s.beta *= cfg.sigma;
    s.k = k;
    if (rel <= cfg.eps) break;
  }

  if (final_state) *final_state = s;
  res.u = std::move(s.u);
  res.iterations = s.k;
  res.rel_err = rel;
  res.res_au_v = std::sqrt(r1);
  res.res_grad_w = std::sqrt(r2);
  return res;
}

double energy_F(const ImageGrid& u, const ImageGrid& f, const SpectralKernel& A,
                const AdmmConfig& cfg) {
  if (!u.same_shape(f)) throw DataError("image shapes differ");
  const ImageGrid Au = circular_convolve(u, A);
  double fid = 0.0;
  for (int i = 0; i < u.rows(); ++i) {
    for (int j = 0; j < u.cols(); ++j) {
      const double a = Au(i, j);
      if (a <= 0.0)
        throw DataError("nonpositive blurred intensity at pixel (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
      fid += a - f(i, j) * std::log(a);
    }
  }
  const VectorField g = gradient(u);
  return cfg.lambda * fid + 0.5 * cfg.mu * sum_sq(g) + reg_value(g, cfg);
}

double augmented_lagrangian(const AdmmState& s, const ImageGrid& f,
                            const SpectralKernel& A, const AdmmConfig& cfg) {
  const ImageGrid Au = circular_convolve(s.u, A);
  double fid = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (s.v[k] <= 0.0) throw DataError("nonpositive v in lagrangian");
    fid += s.v[k] - f[k] * std::log(s.v[k]);
  }
  const VectorField gu = gradient(s.u);
  double lag = cfg.lambda * fid + 0.5 * cfg.mu * sum_sq(gu) + reg_value(s.w, cfg);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double e1 = Au[k] - s.v[k];
    const double ex = gu.x[k] - s.w.x[k];
    const double ey = gu.y[k] - s.w.y[k];
    lag += s.y[k] * e1 + 0.5 * s.beta * e1 * e1;
    lag += s.z.x[k] * ex + s.z.y[k] * ey + 0.5 * s.beta * (ex * ex + ey * ey);
  }
  return lag;
}

ImageGrid solve_u(const AdmmState& s, const SpectralKernel& A,
                  const AdmmConfig& cfg, double* lin_residual) {
  Work wk(A, s.u.rows(), s.u.cols());
  ImageGrid u(s.u.rows(), s.u.cols()), Au(s.u.rows(), s.u.cols());
  u_update(wk, s, cfg.mu, u, Au, lin_residual);
  return u;
}

ImageGrid solve_v(const ImageGrid& Au, const ImageGrid& y, const ImageGrid& f,
                  double lambda, double beta) {
  if (!Au.same_shape(y) || !Au.same_shape(f))
    throw DataError("image shapes differ");
  if (!(lambda > 0.0) || !(beta > 0.0))
    throw ParamError("lambda and beta must be positive");
  ImageGrid v(Au.rows(), Au.cols());
  v_update(Au, y, f, lambda, beta, v);
  return v;
}

VectorField solve_w(const VectorField& grad_u, const VectorField& z, double beta,
                    double alpha, RegMode mode) {
  if (!grad_u.x.same_shape(z.x)) throw DataError("field shapes differ");
  if (!(beta > 0.0)) throw ParamError("beta must be positive");
  VectorField w(grad_u.rows(), grad_u.cols());
  w_update(grad_u, z, beta, alpha, mode, w);
  return w;
}

void update_multipliers(AdmmState& s, const ImageGrid& Au,
                        const VectorField& grad_u, double sigma) {
  if (!(sigma > 1.0)) throw ParamError("penalty growth sigma must exceed 1");
  if (!Au.same_shape(s.v) || !grad_u.x.same_shape(s.w.x))
    throw DataError("multiplier update shapes differ");
  for (std::size_t n = 0; n < s.y.size(); ++n) {
    s.y[n] += s.beta * (Au[n] - s.v[n]);
    s.z.x[n] += s.beta * (grad_u.x[n] - s.w.x[n]);
    s.z.y[n] += s.beta * (grad_u.y[n] - s.w.y[n]);
  }
  s.beta *= sigma;
  s.k += 1;
}

StationarityReport stationarity_residuals(const AdmmState& s, const ImageGrid& f,
                                          const SpectralKernel& A,
                                          const AdmmConfig& cfg) {
  const std::size_t n = s.u.size();
  StationarityReport rep;

  ImageGrid Aty = s.y;
  ImageGrid Au = s.u;
  if (!A.is_identity()) {
    Dft2d dft(s.u.rows(), s.u.cols());
    auto yhat = dft.forward(s.y);
    for (std::size_t k = 0; k < n; ++k) yhat[k] *= std::conj(A.data()[k]);
    Aty = dft.inverse_real(yhat, 1e-6 * (1.0 + norm_l2(s.y)));
    Au = circular_convolve(s.u, A);
  }
  const VectorField gu = gradient(s.u);
  const ImageGrid lap = divergence_adjoint(gu);  // Grad^T Grad u = -Lap u
  const ImageGrid dz = divergence_adjoint(s.z);

  double ru2 = 0.0, nl = 0.0, na = 0.0, nd = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = cfg.mu * lap[k] + Aty[k] + dz[k];
    ru2 += r * r;
    nl += lap[k] * lap[k];
    na += Aty[k] * Aty[k];
    nd += dz[k] * dz[k];
  }
  rep.r_u = std::sqrt(ru2);
  rep.s_u =
      rep.r_u / (cfg.mu * std::sqrt(nl) + std::sqrt(na) + std::sqrt(nd) + 1e-12);

  double rv2 = 0.0, ny2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (s.v[k] <= 0.0) throw DataError("nonpositive v in stationarity check");
    const double r = cfg.lambda * (1.0 - f[k] / s.v[k]) - s.y[k];
    rv2 += r * r;
    ny2 += s.y[k] * s.y[k];
  }
  rep.r_v = std::sqrt(rv2);
  rep.s_v = rep.r_v / (cfg.lambda * std::sqrt(static_cast<double>(n)) +
                       std::sqrt(ny2) + 1e-12);

  double rw2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double wx = s.w.x[k], wy = s.w.y[k];
    const double zx = s.z.x[k], zy = s.z.y[k];
    double d2 = 0.0;
    if (cfg.mode == RegMode::aitv) {
      if (wx != 0.0 || wy != 0.0) {
        const double nw = std::hypot(wx, wy);
        double dx, dy;
        if (wx != 0.0)
          dx = zx - ((wx > 0 ? 1.0 : -1.0) - cfg.alpha * wx / nw);
        else
          dx = std::max(std::abs(zx) - 1.0, 0.0);
        if (wy != 0.0)
          dy = zy - ((wy > 0 ? 1.0 : -1.0) - cfg.alpha * wy / nw);
        else
          dy = std::max(std::abs(zy) - 1.0, 0.0);
        d2 = dx * dx + dy * dy;
      } else {
        const double box = std::hypot(std::max(std::abs(zx) - 1.0, 0.0),
                                      std::max(std::abs(zy) - 1.0, 0.0));
        const double d = std::max(box - cfg.alpha, 0.0);
        d2 = d * d;
      }
    } else {
      if (wx != 0.0 || wy != 0.0) {
        const double nw = std::hypot(wx, wy);
        const double dx = zx - wx / nw, dy = zy - wy / nw;
        d2 = dx * dx + dy * dy;
      } else {
        const double d = std::max(std::hypot(zx, zy) - 1.0, 0.0);
        d2 = d * d;
      }
    }
    rw2 += d2;
  }
  rep.r_w = std::sqrt(rw2);
  const double wscale = cfg.mode == RegMode::aitv ? 1.0 + cfg.alpha : 2.0;
  rep.s_w = rep.r_w / (wscale * std::sqrt(static_cast<double>(n)));

  double p1 = 0.0, p2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e1 = Au[k] - s.v[k];
    p1 += e1 * e1;
    const double ex = gu.x[k] - s.w.x[k];
    const double ey = gu.y[k] - s.w.y[k];
    p2 += ex * ex + ey * ey;
  }
  rep.r_au_v = std::sqrt(p1);
  rep.r_grad_w = std::sqrt(p2);
  const double nf = std::max(norm_l2(f), kTiny);
  rep.s_au_v = rep.r_au_v / nf;
  rep.s_grad_w = rep.r_grad_w / nf;
  return rep;
}

}  // namespace aitv
