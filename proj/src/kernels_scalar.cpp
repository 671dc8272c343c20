#include "dmx/kernels.hpp"

namespace dmx::kernels {
namespace {

void apply_mode_matrices_s(const cplx* mats, const cplx* x, cplx* y,
                           std::size_t nmodes) {
  for (std::size_t k = 0; k < nmodes; ++k) {
    const cplx* m = mats + 16 * k;
    const cplx* v = x + 4 * k;
    cplx* o = y + 4 * k;
    cplx acc0 = 0, acc1 = 0, acc2 = 0, acc3 = 0;
    for (int c = 0; c < 4; ++c) {
      const cplx vc = v[c];
      const cplx* col = m + 4 * c;
      acc0 += col[0] * vc;
      acc1 += col[1] * vc;
      acc2 += col[2] * vc;
      acc3 += col[3] * vc;
    }
    o[0] = acc0;
    o[1] = acc1;
    o[2] = acc2;
    o[3] = acc3;
  }
}

void apply_mode_matrices_adj_s(const cplx* mats, const cplx* x, cplx* y,
                               std::size_t nmodes) {
  // (M^dagger x)_r = sum_c conj(M(c,r)) x_c; column-major storage makes the
  // entries M(.,r) contiguous, so each output row is a conjugated dot.
  for (std::size_t k = 0; k < nmodes; ++k) {
    const cplx* m = mats + 16 * k;
    const cplx* v = x + 4 * k;
    cplx* o = y + 4 * k;
    for (int r = 0; r < 4; ++r) {
      const cplx* col = m + 4 * r;
      o[r] = std::conj(col[0]) * v[0] + std::conj(col[1]) * v[1] +
             std::conj(col[2]) * v[2] + std::conj(col[3]) * v[3];
    }
  }
}

cplx weighted_dot4_s(const double* w, const cplx* x, const cplx* y,
                     std::size_t nmodes) {
  cplx acc = 0;
  for (std::size_t k = 0; k < nmodes; ++k) {
    const cplx* a = x + 4 * k;
    const cplx* b = y + 4 * k;
    cplx s = std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] +
             std::conj(a[2]) * b[2] + std::conj(a[3]) * b[3];
    acc += w[k] * s;
  }
  return acc;
}

void scale_per_mode4_s(const double* s, const cplx* x, cplx* y,
                       std::size_t nmodes) {
  for (std::size_t k = 0; k < nmodes; ++k) {
    const double sk = s[k];
    y[4 * k + 0] = sk * x[4 * k + 0];
    y[4 * k + 1] = sk * x[4 * k + 1];
    y[4 * k + 2] = sk * x[4 * k + 2];
    y[4 * k + 3] = sk * x[4 * k + 3];
  }
}

void scale_flat_real_s(const double* s, const cplx* x, cplx* y,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = s[i] * x[i];
}

cplx dot_s(const cplx* x, const cplx* y, std::size_t n) {
  cplx acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

void axpy_s(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_s(cplx a, cplx* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void beta_density_s(const cplx* psi, cplx* rho, std::size_t nsites) {
  for (std::size_t i = 0; i < nsites; ++i) {
    const cplx* p = psi + 4 * i;
    rho[i] = std::norm(p[0]) + std::norm(p[1]) - std::norm(p[2]) -
             std::norm(p[3]);
  }
}

void abs_density_s(const cplx* psi, cplx* rho, std::size_t nsites) {
  for (std::size_t i = 0; i < nsites; ++i) {
    const cplx* p = psi + 4 * i;
    rho[i] = std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]) +
             std::norm(p[3]);
  }
}

const Ops kScalarOps = {
    "scalar",        apply_mode_matrices_s, apply_mode_matrices_adj_s,
    weighted_dot4_s, scale_per_mode4_s,     scale_flat_real_s,
    dot_s,           axpy_s,                scal_s,
    beta_density_s,  abs_density_s,
};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

}  // namespace dmx::kernels
