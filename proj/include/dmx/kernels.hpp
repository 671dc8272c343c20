#pragma once

// Data-parallel inner-loop kernels, provided as a scalar reference
// implementation plus AVX2/FMA variants selected once at startup by CPU
// probing. Set DMXM_KERNELS=scalar or DMXM_KERNELS=avx2 to force a variant
// (forcing avx2 on a CPU without it is an error).
//
// All complex arrays are std::complex<double> in interleaved (re,im) layout.
// Per-mode 4x4 matrices are stored column-major: entry (row r, col c) of the
// matrix for mode k lives at mats[16*k + 4*c + r].

#include <complex>
#include <cstddef>

namespace dmx::kernels {

using cplx = std::complex<double>;

struct Ops {
  const char* name;

  // y_k = M_k x_k for nmodes 4x4 complex matrices acting on 4-spinors.
  void (*apply_mode_matrices)(const cplx* mats, const cplx* x, cplx* y,
                              std::size_t nmodes);

  // y_k = M_k^dagger x_k (adjoint application, same storage).
  void (*apply_mode_matrices_adj)(const cplx* mats, const cplx* x, cplx* y,
                                  std::size_t nmodes);

  // sum_k w_k <x_k, y_k> over 4-spinors, w real per mode, <,> conjugates x.
  cplx (*weighted_dot4)(const double* w, const cplx* x, const cplx* y,
                        std::size_t nmodes);

  // y_k = s_k x_k on 4-spinors, s real per mode (diagonal scaling).
  void (*scale_per_mode4)(const double* s, const cplx* x, cplx* y,
                          std::size_t nmodes);

  // y_i = s_i x_i on flat complex arrays, s real per element.
  void (*scale_flat_real)(const double* s, const cplx* x, cplx* y,
                          std::size_t n);

  // sum_i conj(x_i) y_i over flat complex arrays.
  cplx (*dot)(const cplx* x, const cplx* y, std::size_t n);

  // y_i += a x_i.
  void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);

  // x_i *= a.
  void (*scal)(cplx a, cplx* x, std::size_t n);

  // rho_i = |psi_i1|^2 + |psi_i2|^2 - |psi_i3|^2 - |psi_i4|^2 (imag part 0).
  void (*beta_density)(const cplx* psi, cplx* rho, std::size_t nsites);

  // rho_i = |psi_i1|^2 + |psi_i2|^2 + |psi_i3|^2 + |psi_i4|^2 (imag part 0).
  void (*abs_density)(const cplx* psi, cplx* rho, std::size_t nsites);
};

// Kernels selected for this process (CPU probe + DMXM_KERNELS override).
const Ops& ops();

// Always-available scalar reference kernels (ground truth for equivalence
// tests).
const Ops& scalar_ops();

// AVX2 kernels, or nullptr when unsupported by the build or the CPU.
const Ops* avx2_ops();

}  // namespace dmx::kernels
