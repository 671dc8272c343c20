// Spectral calculus of the free Dirac operator H = -i alpha.grad + m beta:
// per-mode eigenvalue lambda(p) = sqrt(|p|^2 + m^2), energy projectors, the
// lambda-weighted inner product, and the Foldy-Wouthuysen diagonalization.
//
// All 4x4 mode matrices are stored column-major, 16 entries per mode, entry
// (r, c) of mode k at mats[16*k + 4*c + r] — the layout the compute kernels
// expect. The Dirac matrices use the standard representation with Hermitian
// Pauli blocks, so H is self-adjoint and the projectors are orthogonal.

#pragma once

#include "dmx/grid.hpp"

namespace dmx {

enum class EnergySign { plus, minus };

struct DiracMultipliers {
  GridPtr grid;
  double mass = 0.0;
  // per-mode scalars, indexed like momentum-space sites
  std::vector<double> lambda, inv_lambda, u_plus, u_minus;
  // per-mode 4x4 matrices (column-major)
  std::vector<cplx> proj_plus, proj_minus, h_matrix, fw_matrix;
};

// mass must be positive. At p = 0 the matrices take their analytic limits:
// proj_plus = diag(1,1,0,0), fw_matrix = I.
DiracMultipliers build_multipliers(const GridPtr& grid, double mass);

// Mode-wise H application; input must be momentum space on the same grid.
SpinorField apply_H(const DiracMultipliers& mult, const SpinorField& psi);

// Orthogonal projection onto the positive/negative energy subspace.
SpinorField project(const DiracMultipliers& mult, const SpinorField& psi,
                    EnergySign sign);

// lambda(p)-weighted Hermitian inner product (conjugation on the first slot).
cplx h_inner(const DiracMultipliers& mult, const SpinorField& phi,
             const SpinorField& psi);
double h_norm_sq(const DiracMultipliers& mult, const SpinorField& psi);

// Foldy-Wouthuysen rotation: forward applies U, inverse applies U^dagger.
SpinorField apply_fw(const DiracMultipliers& mult, const SpinorField& psi,
                     Direction dir);

}  // namespace dmx
