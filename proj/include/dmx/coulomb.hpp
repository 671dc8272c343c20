// Coulomb convolution on the periodic box via a spherically truncated kernel:
// momentum multiplier 4*pi*(1 - cos(|p| R_c))/|p|^2 with R_c = L/2 (analytic
// limit 2*pi*R_c^2 at p = 0). For densities supported in a ball of radius
// R_c/2 the truncated convolution agrees with the free-space potential at
// evaluation points inside that ball, which is what makes the whole-space
// inequalities checkable on the torus.

#pragma once

#include "dmx/grid.hpp"

namespace dmx {

struct CoulombKernel {
  GridPtr grid;
  double cutoff_radius = 0.0;
  std::vector<double> multiplier;  // nonnegative, per momentum mode
};

CoulombKernel build_coulomb(const GridPtr& grid);

// Truncated convolution rho * 1/|x|. Input must be position space and real up
// to 1e-12 of its amplitude.
ScalarField potential(const CoulombKernel& kernel, const ScalarField& rho);

// Pointwise beta-density <psi, beta psi> = |psi1|^2+|psi2|^2-|psi3|^2-|psi4|^2
// and the plain density |psi|^2; both are real-valued position fields.
ScalarField beta_density(const SpinorField& psi);
ScalarField abs_density(const SpinorField& psi);

// D(f, g) = integral of f(x) g(y) / |x - y|; symmetric, and nonnegative on
// the diagonal because the multiplier is nonnegative. Real position-space
// inputs. The momentum-space overload takes already-transformed densities.
double coulomb_pairing(const CoulombKernel& kernel, const ScalarField& f,
                       const ScalarField& g);
double coulomb_pairing_hat(const CoulombKernel& kernel, const ScalarField& f_hat,
                           const ScalarField& g_hat);

// Q(psi) = D(rho_beta, rho_beta) for a position-space spinor.
double quartic_energy(const CoulombKernel& kernel, const SpinorField& psi);

}  // namespace dmx
