// The variational layer: the indefinite functional I, the graph restriction
// J_w(eta) = I(a(eta) w + eta) with a(eta) = sqrt(1 - ||eta||^2), first and
// second derivatives, the Lagrange multiplier omega, and the gradient of the
// reduced functional E(w) = max_eta J_w(eta).
//
// All gradients returned here are Riesz representatives in the
// lambda(p)-weighted H inner product (per-mode preconditioning by 1/lambda),
// which keeps ascent/descent steps well-scaled across momentum shells.
// Variational fields (w, eta, psi, gradients, probe directions) live in
// momentum space; densities and potentials are formed in position space.

#pragma once

#include <cstdint>
#include <limits>

#include "dmx/coulomb.hpp"
#include "dmx/dirac.hpp"

namespace dmx {

// Constrained pair (w, eta): w in the positive subspace with unit L2 norm,
// eta in the negative subspace inside the unit ball; psi = a*w + eta cached.
struct SplitState {
  SpinorField w;
  SpinorField eta;
  double a = 1.0;
  SpinorField psi;
};

// Validates subspace membership (projection defect <= 1e-10), ||w|| = 1 up to
// 1e-10, and ||eta|| < 1; derives a and psi. Throws std::invalid_argument.
SplitState make_split_state(const DiracMultipliers& mult, SpinorField w,
                            SpinorField eta);

struct EnergyBreakdown {
  double kinetic_plus = 0.0;   // ||a w||_H^2 (or ||P+ psi||_H^2 for eval_I)
  double kinetic_minus = 0.0;  // ||eta||_H^2
  double quartic = 0.0;        // Q(psi) >= 0
  double I_value = 0.0;        // 0.5*kp - 0.5*km - (s/4)*Q
  double J_value = 0.0;
  // multiplier; NaN when the evaluation path does not compute it
  double omega = std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  double mass = 0.0;
};

// Diagnostics of the inner maximizer: at a converged maximizer with J >= 0,
// gamma_eta < 0 and every Hessian Rayleigh quotient is negative. r_coeff and
// q_coeff are recorded for the worst (largest-quotient) probe, normalized to
// unit H norm.
struct InnerCriticalAudit {
  double gamma_eta = 0.0;
  double hessian_rayleigh_max = 0.0;
  double r_coeff = 0.0;
  double q_coeff = 0.0;
  int probes = 0;
};

EnergyBreakdown eval_I(const DiracMultipliers& mult,
                       const CoulombKernel& kernel, const SpinorField& psi,
                       double s);

EnergyBreakdown eval_J(const DiracMultipliers& mult,
                       const CoulombKernel& kernel, const SplitState& state,
                       double s);

// J value together with the H-Riesz gradient of eta -> J_w(eta) in X-.
struct JGrad {
  EnergyBreakdown energy;
  SpinorField grad;
  double grad_h_norm = 0.0;
};

JGrad eval_J_grad(const DiracMultipliers& mult, const CoulombKernel& kernel,
                  const SplitState& state, double s);

SpinorField grad_J(const DiracMultipliers& mult, const CoulombKernel& kernel,
                   const SplitState& state, double s);

// dJ_w(eta)[eta], evaluated directly from the derivative formula.
double radial_derivative(const DiracMultipliers& mult,
                         const CoulombKernel& kernel, const SplitState& state,
                         double s);

// d^2 J_w(eta)[xi, xi] for xi in X-, via the six-term expansion
// (da^2 kinetic term, -||xi||_H^2, three quartic second-derivative terms,
// and the d^2a correction).
double hessian_quadform_J(const DiracMultipliers& mult,
                          const CoulombKernel& kernel, const SplitState& state,
                          double s, const SpinorField& xi);

// Evaluates the Hessian quadratic form on `probes` random localized X-
// directions (deterministic in seed) and records the worst Rayleigh quotient
// together with gamma(eta) = D(rho_psi, Re<w, beta eta>).
InnerCriticalAudit audit_inner_critical(const DiracMultipliers& mult,
                                        const CoulombKernel& kernel,
                                        const SplitState& state, double s,
                                        int probes, std::uint64_t seed);

// omega(psi) = a^{-1} dI(psi)[w]; requires a >= 1e-8.
double multiplier_omega(const DiracMultipliers& mult,
                        const CoulombKernel& kernel, const SplitState& state,
                        double s);

// H-Riesz representative of the derivative of the reduced functional E at an
// inner-critical state, projected L2-orthogonally to w within X+. Throws if
// the inner gradient norm exceeds inner_tol (the envelope theorem needs a
// converged inner problem).
SpinorField grad_E(const DiracMultipliers& mult, const CoulombKernel& kernel,
                   const SplitState& state, double s, double inner_tol);

}  // namespace dmx
