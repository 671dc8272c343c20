// Two-level min-max driver: projected gradient ascent maximizing J_w over the
// negative-subspace unit ball (inner), Riemannian gradient descent minimizing
// the reduced functional E over the positive-subspace L2 sphere (outer), plus
// the scaled-Gaussian initializer, stationarity residual, and coupling sweep.

#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "dmx/energy.hpp"

namespace dmx {

// Sharp constant of the Coulomb-vs-kinetic inequality.
inline constexpr double kKappa = std::numbers::pi / 2.0;
// Supremum of the admissible coupling range (0, 1/(8 pi)).
inline constexpr double kCouplingSup = 1.0 / (8.0 * std::numbers::pi);

struct SolverConfig {
  double s = 0.01;          // coupling, must lie in (0, 1/(8 pi))
  double mass = 1.0;
  int grid_n = 32;
  double box_length = 40.0;
  double tol_inner = 1e-8;  // H-norm of the inner gradient
  double tol_outer = 1e-6;  // H-norm of the tangent outer gradient
  int max_inner_iters = 500;
  int max_outer_iters = 500;
  double epsilon_init = 0.0;  // <= 0 resolves to 0.3 * mass
  std::uint64_t rng_seed = 12345;
  int threads = 1;  // sweep-level parallelism hint
};

// Throws std::invalid_argument on any violated invariant.
void validate_config(const SolverConfig& config);
double resolved_epsilon(const SolverConfig& config);

// One audited inequality: pass iff margin >= -slack. Margins are RHS - LHS
// in the inequality's natural units.
struct BoundCheck {
  std::string name;
  double margin = 0.0;
  double slack = 0.0;
  bool pass = false;
};

struct BoundsAudit {
  std::vector<BoundCheck> checks;
  bool all_pass() const;
};

struct InnerResult {
  SplitState state;
  EnergyBreakdown energy;
  double grad_h_norm = 0.0;
  int iters = 0;
  bool converged = false;
  BoundsAudit bounds;        // level/ball/maximizer-estimate margins
  InnerCriticalAudit audit;  // populated when requested (probes > 0)
};

struct SolveReport {
  double E_value = 0.0;
  double omega = 0.0;
  double residual_l2 = 0.0;
  int inner_iters = 0;  // summed across all inner solves
  int outer_iters = 0;
  double eta_l2_sq = 0.0;
  double w_h_norm_sq = 0.0;
  double psi_l2 = 0.0;
  bool converged = false;
  double s = 0.0;
  double mass = 0.0;
  BoundsAudit bounds_audit;
  InnerCriticalAudit hessian_audit;
  SpinorField w, eta, psi;  // momentum space
};

// Unit-L2 upper-spinor Gaussian trial profile in momentum space (the scaled
// trial family; sigma0 = 2/m sets the reference width), before projection.
SpinorField initializer_profile(const GridPtr& grid, double mass,
                                double epsilon);

// Positive-subspace projection of the profile, renormalized; retries with
// epsilon/2 while the projected fraction is <= 1/2, throws after 8 halvings.
SpinorField initial_w_eps(const DiracMultipliers& mult, double epsilon);
SpinorField initial_w(const SolverConfig& config,
                      const DiracMultipliers& mult);

// Project to X+ and L2-normalize (the outer retraction).
SpinorField retract(const DiracMultipliers& mult, const SpinorField& x);

// Multiply by the phase making the largest-magnitude coefficient real
// positive; co rotates alongside when given (gauge fixing for comparisons).
void apply_phase_gauge(SpinorField& w, SpinorField* co = nullptr);

// Ascent on J_w from warm_eta (or 0) with Armijo backtracking, ball
// projection at radius 0.99, and the inward-drive guard. Throws on iteration
// exhaustion or a stalled line search. audit_probes > 0 adds the Hessian
// audit at the maximizer.
InnerResult inner_maximize(const DiracMultipliers& mult,
                           const CoulombKernel& kernel, const SpinorField& w,
                           double s, const SolverConfig& config,
                           const SpinorField* warm_eta = nullptr,
                           int audit_probes = 20);

// Full two-level solve from the scaled-Gaussian initializer. Throws on
// non-convergence; audit outcomes are reported, not thrown.
SolveReport outer_minimize(const DiracMultipliers& mult,
                           const CoulombKernel& kernel,
                           const SolverConfig& config);

// L2 norm of H psi - s (rho_psi * 1/|x|) beta psi - omega psi.
double residual(const DiracMultipliers& mult, const CoulombKernel& kernel,
                const SolveReport& report);

struct SweepResult {
  std::vector<double> s_values;       // ascending
  std::vector<SolveReport> reports;   // aligned with s_values
  std::vector<double> margins;        // e(s_i) - e(s_{i+1}) > 0 expected
  bool monotone = false;
  bool input_was_sorted = true;
};

// Independent solves per coupling (optionally concurrent per config.threads);
// the list is sorted ascending first.
SweepResult sweep_e(const DiracMultipliers& mult, const CoulombKernel& kernel,
                    std::vector<double> s_list, const SolverConfig& config);

}  // namespace dmx
