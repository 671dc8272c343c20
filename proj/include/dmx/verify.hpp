// Randomized property harness: stress-tests the Coulomb positivity, the
// kinetic-vs-Coulomb (Kato) bound with sharp constant pi/2, the appendix
// quartic lower bound, and the solution-bound families, on localized
// Gaussian trial states independent of the solver path.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dmx/solver.hpp"

namespace dmx {

struct IneqResult {
  std::string name;
  int trials = 0;
  double worst_margin = 0.0;  // min over trials of RHS - LHS (normalized)
  int failures = 0;           // trials with margin < -tolerance_slack
  double tolerance_slack = 0.0;
  std::vector<double> margins;  // per trial, in generation order
};

// Deterministic per-trial stream: one generator per (seed, trial) pair so
// trials are order-independent and individually reproducible.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

// Real Gaussian mixture (1-3 bumps, widths uniform in [L/16, L/8], centers
// in the middle half of the box, minimal-image distances); amplitudes are
// positive or sign-mixed per the flag. Position space.
ScalarField random_density(const GridPtr& grid, std::mt19937_64& rng,
                           bool nonnegative);

// Unit-L2 spinor: Gaussian envelope times a random constant polarization and
// a lattice-snapped momentum carrier with |p0| <= 4m. Momentum space.
SpinorField random_spinor(const GridPtr& grid, double mass,
                          std::mt19937_64& rng);

// Single-trial margins (building blocks for the checks and for margin
// statistics in tests).
double positivity_margin(const CoulombKernel& kernel, const ScalarField& f);
double kato_margin(const DiracMultipliers& mult, const CoulombKernel& kernel,
                   const ScalarField& rho, const SpinorField& psi);
double appendix_margin(const DiracMultipliers& mult,
                       const CoulombKernel& kernel, const SpinorField& w,
                       const SpinorField& eta);

IneqResult check_coulomb_positivity(const CoulombKernel& kernel, int trials,
                                    std::uint64_t seed);
IneqResult check_kato(const DiracMultipliers& mult,
                      const CoulombKernel& kernel, int trials,
                      std::uint64_t seed);
IneqResult check_appendix_lemma(const DiracMultipliers& mult,
                                const CoulombKernel& kernel, int trials,
                                std::uint64_t seed);

// Re-derives the operator stack from the report's own fields and audits the
// four solution-bound families plus claimed-vs-recomputed consistency. Uses
// the report's claimed omega and E in the inequalities so a fabricated
// report fails.
IneqResult check_solution_bounds(const SolveReport& report);

}  // namespace dmx
