#include "dmx/energy.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "dmx/kernels.hpp"

namespace dmx {

namespace {

constexpr double kBoundaryGuard = 1e-8;  // lower bound on a(eta)

void require_boundary(const SplitState& st) {
  if (st.a < kBoundaryGuard)
    throw std::domain_error("state too close to the unit-ball boundary");
}

// Pointwise Re<f(x), beta g(x)> of two position-space spinors (real scalar).
ScalarField beta_cross(const SpinorField& f, const SpinorField& g) {
  ScalarField out = make_scalar(f.grid, Space::position);
  const std::size_t ns = f.grid->sites();
  for (std::size_t i = 0; i < ns; ++i) {
    const cplx* a = f.v.data() + 4 * i;
    const cplx* b = g.v.data() + 4 * i;
    out.v[i] = (std::conj(a[0]) * b[0]).real() +
               (std::conj(a[1]) * b[1]).real() -
               (std::conj(a[2]) * b[2]).real() -
               (std::conj(a[3]) * b[3]).real();
  }
  return out;
}

// Box integral of Re(f)*Re(g) (cell-volume weighted).
double integrate_re(const ScalarField& f, const ScalarField& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i)
    acc += f.v[i].real() * g.v[i].real();
  return acc * f.grid->cell_volume();
}

// Shared per-state intermediates. The full tier adds the potential and the
// w-direction coupling Gw = D(rho_psi, Re<w, beta psi>) needed by all
// derivative formulas.
struct Ctx {
  const DiracMultipliers& mult;
  const CoulombKernel& kernel;
  const SplitState& st;
  double s;
  SpinorField psi_pos;
  ScalarField rho;
  ScalarField phi;  // full tier only
  SpinorField w_pos;
  double quartic = 0.0;
  double w_h_sq = 0.0;
  double eta_h_sq = 0.0;
  double gw = 0.0;
};

Ctx make_ctx(const DiracMultipliers& mult, const CoulombKernel& kernel,
             const SplitState& st, double s, bool full) {
  Ctx c{mult, kernel, st, s, transformed(st.psi, Direction::inverse),
        {},   {},     {}, 0.0, 0.0, 0.0, 0.0};
  c.rho = beta_density(c.psi_pos);
  ScalarField rho_hat = transformed(c.rho, Direction::forward);
  c.quartic = coulomb_pairing_hat(kernel, rho_hat, rho_hat);
  c.w_h_sq = h_norm_sq(mult, st.w);
  c.eta_h_sq = h_norm_sq(mult, st.eta);
  if (full) {
    kernels::ops().scale_flat_real(kernel.multiplier.data(), rho_hat.v.data(),
                                   rho_hat.v.data(), rho_hat.v.size());
    transform(rho_hat, Direction::inverse);
    c.phi = std::move(rho_hat);
    c.w_pos = transformed(st.w, Direction::inverse);
    c.gw = integrate_re(c.phi, beta_cross(c.w_pos, c.psi_pos));
  }
  return c;
}

EnergyBreakdown breakdown_of(const Ctx& c) {
  EnergyBreakdown b;
  b.kinetic_plus = c.st.a * c.st.a * c.w_h_sq;
  b.kinetic_minus = c.eta_h_sq;
  b.quartic = c.quartic;
  b.J_value =
      0.5 * b.kinetic_plus - 0.5 * b.kinetic_minus - 0.25 * c.s * c.quartic;
  b.I_value = b.J_value;
  b.s = c.s;
  b.mass = c.mult.mass;
  return b;
}

double omega_of(const Ctx& c) { return c.w_h_sq - c.s * c.gw / c.st.a; }

// Momentum transform of the position-space nonlinear term beta(phi psi).
SpinorField nl_spinor(const Ctx& c) {
  SpinorField nl = make_spinor(c.psi_pos.grid, Space::position);
  const std::size_t ns = c.psi_pos.grid->sites();
  for (std::size_t i = 0; i < ns; ++i) {
    const double f = c.phi.v[i].real();
    const cplx* p = c.psi_pos.v.data() + 4 * i;
    cplx* o = nl.v.data() + 4 * i;
    o[0] = f * p[0];
    o[1] = f * p[1];
    o[2] = -f * p[2];
    o[3] = -f * p[3];
  }
  transform(nl, Direction::forward);
  return nl;
}

// H-Riesz gradient of J from the shared context; consumes nl (momentum).
SpinorField inner_grad(const Ctx& c, double c1, SpinorField nl) {
  const auto& k = kernels::ops();
  k.scal(cplx(c.s, 0.0), nl.v.data(), nl.v.size());
  k.axpy(cplx(c1, 0.0), c.st.eta.v.data(), nl.v.data(), nl.v.size());
  k.scale_per_mode4(c.mult.inv_lambda.data(), nl.v.data(), nl.v.data(),
                    c.mult.grid->sites());
  SpinorField g = project(c.mult, nl, EnergySign::minus);
  k.scal(cplx(-1.0, 0.0), g.v.data(), g.v.size());
  k.axpy(cplx(-1.0, 0.0), c.st.eta.v.data(), g.v.data(), g.v.size());
  return g;
}

// Six-term Hessian quadratic form; optionally reports the R and Q
// coefficients of the concavity bound for this probe.
double quadform_impl(const Ctx& c, const SpinorField& xi, double* r_out,
                     double* q_out) {
  const double a = c.st.a;
  const double eta_l2 = 1.0 - a * a;
  const double exi = l2_inner(c.st.eta, xi).real();
  const double xi_l2 = l2_norm_sq(xi);
  const double xi_h = h_norm_sq(c.mult, xi);
  const double da = -exi / a;
  const double d2a = -(xi_l2 + exi * exi / (1.0 - eta_l2)) / a;

  SpinorField h = xi;
  kernels::ops().axpy(cplx(da, 0.0), c.st.w.v.data(), h.v.data(), h.v.size());
  transform(h, Direction::inverse);
  const ScalarField rho_h = beta_density(h);
  const ScalarField u = beta_cross(c.psi_pos, h);
  const double cross_quartic = integrate_re(c.phi, rho_h);
  const double d_uu = coulomb_pairing(c.kernel, u, u);

  if (r_out) {
    const double r = exi / (1.0 - eta_l2);
    *r_out = r;
    *q_out = xi_l2 + 2.0 * r * exi -
             eta_l2 * (xi_l2 / (1.0 - eta_l2) + r * r);
  }
  return da * da * c.w_h_sq - xi_h - c.s * cross_quartic - 2.0 * c.s * d_uu +
         d2a * (a * c.w_h_sq - c.s * c.gw);
}

// Localized random X- probe with unit H norm, deterministic in rng state.
SpinorField random_probe(const DiracMultipliers& mult, std::mt19937_64& rng) {
  const GridPtr& grid = mult.grid;
  SpinorField xi = make_spinor(grid, Space::momentum);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma = 2.0 / mult.mass;
  const auto& freq = grid->axis_freq();
  const int n = grid->n();
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      for (int iz = 0; iz < n; ++iz) {
        const double p_sq = freq[ix] * freq[ix] + freq[iy] * freq[iy] +
                            freq[iz] * freq[iz];
        const double env = std::exp(-0.5 * sigma * sigma * p_sq);
        cplx* o = xi.v.data() + 4 * grid->site_index(ix, iy, iz);
        for (int comp = 0; comp < 4; ++comp)
          o[comp] = env * cplx(gauss(rng), gauss(rng));
      }
    }
  }
  xi = project(mult, xi, EnergySign::minus);
  const double hn = std::sqrt(h_norm_sq(mult, xi));
  kernels::ops().scal(cplx(1.0 / hn, 0.0), xi.v.data(), xi.v.size());
  return xi;
}

void check_xi(const DiracMultipliers& mult, const SpinorField& xi) {
  if (xi.grid.get() != mult.grid.get() || xi.space != Space::momentum)
    throw std::invalid_argument("probe must be momentum space on the grid");
  const double defect = std::sqrt(l2_norm_sq(project(mult, xi, EnergySign::plus)));
  if (defect > 1e-10 * std::max(1.0, std::sqrt(l2_norm_sq(xi))))
    throw std::invalid_argument("probe must lie in the negative subspace");
}

}  // namespace

SplitState make_split_state(const DiracMultipliers& mult, SpinorField w,
                            SpinorField eta) {
  if (w.grid.get() != mult.grid.get() || eta.grid.get() != mult.grid.get())
    throw std::invalid_argument("state fields must live on the grid of the "
                                "multipliers");
  if (w.space != Space::momentum || eta.space != Space::momentum)
    throw std::invalid_argument("state fields must be momentum space");
  if (std::abs(std::sqrt(l2_norm_sq(w)) - 1.0) > 1e-10)
    throw std::invalid_argument("w must have unit L2 norm");
  const double eta_sq = l2_norm_sq(eta);
  if (!(eta_sq < 1.0))
    throw std::invalid_argument("eta must lie inside the unit L2 ball");
  if (std::sqrt(l2_norm_sq(project(mult, w, EnergySign::minus))) > 1e-10)
    throw std::invalid_argument("w must lie in the positive subspace");
  if (std::sqrt(l2_norm_sq(project(mult, eta, EnergySign::plus))) > 1e-10)
    throw std::invalid_argument("eta must lie in the negative subspace");

  SplitState st;
  st.a = std::sqrt(1.0 - eta_sq);
  st.psi = w;
  kernels::ops().scal(cplx(st.a, 0.0), st.psi.v.data(), st.psi.v.size());
  kernels::ops().axpy(cplx(1.0, 0.0), eta.v.data(), st.psi.v.data(),
                      st.psi.v.size());
  st.w = std::move(w);
  st.eta = std::move(eta);
  return st;
}

EnergyBreakdown eval_I(const DiracMultipliers& mult,
                       const CoulombKernel& kernel, const SpinorField& psi,
                       double s) {
  if (s < 0.0) throw std::invalid_argument("coupling must be nonnegative");
  if (psi.space != Space::momentum)
    throw std::invalid_argument("eval_I expects a momentum-space field");
  EnergyBreakdown b;
  b.kinetic_plus = h_norm_sq(mult, project(mult, psi, EnergySign::plus));
  b.kinetic_minus = h_norm_sq(mult, project(mult, psi, EnergySign::minus));
  b.quartic = quartic_energy(kernel, transformed(psi, Direction::inverse));
  b.I_value =
      0.5 * b.kinetic_plus - 0.5 * b.kinetic_minus - 0.25 * s * b.quartic;
  b.J_value = b.I_value;
  b.s = s;
  b.mass = mult.mass;
  return b;
}

EnergyBreakdown eval_J(const DiracMultipliers& mult,
                       const CoulombKernel& kernel, const SplitState& state,
                       double s) {
  return breakdown_of(make_ctx(mult, kernel, state, s, false));
}

JGrad eval_J_grad(const DiracMultipliers& mult, const CoulombKernel& kernel,
                  const SplitState& state, double s) {
  require_boundary(state);
  const Ctx c = make_ctx(mult, kernel, state, s, true);
  JGrad r;
  r.energy = breakdown_of(c);
  const double c1 = omega_of(c);
  r.energy.omega = c1;
  r.grad = inner_grad(c, c1, nl_spinor(c));
  r.grad_h_norm = std::sqrt(h_norm_sq(mult, r.grad));
  return r;
}

SpinorField grad_J(const DiracMultipliers& mult, const CoulombKernel& kernel,
                   const SplitState& state, double s) {
  return eval_J_grad(mult, kernel, state, s).grad;
}

double radial_derivative(const DiracMultipliers& mult,
                         const CoulombKernel& kernel, const SplitState& state,
                         double s) {
  require_boundary(state);
  const Ctx c = make_ctx(mult, kernel, state, s, true);
  // eta in position space, recovered linearly from the cached transforms
  SpinorField eta_pos = c.psi_pos;
  kernels::ops().axpy(cplx(-state.a, 0.0), c.w_pos.v.data(), eta_pos.v.data(),
                      eta_pos.v.size());
  const double cross = integrate_re(c.phi, beta_cross(c.psi_pos, eta_pos));
  const double eta_l2 = 1.0 - state.a * state.a;
  return -omega_of(c) * eta_l2 - c.eta_h_sq - s * cross;
}

double hessian_quadform_J(const DiracMultipliers& mult,
                          const CoulombKernel& kernel, const SplitState& state,
                          double s, const SpinorField& xi) {
  require_boundary(state);
  check_xi(mult, xi);
  const Ctx c = make_ctx(mult, kernel, state, s, true);
  return quadform_impl(c, xi, nullptr, nullptr);
}

InnerCriticalAudit audit_inner_critical(const DiracMultipliers& mult,
                                        const CoulombKernel& kernel,
                                        const SplitState& state, double s,
                                        int probes, std::uint64_t seed) {
  require_boundary(state);
  const Ctx c = make_ctx(mult, kernel, state, s, true);
  InnerCriticalAudit audit;
  audit.probes = probes;

  SpinorField eta_pos = c.psi_pos;
  kernels::ops().axpy(cplx(-state.a, 0.0), c.w_pos.v.data(), eta_pos.v.data(),
                      eta_pos.v.size());
  audit.gamma_eta = integrate_re(c.phi, beta_cross(c.w_pos, eta_pos));

  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < probes; ++t) {
    std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu),
                      static_cast<unsigned>(seed >> 32),
                      static_cast<unsigned>(t)};
    std::mt19937_64 rng(seq);
    const SpinorField xi = random_probe(mult, rng);
    double r = 0.0, q = 0.0;
    const double value = quadform_impl(c, xi, &r, &q);  // xi has unit H norm
    if (value > worst) {
      worst = value;
      audit.r_coeff = r;
      audit.q_coeff = q;
    }
  }
  audit.hessian_rayleigh_max = worst;
  return audit;
}

double multiplier_omega(const DiracMultipliers& mult,
                        const CoulombKernel& kernel, const SplitState& state,
                        double s) {
  require_boundary(state);
  return omega_of(make_ctx(mult, kernel, state, s, true));
}

SpinorField grad_E(const DiracMultipliers& mult, const CoulombKernel& kernel,
                   const SplitState& state, double s, double inner_tol) {
  require_boundary(state);
  const Ctx c = make_ctx(mult, kernel, state, s, true);
  const double omega = omega_of(c);
  SpinorField nl = nl_spinor(c);

  const SpinorField g_inner = inner_grad(c, omega, nl);
  const double gn = std::sqrt(h_norm_sq(mult, g_inner));
  if (gn > inner_tol)
    throw std::runtime_error(
        "inner problem not converged: envelope derivative unavailable");

  // Riesz assembly of dE(w)[v] = a^2<w,v>_H - s a <nl,v>_L2 - a^2 omega <w,v>_L2
  const double a = state.a;
  const auto& k = kernels::ops();
  k.scal(cplx(s * a, 0.0), nl.v.data(), nl.v.size());
  k.axpy(cplx(a * a * omega, 0.0), state.w.v.data(), nl.v.data(),
         nl.v.size());
  k.scale_per_mode4(mult.inv_lambda.data(), nl.v.data(), nl.v.data(),
                    mult.grid->sites());
  SpinorField g = project(mult, nl, EnergySign::plus);
  k.scal(cplx(-1.0, 0.0), g.v.data(), g.v.size());
  k.axpy(cplx(a * a, 0.0), state.w.v.data(), g.v.data(), g.v.size());

  // L2-tangent to the sphere within X+
  const double radial = l2_inner(state.w, g).real();
  k.axpy(cplx(-radial, 0.0), state.w.v.data(), g.v.data(), g.v.size());
  return g;
}

}  // namespace dmx
