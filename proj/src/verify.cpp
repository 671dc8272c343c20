#include "dmx/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "dmx/kernels.hpp"

namespace dmx {

namespace {

IneqResult collect(std::string name, std::vector<double> margins,
                   double slack) {
  IneqResult r;
  r.name = std::move(name);
  r.trials = static_cast<int>(margins.size());
  r.tolerance_slack = slack;
  r.worst_margin = margins.empty()
                       ? 0.0
                       : *std::min_element(margins.begin(), margins.end());
  for (double m : margins)
    if (m < -slack) ++r.failures;
  r.margins = std::move(margins);
  return r;
}

double min_image(double d, double box) {
  d = std::fmod(d, box);
  if (d < -0.5 * box) d += box;
  if (d > 0.5 * box) d -= box;
  return d;
}

double l1_norm(const ScalarField& f) {
  double acc = 0.0;
  for (const auto& z : f.v) acc += std::abs(z);
  return acc * f.grid->cell_volume();
}

}  // namespace

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu),
                    static_cast<unsigned>(seed >> 32),
                    static_cast<unsigned>(trial & 0xffffffffu),
                    static_cast<unsigned>(trial >> 32)};
  return std::mt19937_64(seq);
}

ScalarField random_density(const GridPtr& grid, std::mt19937_64& rng,
                           bool nonnegative) {
  if (!grid) throw std::invalid_argument("random_density needs a grid");
  const double box = grid->box_length();
  const double dx = grid->spacing();
  std::uniform_int_distribution<int> count_dist(1, 3);
  std::uniform_real_distribution<double> center_dist(0.25 * box, 0.75 * box);
  std::uniform_real_distribution<double> width_dist(box / 16.0, box / 8.0);
  std::uniform_real_distribution<double> amp_dist(0.2, 1.0);
  std::uniform_int_distribution<int> sign_dist(0, 1);

  struct Bump {
    double cx, cy, cz, inv2s2, amp;
  };
  std::vector<Bump> bumps(static_cast<std::size_t>(count_dist(rng)));
  for (auto& b : bumps) {
    b.cx = center_dist(rng);
    b.cy = center_dist(rng);
    b.cz = center_dist(rng);
    const double sigma = width_dist(rng);
    b.inv2s2 = 1.0 / (2.0 * sigma * sigma);
    b.amp = amp_dist(rng);
    if (!nonnegative && sign_dist(rng)) b.amp = -b.amp;
  }

  ScalarField f = make_scalar(grid, Space::position);
  const int n = grid->n();
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        double val = 0.0;
        for (const auto& b : bumps) {
          const double rx = min_image(ix * dx - b.cx, box);
          const double ry = min_image(iy * dx - b.cy, box);
          const double rz = min_image(iz * dx - b.cz, box);
          val += b.amp *
                 std::exp(-(rx * rx + ry * ry + rz * rz) * b.inv2s2);
        }
        f.v[grid->site_index(ix, iy, iz)] = val;
      }
  return f;
}

SpinorField random_spinor(const GridPtr& grid, double mass,
                          std::mt19937_64& rng) {
  if (!grid) throw std::invalid_argument("random_spinor needs a grid");
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  const double box = grid->box_length();
  const double dx = grid->spacing();
  const int n = grid->n();
  std::uniform_real_distribution<double> center_dist(0.25 * box, 0.75 * box);
  std::uniform_real_distribution<double> width_dist(box / 16.0, box / 8.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Lattice-snapped carrier momentum with |p0| <= 4m per axis budget.
  const double dp = 2.0 * std::numbers::pi / box;
  const int kmax = std::min(n / 2 - 1, static_cast<int>(4.0 * mass / dp));
  std::uniform_int_distribution<int> mode_dist(-kmax, kmax);

  const double cx = center_dist(rng), cy = center_dist(rng),
               cz = center_dist(rng);
  const double sigma = width_dist(rng);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double px = dp * mode_dist(rng), py = dp * mode_dist(rng),
               pz = dp * mode_dist(rng);

  cplx pol[4];
  double pol_sq = 0.0;
  for (auto& c : pol) {
    c = cplx(gauss(rng), gauss(rng));
    pol_sq += std::norm(c);
  }
  const double pol_scale = 1.0 / std::sqrt(pol_sq);

  SpinorField psi = make_spinor(grid, Space::position);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const double x = ix * dx, y = iy * dx, z = iz * dx;
        const double rx = min_image(x - cx, box), ry = min_image(y - cy, box),
                     rz = min_image(z - cz, box);
        const double env =
            std::exp(-(rx * rx + ry * ry + rz * rz) * inv2s2);
        const cplx carrier = std::polar(env, px * x + py * y + pz * z);
        const std::size_t base = 4 * grid->site_index(ix, iy, iz);
        for (int c = 0; c < 4; ++c)
          psi.v[base + c] = pol_scale * pol[c] * carrier;
      }
  transform(psi, Direction::forward);
  const double norm = std::sqrt(l2_norm_sq(psi));
  kernels::ops().scal(1.0 / norm, psi.v.data(), psi.v.size());
  return psi;
}

double positivity_margin(const CoulombKernel& kernel, const ScalarField& f) {
  const double l1 = l1_norm(f);
  if (l1 <= 0.0) return 0.0;
  return coulomb_pairing(kernel, f, f) / (l1 * l1);
}

double kato_margin(const DiracMultipliers& mult, const CoulombKernel& kernel,
                   const ScalarField& rho, const SpinorField& psi) {
  const double rho_l1 = l1_norm(rho);
  const double psi_h = h_norm_sq(mult, psi);
  const double scale = rho_l1 * psi_h;
  if (scale <= 0.0) return 0.0;
  const SpinorField psi_pos = transformed(psi, Direction::inverse);
  const double lhs = coulomb_pairing(kernel, rho, abs_density(psi_pos));
  return kKappa - lhs / scale;
}

double appendix_margin(const DiracMultipliers& mult,
                       const CoulombKernel& kernel, const SpinorField& w,
                       const SpinorField& eta) {
  const SplitState st = make_split_state(mult, w, eta);
  const double q_psi =
      quartic_energy(kernel, transformed(st.psi, Direction::inverse));
  const double q_w = quartic_energy(kernel, transformed(w, Direction::inverse));
  const double w_h = h_norm_sq(mult, w);
  const double w_l2 = l2_norm_sq(w);
  const double eta_l2 = l2_norm_sq(eta);
  const double eta_h = h_norm_sq(mult, eta);
  const double a_sq = st.a * st.a;
  const double rhs = q_w - 2.0 * kKappa * eta_l2 * w_h -
                     14.0 * a_sq * kKappa * (w_h - mult.mass * w_l2) -
                     18.0 * kKappa * eta_h;
  return q_psi - rhs;
}

IneqResult check_coulomb_positivity(const CoulombKernel& kernel, int trials,
                                    std::uint64_t seed) {
  std::vector<double> margins;
  margins.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(t));
    const ScalarField f = random_density(kernel.grid, rng, false);
    margins.push_back(positivity_margin(kernel, f));
  }
  return collect("coulomb_positivity", std::move(margins), 1e-10);
}

IneqResult check_kato(const DiracMultipliers& mult,
                      const CoulombKernel& kernel, int trials,
                      std::uint64_t seed) {
  std::vector<double> margins;
  margins.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(t));
    const ScalarField rho = random_density(mult.grid, rng, true);
    const SpinorField psi = random_spinor(mult.grid, mult.mass, rng);
    margins.push_back(kato_margin(mult, kernel, rho, psi));
  }
  return collect("kato_bound", std::move(margins), 1e-8);
}

IneqResult check_appendix_lemma(const DiracMultipliers& mult,
                                const CoulombKernel& kernel, int trials,
                                std::uint64_t seed) {
  std::vector<double> margins;
  margins.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(t));

    SpinorField w =
        project(mult, random_spinor(mult.grid, mult.mass, rng),
                EnergySign::plus);
    const double wn = std::sqrt(l2_norm_sq(w));
    if (wn < 1e-12) {
      margins.push_back(0.0);
      continue;
    }
    kernels::ops().scal(1.0 / wn, w.v.data(), w.v.size());

    SpinorField eta =
        project(mult, random_spinor(mult.grid, mult.mass, rng),
                EnergySign::minus);
    const double en = std::sqrt(l2_norm_sq(eta));
    std::uniform_real_distribution<double> radius_dist(0.0, 0.7);
    const double r = radius_dist(rng);
    if (en > 1e-12)
      kernels::ops().scal(r / en, eta.v.data(), eta.v.size());
    else
      kernels::ops().scal(0.0, eta.v.data(), eta.v.size());

    margins.push_back(appendix_margin(mult, kernel, w, eta));
  }
  return collect("appendix_quartic_bound", std::move(margins), 1e-8);
}

IneqResult check_solution_bounds(const SolveReport& report) {
  if (!report.w.grid || !report.eta.grid || !report.psi.grid)
    throw std::invalid_argument("report carries no solution fields");
  if (!(report.s > 0.0) || !(report.s < kCouplingSup))
    throw std::invalid_argument("report coupling outside (0, 1/(8 pi))");
  if (!(report.mass > 0.0))
    throw std::invalid_argument("report mass must be positive");

  const DiracMultipliers mult = build_multipliers(report.w.grid, report.mass);
  const CoulombKernel kernel = build_coulomb(report.w.grid);
  const SplitState st = make_split_state(mult, report.w, report.eta);

  const double e_fresh = eval_J(mult, kernel, st, report.s).J_value;
  const double omega_fresh = multiplier_omega(mult, kernel, st, report.s);
  const double w_h = h_norm_sq(mult, st.w);

  SpinorField psi_diff = st.psi;
  kernels::ops().axpy(cplx(-1.0, 0.0), report.psi.v.data(),
                      psi_diff.v.data(), psi_diff.v.size());
  const double psi_dev = std::sqrt(l2_norm_sq(psi_diff));

  const double m = report.mass;
  const double s = report.s;
  const double e = report.E_value;
  const double omega = report.omega;

  std::vector<double> margins;
  margins.push_back(1e-8 - std::abs(e - e_fresh));        // energy_consistent
  margins.push_back(1e-8 - std::abs(omega - omega_fresh));  // omega_consistent
  margins.push_back(1e-8 - psi_dev);                        // psi_consistent
  margins.push_back(omega);                                 // omega > 0
  margins.push_back(m - omega);                             // omega < m
  margins.push_back(omega - (1.0 - 3.0 * s * kKappa) * w_h);
  margins.push_back(2.0 * e - omega);
  margins.push_back(e - 0.25 * (2.0 - s * kKappa) * m);
  margins.push_back(0.5 * w_h - e);
  margins.push_back(0.5 * m - e);
  return collect("solution_bounds", std::move(margins), 1e-9);
}

}  // namespace dmx
