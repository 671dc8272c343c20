#include "dmx/coulomb.hpp"

#include <cmath>
#include <stdexcept>

#include "dmx/kernels.hpp"

namespace dmx {

namespace {

void check_real_position(const ScalarField& f, const char* what) {
  if (f.space != Space::position)
    throw std::invalid_argument(std::string(what) +
                                " requires a position-space field");
  double amp = 0.0, imag = 0.0;
  for (const cplx& z : f.v) {
    amp = std::max(amp, std::abs(z));
    imag = std::max(imag, std::abs(z.imag()));
  }
  if (imag > 1e-12 * amp)
    throw std::invalid_argument(std::string(what) +
                                " requires a real-valued field");
}

void check_same_grid(const CoulombKernel& kernel, const GridPtr& grid) {
  if (grid.get() != kernel.grid.get())
    throw std::invalid_argument("field grid does not match Coulomb kernel");
}

}  // namespace

CoulombKernel build_coulomb(const GridPtr& grid) {
  CoulombKernel kernel;
  kernel.grid = grid;
  kernel.cutoff_radius = 0.5 * grid->box_length();
  kernel.multiplier.resize(grid->sites());
  const double rc = kernel.cutoff_radius;
  const auto& freq = grid->axis_freq();
  const int n = grid->n();
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      for (int iz = 0; iz < n; ++iz) {
        const double p_sq = freq[ix] * freq[ix] + freq[iy] * freq[iy] +
                            freq[iz] * freq[iz];
        kernel.multiplier[grid->site_index(ix, iy, iz)] =
            p_sq > 0.0
                ? 4.0 * M_PI * (1.0 - std::cos(std::sqrt(p_sq) * rc)) / p_sq
                : 2.0 * M_PI * rc * rc;
      }
    }
  }
  return kernel;
}

ScalarField potential(const CoulombKernel& kernel, const ScalarField& rho) {
  check_same_grid(kernel, rho.grid);
  check_real_position(rho, "potential");
  ScalarField f = transformed(rho, Direction::forward);
  kernels::ops().scale_flat_real(kernel.multiplier.data(), f.v.data(),
                                 f.v.data(), f.v.size());
  transform(f, Direction::inverse);
  return f;
}

ScalarField beta_density(const SpinorField& psi) {
  if (psi.space != Space::position)
    throw std::invalid_argument("beta_density requires position space");
  ScalarField rho = make_scalar(psi.grid, Space::position);
  kernels::ops().beta_density(psi.v.data(), rho.v.data(), psi.grid->sites());
  return rho;
}

ScalarField abs_density(const SpinorField& psi) {
  if (psi.space != Space::position)
    throw std::invalid_argument("abs_density requires position space");
  ScalarField rho = make_scalar(psi.grid, Space::position);
  kernels::ops().abs_density(psi.v.data(), rho.v.data(), psi.grid->sites());
  return rho;
}

double coulomb_pairing(const CoulombKernel& kernel, const ScalarField& f,
                       const ScalarField& g) {
  check_same_grid(kernel, f.grid);
  check_same_grid(kernel, g.grid);
  check_real_position(f, "coulomb_pairing");
  check_real_position(g, "coulomb_pairing");
  return coulomb_pairing_hat(kernel, transformed(f, Direction::forward),
                             transformed(g, Direction::forward));
}

double coulomb_pairing_hat(const CoulombKernel& kernel,
                           const ScalarField& f_hat,
                           const ScalarField& g_hat) {
  check_same_grid(kernel, f_hat.grid);
  check_same_grid(kernel, g_hat.grid);
  if (f_hat.space != Space::momentum || g_hat.space != Space::momentum)
    throw std::invalid_argument("pairing overload requires momentum space");
  ScalarField mg = make_scalar(kernel.grid, Space::momentum);
  kernels::ops().scale_flat_real(kernel.multiplier.data(), g_hat.v.data(),
                                 mg.v.data(), mg.v.size());
  return kernels::ops().dot(f_hat.v.data(), mg.v.data(), mg.v.size()).real();
}

double quartic_energy(const CoulombKernel& kernel, const SpinorField& psi) {
  check_same_grid(kernel, psi.grid);
  const ScalarField rho_hat =
      transformed(beta_density(psi), Direction::forward);
  return coulomb_pairing_hat(kernel, rho_hat, rho_hat);
}

}  // namespace dmx
