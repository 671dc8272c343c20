#include "dmx/dirac.hpp"

#include <cmath>
#include <stdexcept>

#include "dmx/kernels.hpp"

namespace dmx {

namespace {

// Writes entry (r, c) of the current mode's column-major 4x4 block.
struct ModeBlock {
  cplx* m;
  cplx& at(int r, int c) { return m[4 * c + r]; }
};

void check_momentum(const DiracMultipliers& mult, const SpinorField& psi) {
  if (psi.grid.get() != mult.grid.get())
    throw std::invalid_argument("field grid does not match multipliers");
  if (psi.space != Space::momentum)
    throw std::invalid_argument("operation requires a momentum-space field");
}

SpinorField apply_mats(const DiracMultipliers& mult, const SpinorField& psi,
                       const std::vector<cplx>& mats, bool adjoint) {
  check_momentum(mult, psi);
  SpinorField out = make_spinor(psi.grid, Space::momentum);
  const auto& k = kernels::ops();
  (adjoint ? k.apply_mode_matrices_adj : k.apply_mode_matrices)(
      mats.data(), psi.v.data(), out.v.data(), psi.grid->sites());
  return out;
}

}  // namespace

DiracMultipliers build_multipliers(const GridPtr& grid, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  DiracMultipliers mult;
  mult.grid = grid;
  mult.mass = mass;
  const std::size_t nm = grid->sites();
  mult.lambda.resize(nm);
  mult.inv_lambda.resize(nm);
  mult.u_plus.resize(nm);
  mult.u_minus.resize(nm);
  mult.proj_plus.assign(16 * nm, cplx(0.0));
  mult.proj_minus.assign(16 * nm, cplx(0.0));
  mult.h_matrix.assign(16 * nm, cplx(0.0));
  mult.fw_matrix.assign(16 * nm, cplx(0.0));

  const auto& freq = grid->axis_freq();
  const int n = grid->n();
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      for (int iz = 0; iz < n; ++iz) {
        const std::size_t k = grid->site_index(ix, iy, iz);
        const double p1 = freq[ix], p2 = freq[iy], p3 = freq[iz];
        const double p_sq = p1 * p1 + p2 * p2 + p3 * p3;
        const double lam = std::sqrt(p_sq + mass * mass);
        const double ml = mass / lam;
        mult.lambda[k] = lam;
        mult.inv_lambda[k] = 1.0 / lam;
        mult.u_plus[k] = std::sqrt(0.5 * (1.0 + ml));
        mult.u_minus[k] = std::sqrt(0.5 * (1.0 - ml));

        // sigma.p in the Hermitian Pauli representation
        const cplx s11(p3, 0.0), s12(p1, -p2), s21(p1, p2), s22(-p3, 0.0);

        ModeBlock h{mult.h_matrix.data() + 16 * k};
        // alpha.p + m*beta: off-diagonal blocks sigma.p, diagonal m*beta
        h.at(0, 0) = mass;
        h.at(1, 1) = mass;
        h.at(2, 2) = -mass;
        h.at(3, 3) = -mass;
        h.at(0, 2) = s11;
        h.at(0, 3) = s12;
        h.at(1, 2) = s21;
        h.at(1, 3) = s22;
        h.at(2, 0) = s11;
        h.at(2, 1) = s12;
        h.at(3, 0) = s21;
        h.at(3, 1) = s22;

        // projectors (I +- (m/lambda) beta +- (1/lambda) alpha.p) / 2
        for (int sign = 0; sign < 2; ++sign) {
          const double sg = sign == 0 ? 1.0 : -1.0;
          ModeBlock proj{(sign == 0 ? mult.proj_plus : mult.proj_minus).data() +
                         16 * k};
          const double diag_upper = 0.5 * (1.0 + sg * ml);
          const double diag_lower = 0.5 * (1.0 - sg * ml);
          proj.at(0, 0) = diag_upper;
          proj.at(1, 1) = diag_upper;
          proj.at(2, 2) = diag_lower;
          proj.at(3, 3) = diag_lower;
          const double f = sg * 0.5 / lam;
          proj.at(0, 2) = f * s11;
          proj.at(0, 3) = f * s12;
          proj.at(1, 2) = f * s21;
          proj.at(1, 3) = f * s22;
          proj.at(2, 0) = f * s11;
          proj.at(2, 1) = f * s12;
          proj.at(3, 0) = f * s21;
          proj.at(3, 1) = f * s22;
        }

        // U = u+ I + u- beta (alpha.p)/|p|, with the p = 0 limit U = I
        ModeBlock fw{mult.fw_matrix.data() + 16 * k};
        const double up = mult.u_plus[k];
        fw.at(0, 0) = up;
        fw.at(1, 1) = up;
        fw.at(2, 2) = up;
        fw.at(3, 3) = up;
        if (p_sq > 0.0) {
          const double f = mult.u_minus[k] / std::sqrt(p_sq);
          fw.at(0, 2) = f * s11;
          fw.at(0, 3) = f * s12;
          fw.at(1, 2) = f * s21;
          fw.at(1, 3) = f * s22;
          fw.at(2, 0) = -f * s11;
          fw.at(2, 1) = -f * s12;
          fw.at(3, 0) = -f * s21;
          fw.at(3, 1) = -f * s22;
        }
      }
    }
  }
  return mult;
}

SpinorField apply_H(const DiracMultipliers& mult, const SpinorField& psi) {
  return apply_mats(mult, psi, mult.h_matrix, false);
}

SpinorField project(const DiracMultipliers& mult, const SpinorField& psi,
                    EnergySign sign) {
  return apply_mats(
      mult, psi, sign == EnergySign::plus ? mult.proj_plus : mult.proj_minus,
      false);
}

cplx h_inner(const DiracMultipliers& mult, const SpinorField& phi,
             const SpinorField& psi) {
  check_momentum(mult, phi);
  check_momentum(mult, psi);
  return kernels::ops().weighted_dot4(mult.lambda.data(), phi.v.data(),
                                      psi.v.data(), mult.grid->sites());
}

double h_norm_sq(const DiracMultipliers& mult, const SpinorField& psi) {
  return h_inner(mult, psi, psi).real();
}

SpinorField apply_fw(const DiracMultipliers& mult, const SpinorField& psi,
                     Direction dir) {
  // U is unitary, so the inverse rotation is the adjoint application.
  return apply_mats(mult, psi, mult.fw_matrix, dir == Direction::inverse);
}

}  // namespace dmx
