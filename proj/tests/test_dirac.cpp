#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dmx/dirac.hpp"

using namespace dmx;

namespace {

using Mat = std::array<cplx, 16>;  // column-major, entry (r,c) at 4*c+r

Mat from_mode(const std::vector<cplx>& store, std::size_t mode) {
  Mat m;
  for (int i = 0; i < 16; ++i) m[i] = store[16 * mode + i];
  return m;
}

Mat mul(const Mat& a, const Mat& b) {
  Mat c{};
  for (int col = 0; col < 4; ++col)
    for (int row = 0; row < 4; ++row) {
      cplx acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += a[4 * k + row] * b[4 * col + k];
      c[4 * col + row] = acc;
    }
  return c;
}

Mat adj(const Mat& a) {
  Mat c;
  for (int col = 0; col < 4; ++col)
    for (int row = 0; row < 4; ++row)
      c[4 * col + row] = std::conj(a[4 * row + col]);
  return c;
}

Mat eye() {
  Mat c{};
  for (int i = 0; i < 4; ++i) c[4 * i + i] = 1.0;
  return c;
}

double dev(const Mat& a, const Mat& b) {
  double d = 0.0;
  for (int i = 0; i < 16; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

Mat scaled(const Mat& a, double s) {
  Mat c;
  for (int i = 0; i < 16; ++i) c[i] = s * a[i];
  return c;
}

Mat minus(const Mat& a, const Mat& b) {
  Mat c;
  for (int i = 0; i < 16; ++i) c[i] = a[i] - b[i];
  return c;
}

// Independent reconstruction of the Dirac symbol: beta = diag(1,1,-1,-1) and
// off-diagonal sigma.p blocks with sigma the Hermitian Pauli triple.
Mat dirac_symbol(double px, double py, double pz, double mass) {
  Mat h{};
  h[4 * 0 + 0] = mass;
  h[4 * 1 + 1] = mass;
  h[4 * 2 + 2] = -mass;
  h[4 * 3 + 3] = -mass;
  const cplx s11(pz, 0.0), s12(px, -py), s21(px, py), s22(-pz, 0.0);
  // upper-right block rows 0..1, cols 2..3
  h[4 * 2 + 0] = s11;
  h[4 * 3 + 0] = s12;
  h[4 * 2 + 1] = s21;
  h[4 * 3 + 1] = s22;
  // lower-left block rows 2..3, cols 0..1
  h[4 * 0 + 2] = s11;
  h[4 * 1 + 2] = s12;
  h[4 * 0 + 3] = s21;
  h[4 * 1 + 3] = s22;
  return h;
}

SpinorField random_momentum_spinor(const GridPtr& grid, unsigned tag) {
  std::seed_seq seq{0xabcu, tag};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> g(0.0, 1.0);
  SpinorField f = make_spinor(grid, Space::momentum);
  for (auto& z : f.v) z = cplx(g(rng), g(rng));
  return f;
}

}  // namespace

TEST_CASE("multiplier construction") {
  auto grid = build_grid(16, 2.0 * std::numbers::pi);  // unit mode spacing
  CHECK_THROWS_AS(build_multipliers(grid, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_multipliers(grid, -1.0), std::invalid_argument);

  auto mult = build_multipliers(grid, 1.0);
  // |p| = 3 at mode (3,0,0): lambda = sqrt(9 + 1)
  const std::size_t k = grid->site_index(3, 0, 0);
  CHECK(mult.lambda[k] == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
  CHECK(mult.inv_lambda[k] == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-14));
  // u+^2 + u-^2 = 1 and u+^2 - u-^2 = m / lambda
  CHECK(mult.u_plus[k] * mult.u_plus[k] + mult.u_minus[k] * mult.u_minus[k] ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mult.u_plus[k] * mult.u_plus[k] - mult.u_minus[k] * mult.u_minus[k] ==
        doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-14));
}

TEST_CASE("projector and rotation algebra holds entrywise on every mode") {
  const int n = 16;
  auto grid = build_grid(n, 40.0);
  auto mult = build_multipliers(grid, 1.0);
  const auto& freq = grid->axis_freq();

  double worst = 0.0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const std::size_t k = grid->site_index(ix, iy, iz);
        const Mat pp = from_mode(mult.proj_plus, k);
        const Mat pm = from_mode(mult.proj_minus, k);
        const Mat h = from_mode(mult.h_matrix, k);
        const Mat u = from_mode(mult.fw_matrix, k);
        const double lam = mult.lambda[k];

        worst = std::max(worst, dev(mul(pp, pp), pp));        // idempotent
        worst = std::max(worst, dev(mul(pm, pm), pm));
        worst = std::max(worst, dev(mul(pp, pm), Mat{}));     // orthogonal
        worst = std::max(worst, dev(minus(eye(), pp), pm));   // resolution
        worst = std::max(worst, dev(pp, adj(pp)));            // Hermitian
        worst = std::max(worst, dev(pm, adj(pm)));
        worst = std::max(worst, dev(h, adj(h)));
        // H = lambda (P+ - P-)
        worst = std::max(worst, dev(h, scaled(minus(pp, pm), lam)));
        // U unitary, U H U^dagger = lambda beta
        worst = std::max(worst, dev(mul(u, adj(u)), eye()));
        Mat lb{};
        lb[0] = lam; lb[5] = lam; lb[10] = -lam; lb[15] = -lam;
        worst = std::max(worst, dev(mul(mul(u, h), adj(u)), lb));
        // stored symbol equals the independent reconstruction
        worst = std::max(
            worst, dev(h, dirac_symbol(freq[ix], freq[iy], freq[iz], 1.0)));
        // spectral multiplicity: trace of P+ is 2
        const cplx tr = pp[0] + pp[5] + pp[10] + pp[15];
        worst = std::max(worst, std::abs(tr - cplx(2.0, 0.0)));
      }
  CHECK(worst <= 1e-12);
}

TEST_CASE("zero mode has the rest-frame form") {
  auto grid = build_grid(8, 40.0);
  auto mult = build_multipliers(grid, 1.3);
  const std::size_t k0 = grid->site_index(0, 0, 0);
  const Mat pp = from_mode(mult.proj_plus, k0);
  const Mat u = from_mode(mult.fw_matrix, k0);
  Mat pp_ref{};
  pp_ref[0] = 1.0;
  pp_ref[5] = 1.0;
  CHECK(dev(pp, pp_ref) <= 1e-15);
  CHECK(dev(u, eye()) <= 1e-15);
  CHECK(mult.lambda[k0] == doctest::Approx(1.3).epsilon(1e-15));
}

TEST_CASE("field-level operator actions") {
  auto grid = build_grid(16, 40.0);
  auto mult = build_multipliers(grid, 1.0);
  SpinorField psi = random_momentum_spinor(grid, 1);

  SUBCASE("momentum-space inputs are required") {
    SpinorField pos = make_spinor(grid, Space::position);
    CHECK_THROWS_AS(apply_H(mult, pos), std::invalid_argument);
    CHECK_THROWS_AS(project(mult, pos, EnergySign::plus), std::invalid_argument);
    CHECK_THROWS_AS(h_norm_sq(mult, pos), std::invalid_argument);
  }

  SUBCASE("projectors split the energy form") {
    const SpinorField plus = project(mult, psi, EnergySign::plus);
    const SpinorField minus_f = project(mult, psi, EnergySign::minus);

    // decomposition and orthogonality
    double dev_sum = 0.0;
    for (std::size_t i = 0; i < psi.v.size(); ++i)
      dev_sum = std::max(dev_sum,
                         std::abs(plus.v[i] + minus_f.v[i] - psi.v[i]));
    CHECK(dev_sum <= 1e-12);
    CHECK(std::abs(l2_inner(plus, minus_f)) <= 1e-10);

    // <psi, H psi> = ||P+ psi||_H^2 - ||P- psi||_H^2
    const SpinorField hpsi = apply_H(mult, psi);
    const cplx quad = l2_inner(psi, hpsi);
    CHECK(std::abs(std::imag(quad)) <= 1e-10);
    CHECK(std::real(quad) ==
          doctest::Approx(h_norm_sq(mult, plus) - h_norm_sq(mult, minus_f))
              .epsilon(1e-10));

    // H commutes with the projection
    const SpinorField hp = apply_H(mult, plus);
    const SpinorField ph = project(mult, hpsi, EnergySign::plus);
    double cdev = 0.0;
    for (std::size_t i = 0; i < hp.v.size(); ++i)
      cdev = std::max(cdev, std::abs(hp.v[i] - ph.v[i]));
    CHECK(cdev <= 1e-10);
  }

  SUBCASE("h_inner is the lambda-weighted pairing") {
    SpinorField phi = random_momentum_spinor(grid, 2);
    cplx ref = 0.0;
    for (std::size_t k = 0; k < grid->sites(); ++k)
      for (int c = 0; c < 4; ++c)
        ref += mult.lambda[k] * std::conj(phi.v[4 * k + c]) * psi.v[4 * k + c];
    CHECK(std::abs(h_inner(mult, phi, psi) - ref) <= 1e-11 * std::abs(ref));
    CHECK(h_norm_sq(mult, psi) >= l2_norm_sq(psi));  // lambda >= m = 1
  }

  SUBCASE("rotation is unitary and diagonalizes the symbol") {
    const SpinorField rot = apply_fw(mult, psi, Direction::forward);
    CHECK(l2_norm_sq(rot) == doctest::Approx(l2_norm_sq(psi)).epsilon(1e-12));

    const SpinorField back = apply_fw(mult, rot, Direction::inverse);
    double rdev = 0.0;
    for (std::size_t i = 0; i < psi.v.size(); ++i)
      rdev = std::max(rdev, std::abs(back.v[i] - psi.v[i]));
    CHECK(rdev <= 1e-12);

    // U H U^dagger acts as lambda beta mode-wise
    const SpinorField diag = apply_fw(
        mult, apply_H(mult, apply_fw(mult, psi, Direction::inverse)),
        Direction::forward);
    double ddev = 0.0;
    for (std::size_t k = 0; k < grid->sites(); ++k) {
      const double lam = mult.lambda[k];
      ddev = std::max(ddev, std::abs(diag.v[4 * k + 0] - lam * psi.v[4 * k + 0]));
      ddev = std::max(ddev, std::abs(diag.v[4 * k + 1] - lam * psi.v[4 * k + 1]));
      ddev = std::max(ddev, std::abs(diag.v[4 * k + 2] + lam * psi.v[4 * k + 2]));
      ddev = std::max(ddev, std::abs(diag.v[4 * k + 3] + lam * psi.v[4 * k + 3]));
    }
    CHECK(ddev <= 1e-11);
  }
}
