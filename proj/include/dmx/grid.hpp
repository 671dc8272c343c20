// Periodic-box discretization: momentum lattice, unitary FFTs, L2 pairings,
// and the binary field dump format.
//
// Conventions (load-bearing for every downstream module):
//   * layout is row-major with the last axis fastest; spinor components are
//     innermost (value of component c at site i lives at v[4*i + c]);
//   * axis frequency for index j is 2*pi*k/L with k = j for j < n/2 and
//     k = j - n otherwise (Nyquist assigned to -n/2);
//   * both transform directions are unitary: forward = raw DFT * L^{3/2}/n^3,
//     inverse = raw inverse DFT * L^{-3/2}. Under this scaling the discrete
//     Plancherel identity is literal: the cell_volume-weighted position inner
//     product equals the unit-weighted momentum inner product.

#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

namespace dmx {

using cplx = std::complex<double>;

enum class Space : std::uint8_t { position = 0, momentum = 1 };
enum class Direction { forward, inverse };

class FourierGrid;
using GridPtr = std::shared_ptr<const FourierGrid>;

// Immutable after construction; plans are executed thread-safely, so one grid
// may serve concurrent transforms of distinct fields.
class FourierGrid {
 public:
  ~FourierGrid();
  FourierGrid(const FourierGrid&) = delete;
  FourierGrid& operator=(const FourierGrid&) = delete;

  int n() const { return n_; }
  double box_length() const { return box_; }
  double spacing() const { return box_ / n_; }
  double cell_volume() const;
  std::size_t sites() const;

  // Folded single-axis momentum values, indexed like the FFT output.
  const std::vector<double>& axis_freq() const { return freq_; }
  std::size_t site_index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * n_ + iy) * n_ + iz;
  }

  // In-place unitary transforms on raw interleaved-complex storage.
  void fft_scalar(cplx* data, Direction dir) const;
  void fft_spinor(cplx* data, Direction dir) const;

 private:
  friend GridPtr build_grid(int n_per_axis, double box_length);
  FourierGrid(int n, double box);

  struct Plans;
  int n_;
  double box_;
  double forward_factor_, inverse_factor_;
  std::vector<double> freq_;
  std::unique_ptr<Plans> plans_;
};

// n must be a power of two in [8, 256]; L must be positive.
GridPtr build_grid(int n_per_axis, double box_length);

struct ScalarField {
  GridPtr grid;
  Space space = Space::position;
  std::vector<cplx> v;  // n^3 values
};

struct SpinorField {
  GridPtr grid;
  Space space = Space::position;
  std::vector<cplx> v;  // 4*n^3 values, components innermost
};

ScalarField make_scalar(const GridPtr& grid, Space space);
SpinorField make_spinor(const GridPtr& grid, Space space);

// forward requires a position-space field, inverse a momentum-space field;
// the tag flips on success.
void transform(ScalarField& f, Direction dir);
void transform(SpinorField& f, Direction dir);
ScalarField transformed(ScalarField f, Direction dir);
SpinorField transformed(SpinorField f, Direction dir);

// Hermitian inner products under the declared normalization: cell_volume
// weight in position space, unit weight in momentum space. Conjugation is on
// the first argument. Both fields must share grid and space.
cplx l2_inner(const ScalarField& f, const ScalarField& g);
cplx l2_inner(const SpinorField& f, const SpinorField& g);
double l2_norm_sq(const ScalarField& f);
double l2_norm_sq(const SpinorField& f);

// Binary dump: magic "DMXM", format version u32, n u32, L f64, space_tag u8,
// then little-endian (f64 re, f64 im) pairs in the declared layout.
void write_field(const SpinorField& f, const std::filesystem::path& path);
SpinorField read_field(const std::filesystem::path& path);

}  // namespace dmx
