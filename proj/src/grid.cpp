#include "dmx/grid.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "dmx/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "field dump I/O assumes a little-endian host");

namespace dmx {

namespace {

// FFTW planning mutates global state; execution does not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* fc(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct FourierGrid::Plans {
  fftw_plan scalar_fwd = nullptr, scalar_inv = nullptr;
  fftw_plan spinor_fwd = nullptr, spinor_inv = nullptr;

  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (fftw_plan p : {scalar_fwd, scalar_inv, spinor_fwd, spinor_inv})
      if (p) fftw_destroy_plan(p);
  }
};

FourierGrid::FourierGrid(int n, double box)
    : n_(n), box_(box), freq_(static_cast<std::size_t>(n)) {
  const double two_pi_over_l = 2.0 * M_PI / box_;
  for (int j = 0; j < n_; ++j) {
    const int k = j < n_ / 2 ? j : j - n_;  // Nyquist folds to -n/2
    freq_[j] = two_pi_over_l * k;
  }
  forward_factor_ = std::pow(box_, 1.5) / static_cast<double>(sites());
  inverse_factor_ = std::pow(box_, -1.5);

  // UNALIGNED + in-place plans make new-array execution valid on any buffer.
  std::vector<cplx> buf(4 * sites());
  const int dims[3] = {n_, n_, n_};
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_ = std::make_unique<Plans>();
  plans_->scalar_fwd = fftw_plan_dft(3, dims, fc(buf.data()), fc(buf.data()),
                                     FFTW_FORWARD, flags);
  plans_->scalar_inv = fftw_plan_dft(3, dims, fc(buf.data()), fc(buf.data()),
                                     FFTW_BACKWARD, flags);
  plans_->spinor_fwd =
      fftw_plan_many_dft(3, dims, 4, fc(buf.data()), nullptr, 4, 1,
                         fc(buf.data()), nullptr, 4, 1, FFTW_FORWARD, flags);
  plans_->spinor_inv =
      fftw_plan_many_dft(3, dims, 4, fc(buf.data()), nullptr, 4, 1,
                         fc(buf.data()), nullptr, 4, 1, FFTW_BACKWARD, flags);
  if (!plans_->scalar_fwd || !plans_->scalar_inv || !plans_->spinor_fwd ||
      !plans_->spinor_inv)
    throw std::runtime_error("FFT planning failed");
}

FourierGrid::~FourierGrid() = default;

double FourierGrid::cell_volume() const {
  const double h = spacing();
  return h * h * h;
}

std::size_t FourierGrid::sites() const {
  const auto nn = static_cast<std::size_t>(n_);
  return nn * nn * nn;
}

void FourierGrid::fft_scalar(cplx* data, Direction dir) const {
  const bool fwd = dir == Direction::forward;
  fftw_execute_dft(fwd ? plans_->scalar_fwd : plans_->scalar_inv, fc(data),
                   fc(data));
  kernels::ops().scal(cplx(fwd ? forward_factor_ : inverse_factor_, 0.0), data,
                      sites());
}

void FourierGrid::fft_spinor(cplx* data, Direction dir) const {
  const bool fwd = dir == Direction::forward;
  fftw_execute_dft(fwd ? plans_->spinor_fwd : plans_->spinor_inv, fc(data),
                   fc(data));
  kernels::ops().scal(cplx(fwd ? forward_factor_ : inverse_factor_, 0.0), data,
                      4 * sites());
}

GridPtr build_grid(int n_per_axis, double box_length) {
  if (n_per_axis < 8 || n_per_axis > 256 ||
      (n_per_axis & (n_per_axis - 1)) != 0)
    throw std::invalid_argument(
        "grid size must be a power of two in [8, 256]");
  if (!(box_length > 0.0))
    throw std::invalid_argument("box length must be positive");
  return GridPtr(new FourierGrid(n_per_axis, box_length));
}

ScalarField make_scalar(const GridPtr& grid, Space space) {
  return ScalarField{grid, space, std::vector<cplx>(grid->sites())};
}

SpinorField make_spinor(const GridPtr& grid, Space space) {
  return SpinorField{grid, space, std::vector<cplx>(4 * grid->sites())};
}

namespace {

Space require_space_for(Direction dir, Space have) {
  const Space need =
      dir == Direction::forward ? Space::position : Space::momentum;
  if (have != need)
    throw std::invalid_argument(
        "transform direction does not match the field's space tag");
  return need == Space::position ? Space::momentum : Space::position;
}

}  // namespace

void transform(ScalarField& f, Direction dir) {
  const Space after = require_space_for(dir, f.space);
  f.grid->fft_scalar(f.v.data(), dir);
  f.space = after;
}

void transform(SpinorField& f, Direction dir) {
  const Space after = require_space_for(dir, f.space);
  f.grid->fft_spinor(f.v.data(), dir);
  f.space = after;
}

ScalarField transformed(ScalarField f, Direction dir) {
  transform(f, dir);
  return f;
}

SpinorField transformed(SpinorField f, Direction dir) {
  transform(f, dir);
  return f;
}

namespace {

template <class Field>
cplx inner_impl(const Field& f, const Field& g) {
  if (f.grid.get() != g.grid.get())
    throw std::invalid_argument("inner product requires a shared grid");
  if (f.space != g.space)
    throw std::invalid_argument("inner product requires matching spaces");
  const cplx raw = kernels::ops().dot(f.v.data(), g.v.data(), f.v.size());
  return f.space == Space::position ? raw * f.grid->cell_volume() : raw;
}

}  // namespace

cplx l2_inner(const ScalarField& f, const ScalarField& g) {
  return inner_impl(f, g);
}

cplx l2_inner(const SpinorField& f, const SpinorField& g) {
  return inner_impl(f, g);
}

double l2_norm_sq(const ScalarField& f) { return l2_inner(f, f).real(); }

double l2_norm_sq(const SpinorField& f) { return l2_inner(f, f).real(); }

namespace {

constexpr char kMagic[4] = {'D', 'M', 'X', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_field(const SpinorField& f, const std::filesystem::path& path) {
  FileHandle out(std::fopen(path.string().c_str(), "wb"));
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const std::uint32_t n = static_cast<std::uint32_t>(f.grid->n());
  const double box = f.grid->box_length();
  const std::uint8_t tag = static_cast<std::uint8_t>(f.space);
  bool ok = std::fwrite(kMagic, 1, 4, out.get()) == 4 &&
            std::fwrite(&kFormatVersion, sizeof kFormatVersion, 1, out.get()) ==
                1 &&
            std::fwrite(&n, sizeof n, 1, out.get()) == 1 &&
            std::fwrite(&box, sizeof box, 1, out.get()) == 1 &&
            std::fwrite(&tag, sizeof tag, 1, out.get()) == 1;
  ok = ok && std::fwrite(f.v.data(), sizeof(cplx), f.v.size(), out.get()) ==
                 f.v.size();
  if (!ok) throw std::runtime_error("short write to " + path.string());
}

SpinorField read_field(const std::filesystem::path& path) {
  FileHandle in(std::fopen(path.string().c_str(), "rb"));
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  std::uint32_t version = 0, n = 0;
  double box = 0.0;
  std::uint8_t tag = 0;
  const bool ok =
      std::fread(magic, 1, 4, in.get()) == 4 &&
      std::fread(&version, sizeof version, 1, in.get()) == 1 &&
      std::fread(&n, sizeof n, 1, in.get()) == 1 &&
      std::fread(&box, sizeof box, 1, in.get()) == 1 &&
      std::fread(&tag, sizeof tag, 1, in.get()) == 1;
  if (!ok || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a field dump: " + path.string());
  if (version != kFormatVersion)
    throw std::runtime_error("unsupported field dump version");
  if (tag > 1) throw std::runtime_error("corrupt space tag in field dump");
  SpinorField f = make_spinor(build_grid(static_cast<int>(n), box),
                              static_cast<Space>(tag));
  if (std::fread(f.v.data(), sizeof(cplx), f.v.size(), in.get()) != f.v.size())
    throw std::runtime_error("truncated field dump: " + path.string());
  return f;
}

}  // namespace dmx
