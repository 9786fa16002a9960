#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nlgrad/inversion.hpp"
#include "nlgrad/radial_fourier.hpp"

// Periodic-grid evaluation of the nonlocal gradient G u = g * grad u and its
// inverse.  The torus [0, L)^3 stands in for R^3: fields decay fast enough
// that the periodic images contribute below the working tolerances (the
// doubling bound in the tests quantifies this).  Spectrally the operator is
// the multiplier 2 pi i xi ghat(|xi|) applied on the discrete frequency
// lattice xi = k / L, k in {-N/2, ..., N/2 - 1}^3; reconstruction divides by
// the same symbol, so with a shared spectrum table the composition is exact
// to transform precision.  A direct singular-quadrature evaluator provides
// an independent check at analytic probe points.

namespace nlgrad {

// Cubic sample lattice: N points per axis at coordinates i * h, h = L / N.
struct Grid3 {
  int N = 64;
  double L = 16.0;

  Grid3(int n, double box); // requires N a power of two >= 16, L > 0
  double h() const { return L / N; }
  std::size_t size() const { return std::size_t(N) * N * N; }
  std::size_t index(int ix, int iy, int iz) const {
    return (std::size_t(ix) * N + iy) * std::size_t(N) + iz;
  }
  double coord(int i) const { return h() * i; }
  // Signed frequency index (DFT bin m maps to m - N for m >= N/2).
  int signed_index(int m) const { return m < N / 2 ? m : m - N; }
  double freq(int m) const { return signed_index(m) / L; }
  // Largest frequency magnitude on the lattice: sqrt(3) * (N/2) / L.
  double max_freq() const;
  // Smallest nonzero frequency magnitude: 1 / L.
  double min_freq() const { return 1.0 / L; }
  bool operator==(const Grid3& o) const { return N == o.N && L == o.L; }
};

struct ScalarField {
  Grid3 grid;
  std::vector<double> v; // row-major x, y, z

  explicit ScalarField(const Grid3& g);
  double& at(int ix, int iy, int iz) { return v[grid.index(ix, iy, iz)]; }
  double at(int ix, int iy, int iz) const { return v[grid.index(ix, iy, iz)]; }
  double mean() const;
  double max_abs() const;
  double l2() const; // sqrt(h^3 sum v^2)
};

using SpectralCube = std::vector<std::complex<double>>; // same layout as v

// Vector field with an optional exact spectral representation.  Multiplier
// operators fill both: the sample cubes hold the real part of the inverse
// transform while spec retains the full complex coefficients, which keeps
// reconstruction and curl diagnostics exact at the self-paired Nyquist
// planes where an odd multiplier breaks conjugate symmetry.
struct VectorField {
  Grid3 grid;
  std::array<std::vector<double>, 3> comp;
  std::array<SpectralCube, 3> spec; // empty when built from samples only
  bool has_spec = false;

  explicit VectorField(const Grid3& g);
  double max_abs() const;
  double l2() const;
};

// Unnormalized c2c DFT (FFTW sign conventions: forward e^{-2 pi i k n / N});
// inverse includes the 1 / N^3 factor so the pair round-trips.
SpectralCube forward_fft(const ScalarField& u);
ScalarField inverse_fft(const SpectralCube& c, const Grid3& g);

ScalarField sample_field(const Grid3& g,
                         const std::function<double(double, double, double)>& f);

// Monotone cubic interpolant of log ghat against log xi (Fritsch-Carlson
// slopes), so a strictly positive table stays strictly positive between
// nodes.  Throws std::invalid_argument when the table is not strictly
// positive or a query leaves [xi_min, xi_max].
class SpectrumInterp {
 public:
  explicit SpectrumInterp(const RadialSpectrum& sp);
  double operator()(double xi) const;
  double xi_min() const { return ximin_; }
  double xi_max() const { return ximax_; }

 private:
  std::vector<double> lx_, ly_, m_;
  double ximin_ = 0.0, ximax_ = 0.0;
};

// Classical gradient via the multiplier 2 pi i xi.
VectorField gradient_spectral(const ScalarField& u);

// G u via the multiplier 2 pi i xi ghat(|xi|).  Preconditions (throws
// std::invalid_argument with the offending numbers): the spectrum table must
// cover [1/L, sqrt(3) N / (2L)], and u must be effectively supported inside
// the box (|u| on the wrap faces <= 1e-10 of the peak).
VectorField nonlocal_gradient_spectral(const ScalarField& u,
                                       const RadialSpectrum& sp);

// max over component pairs of ||d_l F_j - d_j F_l||_2 / ||F||_2, computed
// spectrally (uses F.spec when present, else transforms the samples).
double curl_residual(const VectorField& F);

// Inverts the multiplier: u = F^{-1}[ sum_j Gu_j^ (-i xi_j) / (2 pi |xi|^2
// ghat) ] with the zero mode pinned to mean_u.  With the spectrum table that
// produced Gu this is a left inverse up to transform precision.
ScalarField reconstruct(const VectorField& Gu, const RadialSpectrum& sp,
                        double mean_u);

// Real-space variant: u = |V| zhat * Gu with the inversion kernel table.
// Point samples cannot carry the r^{-(d-s)} singularity at grid scale, so
// the kernel is split smoothly at 4h: beyond the ramp a literal grid
// convolution of sampled V (cell-averaged where the kernel still bends),
// inside it the exact radial transform of the windowed table applied as a
// multiplier.  Both pieces come from the same tabulated |V|.
ScalarField reconstruct_realspace(const VectorField& Gu,
                                  const InversionKernel& kernel, double mean_u);

// Probe function for the direct evaluator.  diff(x, z) must return
// u(x) - u(x - z) to full relative precision even at |z| ~ 1e-14 (for the
// quadrature to honour the core bound it has to resolve differences far
// below double cancellation scale; expm1-style forms achieve this).
struct AnalyticScalar {
  std::function<double(const std::array<double, 3>&)> value;
  std::function<double(const std::array<double, 3>&, const std::array<double, 3>&)>
      diff;
  double grad_sup = 1.0; // sup |grad u|, enters the core bound
};

struct DirectOptions {
  double rho_max = 25.0;  // u must be negligible outside |z| < rho_max of x
  double core_tol = 1e-6; // omitted-core bound relative to |G|
  double quad_tol = 1e-7; // relative agreement between refinement levels
  // The stable diff form keeps the integrand exact at any representable
  // |z|, so the cut can go deep; heads with exponent near d never satisfy
  // the bound and are refused via the shrink guard instead.
  double h_cut_floor = 1e-40;
  double result_scale = 0.0; // reference magnitude for the tolerances when
                             // |G| itself vanishes by symmetry (0 = use |G|)
};

// G u(x) by spherical quadrature of -int (u(x) - u(x - z)) grad g(z) dz:
// Gauss-Legendre in cos(theta), uniform in phi, log-spaced radial panels on
// [h_cut, rho_max].  h_cut shrinks until grad_sup * int_{|z|<h_cut} |z|
// |grad g| <= core_tol * |G|; throws std::runtime_error when that needs
// h_cut below h_cut_floor or refinement stalls.
std::array<double, 3> nonlocal_gradient_direct(const AnalyticScalar& u,
                                               const RadialProfile& g,
                                               const std::array<double, 3>& x,
                                               const DirectOptions& opt = {});

// Sweep of s -> 1 for the riesz family at a = 1: rows record
// max | (1-s) Gu / (d-1+s) - (sigma_d / d) grad u | / max |grad u|.
struct LimitRow {
  double s = 0.0;
  double distance = 0.0;
};
std::vector<LimitRow> limit_s_to_1(const ScalarField& u,
                                   const std::vector<double>& s_values,
                                   const FtOptions& ft = {1e-4, 1e4, 2048, 2048, 1});

// Upper bound on the periodic-image contamination of G u at a point at
// distance `offset` from the centre of a field with ||u||_1 = u_l1 supported
// (to working precision) in a ball of radius u_radius: shell sums of
// ||u||_1 sup |grad g| at the image distances.  Exactly 0 for compact tails
// once the first image clears the support.
double periodization_bound(const RadialProfile& g, double L, double u_l1,
                           double u_radius, double offset);

// Flat binary snapshot: int32 N, double L, then N^3 doubles row-major.
void write_snapshot(const ScalarField& u, const std::string& path);
ScalarField read_snapshot(const std::string& path);

// CSV line probes through the box centre along the three axes:
// axis,t,value per row.
void write_axis_probes(const ScalarField& u, const std::string& path);

} // namespace nlgrad
