#include "nlgrad/field_ops.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nlgrad/kernel.hpp"

namespace nlgrad {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail_arg(const std::string& msg) {
  throw std::invalid_argument("field_ops: " + msg);
}

template <class Fn>
void for_modes(const Grid3& g, Fn&& fn) {
  for (int mx = 0; mx < g.N; ++mx) {
    const double fx = g.freq(mx);
    for (int my = 0; my < g.N; ++my) {
      const double fy = g.freq(my);
      const std::size_t base = (std::size_t(mx) * g.N + my) * std::size_t(g.N);
      for (int mz = 0; mz < g.N; ++mz) fn(base + mz, fx, fy, g.freq(mz));
    }
  }
}

} // namespace

Grid3::Grid3(int n, double box) : N(n), L(box) {
  if (n < 16 || (n & (n - 1)) != 0)
    fail_arg("grid N must be a power of two >= 16, got " + std::to_string(n));
  if (!(box > 0.0) || !std::isfinite(box))
    fail_arg("grid L must be positive and finite");
}

double Grid3::max_freq() const {
  return std::sqrt(3.0) * (N / 2) / L;
}

ScalarField::ScalarField(const Grid3& g) : grid(g), v(g.size(), 0.0) {}

double ScalarField::mean() const {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double ScalarField::l2() const {
  double s = 0.0;
  for (double x : v) s += x * x;
  const double h = grid.h();
  return std::sqrt(h * h * h * s);
}

VectorField::VectorField(const Grid3& g) : grid(g) {
  for (auto& c : comp) c.assign(g.size(), 0.0);
}

double VectorField::max_abs() const {
  double m = 0.0;
  for (const auto& c : comp)
    for (double x : c) m = std::max(m, std::abs(x));
  return m;
}

double VectorField::l2() const {
  double s = 0.0;
  for (const auto& c : comp)
    for (double x : c) s += x * x;
  const double h = grid.h();
  return std::sqrt(h * h * h * s);
}

SpectralCube forward_fft(const ScalarField& u) {
  const int N = u.grid.N;
  SpectralCube in(u.grid.size()), out(u.grid.size());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = u.v[i];
  fftw_plan plan = fftw_plan_dft_3d(
      N, N, N, reinterpret_cast<fftw_complex*>(in.data()),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

ScalarField inverse_fft(const SpectralCube& c, const Grid3& g) {
  if (c.size() != g.size()) fail_arg("spectral cube size does not match grid");
  const int N = g.N;
  SpectralCube in(c), out(c.size());
  fftw_plan plan = fftw_plan_dft_3d(
      N, N, N, reinterpret_cast<fftw_complex*>(in.data()),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  ScalarField u(g);
  const double scale = 1.0 / double(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) u.v[i] = out[i].real() * scale;
  return u;
}

ScalarField sample_field(const Grid3& g,
                         const std::function<double(double, double, double)>& f) {
  ScalarField u(g);
  for (int ix = 0; ix < g.N; ++ix)
    for (int iy = 0; iy < g.N; ++iy)
      for (int iz = 0; iz < g.N; ++iz)
        u.at(ix, iy, iz) = f(g.coord(ix), g.coord(iy), g.coord(iz));
  return u;
}

SpectrumInterp::SpectrumInterp(const RadialSpectrum& sp) {
  const std::size_t n = sp.xi.size();
  if (n < 4 || sp.ghat.size() != n)
    fail_arg("spectrum table needs >= 4 matched points");
  lx_.resize(n);
  ly_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sp.ghat[i] > 0.0)) {
      std::ostringstream msg;
      msg << "spectrum not strictly positive: ghat(" << sp.xi[i]
          << ") = " << sp.ghat[i];
      fail_arg(msg.str());
    }
    lx_[i] = std::log(sp.xi[i]);
    ly_[i] = std::log(sp.ghat[i]);
  }
  ximin_ = sp.xi.front();
  ximax_ = sp.xi.back();
  // Fritsch-Carlson slopes: interpolant stays monotone on monotone data and
  // never overshoots, so exp of it preserves strict positivity.
  m_.assign(n, 0.0);
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = lx_[i + 1] - lx_[i];
    del[i] = (ly_[i + 1] - ly_[i]) / h[i];
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return m;
  };
  m_[0] = endpoint(h[0], h[1], del[0], del[1]);
  m_[n - 1] = endpoint(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] <= 0.0) {
      m_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
  }
}

double SpectrumInterp::operator()(double xi) const {
  if (!(xi >= ximin_ && xi <= ximax_)) {
    std::ostringstream msg;
    msg << "frequency " << xi << " outside spectrum table [" << ximin_ << ", "
        << ximax_ << "]";
    fail_arg(msg.str());
  }
  const double q = std::log(xi);
  std::size_t k =
      std::upper_bound(lx_.begin(), lx_.end(), q) - lx_.begin();
  k = std::min(std::max<std::size_t>(k, 1), lx_.size() - 1) - 1;
  const double h = lx_[k + 1] - lx_[k];
  const double t = (q - lx_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double val = ly_[k] * (2.0 * t3 - 3.0 * t2 + 1.0) +
                     m_[k] * h * (t3 - 2.0 * t2 + t) +
                     ly_[k + 1] * (-2.0 * t3 + 3.0 * t2) +
                     m_[k + 1] * h * (t3 - t2);
  return std::exp(val);
}

namespace {

void require_range(const SpectrumInterp& ghat, const Grid3& g) {
  if (ghat.xi_min() > g.min_freq() || ghat.xi_max() < g.max_freq()) {
    std::ostringstream msg;
    msg << "spectrum table covers [" << ghat.xi_min() << ", " << ghat.xi_max()
        << "] but the grid needs [" << g.min_freq() << ", " << g.max_freq()
        << "]";
    fail_arg(msg.str());
  }
}

void require_interior_support(const ScalarField& u) {
  const Grid3& g = u.grid;
  const double peak = u.max_abs();
  const double mean = u.mean();
  double vari = 0.0;
  for (double x : u.v) vari = std::max(vari, std::abs(x - mean));
  if (vari <= 1e-12 * (peak + std::abs(mean))) return; // constant: exact
  double face = 0.0;
  for (int a = 0; a < g.N; ++a)
    for (int b = 0; b < g.N; ++b)
      face = std::max({face, std::abs(u.at(0, a, b)), std::abs(u.at(a, 0, b)),
                       std::abs(u.at(a, b, 0))});
  if (!(face <= 1e-10 * peak)) {
    std::ostringstream msg;
    msg << "field not supported inside the box: wrap-face magnitude " << face
        << " exceeds 1e-10 of peak " << peak;
    fail_arg(msg.str());
  }
}

// Shared core of the two gradient multipliers; amp(
//   |xi|) scales 2 pi i xi.
template <class Amp>
VectorField gradient_multiplier(const ScalarField& u, Amp&& amp) {
  const Grid3& g = u.grid;
  const SpectralCube uh = forward_fft(u);
  VectorField out(g);
  out.has_spec = true;
  for (auto& s : out.spec) s.assign(g.size(), {0.0, 0.0});
  for_modes(g, [&](std::size_t idx, double fx, double fy, double fz) {
    const double xi = std::sqrt(fx * fx + fy * fy + fz * fz);
    if (xi == 0.0) return; // zero mode: grad u has zero mean
    const std::complex<double> base =
        uh[idx] * std::complex<double>(0.0, 2.0 * kPi * amp(xi));
    out.spec[0][idx] = base * fx;
    out.spec[1][idx] = base * fy;
    out.spec[2][idx] = base * fz;
  });
  for (int j = 0; j < 3; ++j) out.comp[j] = inverse_fft(out.spec[j], g).v;
  return out;
}

std::array<SpectralCube, 3> spectral_view(const VectorField& F) {
  if (F.has_spec) return F.spec;
  std::array<SpectralCube, 3> S;
  for (int j = 0; j < 3; ++j) {
    ScalarField tmp(F.grid);
    tmp.v = F.comp[j];
    S[j] = forward_fft(tmp);
  }
  return S;
}

} // namespace

VectorField gradient_spectral(const ScalarField& u) {
  return gradient_multiplier(u, [](double) { return 1.0; });
}

VectorField nonlocal_gradient_spectral(const ScalarField& u,
                                       const RadialSpectrum& sp) {
  const SpectrumInterp ghat(sp);
  require_range(ghat, u.grid);
  require_interior_support(u);
  return gradient_multiplier(u, [&](double xi) { return ghat(xi); });
}

double curl_residual(const VectorField& F) {
  const Grid3& g = F.grid;
  const std::array<SpectralCube, 3> S = spectral_view(F);
  double denom = 0.0;
  for (const auto& c : S)
    for (const auto& z : c) denom += std::norm(z);
  if (denom == 0.0) return 0.0;
  const int pair_l[3] = {0, 0, 1};
  const int pair_j[3] = {1, 2, 2};
  double worst = 0.0;
  for (int p = 0; p < 3; ++p) {
    const SpectralCube& A = S[pair_l[p]];
    const SpectralCube& B = S[pair_j[p]];
    double acc = 0.0;
    for_modes(g, [&](std::size_t idx, double fx, double fy, double fz) {
      const double f[3] = {fx, fy, fz};
      // 2 pi i (xi_l F_j - xi_j F_l); Parseval turns the L2 norm into a
      // coefficient sum, and the shared normalization cancels in the ratio.
      acc += std::norm(f[pair_l[p]] * B[idx] - f[pair_j[p]] * A[idx]);
    });
    worst = std::max(worst, 2.0 * kPi * std::sqrt(acc / denom));
  }
  return worst;
}

ScalarField reconstruct(const VectorField& Gu, const RadialSpectrum& sp,
                        double mean_u) {
  const Grid3& g = Gu.grid;
  const SpectrumInterp ghat(sp);
  require_range(ghat, g);
  const std::array<SpectralCube, 3> S = spectral_view(Gu);
  SpectralCube uh(g.size());
  for_modes(g, [&](std::size_t idx, double fx, double fy, double fz) {
    const double xi2 = fx * fx + fy * fy + fz * fz;
    if (xi2 == 0.0) {
      uh[idx] = mean_u * double(g.size());
      return;
    }
    const std::complex<double> num =
        std::complex<double>(0.0, -1.0) *
        (S[0][idx] * fx + S[1][idx] * fy + S[2][idx] * fz);
    uh[idx] = num / (2.0 * kPi * xi2 * ghat(std::sqrt(xi2)));
  });
  return inverse_fft(uh, g);
}

namespace {

struct Rule1D {
  std::vector<double> x, w; // nodes and weights on [-1, 1]
};

Rule1D legendre_rule(int n) {
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// spherical Bessel j1; series below the cancellation scale
double bessel_j1s(double x) {
  if (std::abs(x) < 1e-2) {
    const double x2 = x * x;
    return x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0));
  }
  return (std::sin(x) / x - std::cos(x)) / x;
}

// C2 ramp: 1 below a, 0 above b
double window_down(double rho, double a, double b) {
  if (rho <= a) return 1.0;
  if (rho >= b) return 0.0;
  const double t = (rho - a) / (b - a);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

} // namespace

ScalarField reconstruct_realspace(const VectorField& Gu,
                                  const InversionKernel& kernel, double mean_u) {
  const Grid3& g = Gu.grid;
  if (!kernel.v_nonneg) fail_arg("inversion kernel table must be nonnegative");
  const double h = g.h();
  const double rho0 = 4.0 * h;  // near/far split radius
  const double ramp = 0.5 * rho0;
  const double rho_hi = std::sqrt(3.0) * 0.5 * g.L;
  if (kernel.rho.front() > ramp || kernel.rho.back() < rho_hi) {
    std::ostringstream msg;
    msg << "inversion kernel table covers [" << kernel.rho.front() << ", "
        << kernel.rho.back() << "] but the grid needs [" << ramp << ", "
        << rho_hi << "]";
    fail_arg(msg.str());
  }
  // log-log linear interpolation of |V|, extended below the table by the
  // closed-form inner slope -(closed_decay + 1)
  auto vmag = [&](double rho) {
    if (rho < kernel.rho.front())
      return kernel.V.front() *
             std::pow(rho / kernel.rho.front(), -(kernel.closed_decay + 1.0));
    const auto it =
        std::upper_bound(kernel.rho.begin(), kernel.rho.end(), rho);
    std::size_t k = std::min<std::size_t>(
        std::max<std::ptrdiff_t>(it - kernel.rho.begin(), 1),
        kernel.rho.size() - 1) - 1;
    const double t = std::log(rho / kernel.rho[k]) /
                     std::log(kernel.rho[k + 1] / kernel.rho[k]);
    return std::exp((1.0 - t) * std::log(kernel.V[k]) +
                    t * std::log(kernel.V[k + 1]));
  };
  // Near part: radial transform of the windowed kernel.  For the odd radial
  // field V chi the transform is -i xihat w(|xi|) with
  //   w(xi) = 4 pi int v(rho) chi(rho) j1(2 pi xi rho) rho^2 d rho,
  // tabulated once on the grid's frequency band (j1 integrand is
  // non-oscillatory over rho <= rho0 at these frequencies).
  std::vector<double> qr, qw;
  {
    const Rule1D gl = legendre_rule(10);
    const int per_dec = 12;
    const double lo = 1e-6;
    const int n_pan = int(std::ceil(per_dec * std::log10(rho0 / lo)));
    const double t0 = std::log(lo), dt = (std::log(rho0) - t0) / n_pan;
    for (int p = 0; p < n_pan; ++p)
      for (int i = 0; i < 10; ++i) {
        const double rho = std::exp(t0 + (p + 0.5) * dt + 0.5 * dt * gl.x[i]);
        const double chi = window_down(rho, ramp, rho0);
        if (chi == 0.0) continue;
        qr.push_back(rho);
        qw.push_back(vmag(rho) * chi * rho * rho * rho * (0.5 * dt * gl.w[i]));
      }
  }
  const int nw = 2049;
  const double dxi = g.max_freq() * 1.0000001 / (nw - 1);
  std::vector<double> wtab(nw, 0.0);
  for (int iw = 1; iw < nw; ++iw) {
    const double xi = iw * dxi;
    double s = 0.0;
    for (std::size_t i = 0; i < qr.size(); ++i)
      s += qw[i] * bessel_j1s(2.0 * kPi * xi * qr[i]);
    wtab[iw] = 4.0 * kPi * s;
  }
  // Far part: grid samples of (1 - chi) V, cell-averaged while the kernel
  // still bends across a cell, midpoint where it is flat.
  std::array<ScalarField, 3> Vfar{ScalarField(g), ScalarField(g),
                                  ScalarField(g)};
  const int sub_fine = 7, sub_mid = 3;
  for (int ix = 0; ix < g.N; ++ix) {
    const double zx = g.signed_index(ix) * h;
    for (int iy = 0; iy < g.N; ++iy) {
      const double zy = g.signed_index(iy) * h;
      for (int iz = 0; iz < g.N; ++iz) {
        const double zc[3] = {zx, zy, g.signed_index(iz) * h};
        const double rho =
            std::sqrt(zc[0] * zc[0] + zc[1] * zc[1] + zc[2] * zc[2]);
        if (rho < ramp - h) continue; // fully inside the window
        double val[3] = {0.0, 0.0, 0.0};
        const int sub = rho < 1.5 ? sub_fine : rho < 3.0 ? sub_mid : 1;
        if (sub == 1) {
          if (rho > 0.0) {
            const double a = (1.0 - window_down(rho, ramp, rho0)) * vmag(rho);
            for (int j = 0; j < 3; ++j) val[j] = a * zc[j] / rho;
          }
        } else {
          const double step = h / sub;
          for (int ax = 0; ax < sub; ++ax)
            for (int ay = 0; ay < sub; ++ay)
              for (int az = 0; az < sub; ++az) {
                const double p[3] = {
                    zc[0] + (ax - 0.5 * (sub - 1)) * step,
                    zc[1] + (ay - 0.5 * (sub - 1)) * step,
                    zc[2] + (az - 0.5 * (sub - 1)) * step};
                const double r =
                    std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
                if (r == 0.0) continue;
                const double a =
                    (1.0 - window_down(r, ramp, rho0)) * vmag(r) /
                    (r * double(sub) * double(sub) * double(sub));
                for (int j = 0; j < 3; ++j) val[j] += a * p[j];
              }
        }
        for (int j = 0; j < 3; ++j)
          Vfar[j].at(ix, iy, iz) = val[j];
      }
    }
  }
  const double cell = h * h * h;
  std::array<SpectralCube, 3> Gh;
  for (int j = 0; j < 3; ++j) {
    ScalarField Gj(g);
    Gj.v = Gu.comp[j];
    Gh[j] = forward_fft(Gj);
  }
  SpectralCube acc(g.size(), {0.0, 0.0});
  for (int j = 0; j < 3; ++j) {
    const SpectralCube Vh = forward_fft(Vfar[j]);
    for (std::size_t i = 0; i < acc.size(); ++i)
      acc[i] += Vh[i] * Gh[j][i] * cell;
  }
  for_modes(g, [&](std::size_t idx, double fx, double fy, double fz) {
    const double xi = std::sqrt(fx * fx + fy * fy + fz * fz);
    if (xi == 0.0) return;
    const double t = xi / dxi;
    const std::size_t k = std::min<std::size_t>(std::size_t(t), nw - 2);
    const double wv = wtab[k] + (t - double(k)) * (wtab[k + 1] - wtab[k]);
    const std::complex<double> dir =
        std::complex<double>(0.0, -1.0) *
        (Gh[0][idx] * fx + Gh[1][idx] * fy + Gh[2][idx] * fz) / xi;
    acc[idx] += dir * wv;
  });
  ScalarField u = inverse_fft(acc, g);
  const double shift = mean_u - u.mean();
  for (double& x : u.v) x += shift;
  return u;
}

namespace {

struct AngularPoint {
  double s[3];
  double w;
};

// Gauss-Legendre in cos(theta) times a uniform phi grid: antipodal symmetry
// of the rule cancels odd integrands exactly, matching the symmetry
// structure of the principal-value integral.
const std::vector<AngularPoint>& angular_rule(int n_th) {
  static std::vector<std::pair<int, std::vector<AngularPoint>>> cache;
  for (const auto& e : cache)
    if (e.first == n_th) return e.second;
  const Rule1D gl = legendre_rule(n_th);
  const int n_ph = 2 * n_th;
  std::vector<AngularPoint> pts;
  pts.reserve(std::size_t(n_th) * n_ph);
  for (int a = 0; a < n_th; ++a) {
    const double c = gl.x[a];
    const double st = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double w = gl.w[a] * (2.0 * kPi / n_ph);
    for (int b = 0; b < n_ph; ++b) {
      const double phi = 2.0 * kPi * (b + 0.5) / n_ph;
      pts.push_back({{st * std::cos(phi), st * std::sin(phi), c}, w});
    }
  }
  cache.emplace_back(n_th, std::move(pts));
  return cache.back().second;
}

struct RadialNode {
  double rho, fac; // fac = g'(rho) rho^3 times the log-panel weight
};

double vec_norm(const std::array<double, 3>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

std::array<double, 3> panel_at_order(const AnalyticScalar& u,
                                     const std::array<double, 3>& x,
                                     const std::vector<RadialNode>& nodes,
                                     int n_th) {
  const std::vector<AngularPoint>& ang = angular_rule(n_th);
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  std::array<double, 3> z{};
  for (const RadialNode& n : nodes) {
    for (const AngularPoint& a : ang) {
      z[0] = n.rho * a.s[0];
      z[1] = n.rho * a.s[1];
      z[2] = n.rho * a.s[2];
      const double c = u.diff(x, z) * n.fac * a.w;
      acc[0] -= c * a.s[0];
      acc[1] -= c * a.s[1];
      acc[2] -= c * a.s[2];
    }
  }
  return acc;
}

// Panel-adaptive spherical quadrature.  The radial rule is logarithmic over
// the power-law region [h_cut, 0.1] and linear above it, where the probe
// fields vary on a unit scale that log panels would under-resolve.  The
// angular bandwidth of u(x - z) on the sphere |z| = rho grows like rho times
// the distance to the features of u, so each radial panel raises its angular
// order until its own value settles below ptol; ptol == 0 runs a fixed
// order 16 (scale estimation).
std::array<double, 3> integrate_direct(const AnalyticScalar& u,
                                       const RadialProfile& g,
                                       const std::array<double, 3>& x,
                                       double h_cut, double rho_max,
                                       int per_dec, int q, double ptol) {
  const Rule1D gl = legendre_rule(q);
  const double rho_lin = std::min(0.1, rho_max);
  const int n_log =
      std::max(1, int(std::ceil(per_dec * std::log10(rho_lin / h_cut))));
  const double t0 = std::log(h_cut);
  const double dt = (std::log(rho_lin) - t0) / n_log;
  // Linear panels never straddle a branch junction of the profile: g' can
  // kink there, which would drop the panel rule to algebraic convergence.
  std::vector<std::pair<double, double>> lin;
  if (rho_max > rho_lin) {
    std::vector<double> edges{rho_lin};
    for (double b : {g.head().valid_to, g.tail().valid_from})
      if (b > rho_lin * (1.0 + 1e-12) && b < rho_max * (1.0 - 1e-12))
        edges.push_back(b);
    edges.push_back(rho_max);
    std::sort(edges.begin(), edges.end());
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double a = edges[k], b = edges[k + 1];
      if (b - a < 1e-14) continue;
      const int n = std::max(1, int(std::ceil((b - a) * per_dec / 5.0)));
      const double w = (b - a) / n;
      for (int p = 0; p < n; ++p) lin.emplace_back(a + p * w, a + (p + 1) * w);
    }
  }
  static const int kOrders[] = {8, 12, 18, 27, 40, 60, 90};
  std::array<double, 3> total{0.0, 0.0, 0.0};
  std::vector<RadialNode> nodes(q);
  const int n_pan = n_log + int(lin.size());
  for (int p = 0; p < n_pan; ++p) {
    for (int i = 0; i < q; ++i) {
      if (p < n_log) {
        const double rho = std::exp(t0 + (p + 0.5) * dt + 0.5 * dt * gl.x[i]);
        // weight rho^3: rho^2 Jacobian and d rho = rho dt
        nodes[i] = {rho, g.dg(rho) * rho * rho * rho * (0.5 * dt * gl.w[i])};
      } else {
        const auto& seg = lin[p - n_log];
        const double half = 0.5 * (seg.second - seg.first);
        const double rho = 0.5 * (seg.first + seg.second) + half * gl.x[i];
        nodes[i] = {rho, g.dg(rho) * rho * rho * (half * gl.w[i])};
      }
    }
    std::array<double, 3> pan;
    if (ptol == 0.0) {
      pan = panel_at_order(u, x, nodes, 16);
    } else {
      pan = panel_at_order(u, x, nodes, kOrders[0]);
      for (std::size_t k = 1; k < sizeof(kOrders) / sizeof(int); ++k) {
        const std::array<double, 3> next =
            panel_at_order(u, x, nodes, kOrders[k]);
        const std::array<double, 3> d{next[0] - pan[0], next[1] - pan[1],
                                      next[2] - pan[2]};
        pan = next;
        if (vec_norm(d) <= ptol) break;
      }
    }
    for (int j = 0; j < 3; ++j) total[j] += pan[j];
  }
  return total;
}

} // namespace

std::array<double, 3> nonlocal_gradient_direct(const AnalyticScalar& u,
                                               const RadialProfile& g,
                                               const std::array<double, 3>& x,
                                               const DirectOptions& opt) {
  if (!u.value || !u.diff) fail_arg("analytic probe needs value and diff");
  const double he = g.head().exponent;
  const double ca = g.head().coef;
  if (!(he < 3.0 && ca > 0.0)) fail_arg("profile head law outside d = 3 range");
  // int_{|z|<h} |z| |grad g| under the head power law
  const auto core_bound = [&](double h) {
    return u.grad_sup * 4.0 * kPi * he * ca * std::pow(h, 3.0 - he) /
           (3.0 - he);
  };
  double h_cut = std::min(1e-4, 0.5 * g.head().valid_to);
  const std::array<double, 3> probe =
      integrate_direct(u, g, x, h_cut, opt.rho_max, 6, 8, 0.0);
  const double scale = std::max(vec_norm(probe), opt.result_scale);
  int guard = 0;
  while (core_bound(h_cut) > opt.core_tol * scale) {
    h_cut *= 1e-2;
    if (h_cut < opt.h_cut_floor || ++guard > 200) {
      std::ostringstream msg;
      msg << "core bound not achievable: needs h_cut below " << h_cut
          << " (bound " << core_bound(h_cut * 1e2) << " vs target "
          << opt.core_tol * scale << ")";
      throw std::runtime_error("field_ops: " + msg.str());
    }
  }
  const double ptol = 0.01 * opt.quad_tol * scale;
  const std::array<double, 3> g2 =
      integrate_direct(u, g, x, h_cut, opt.rho_max, 10, 10, ptol);
  const std::array<double, 3> g3 =
      integrate_direct(u, g, x, h_cut, opt.rho_max, 15, 12, 0.5 * ptol);
  const std::array<double, 3> dvec{g3[0] - g2[0], g3[1] - g2[1],
                                   g3[2] - g2[2]};
  const double ref = std::max(vec_norm(g3), opt.result_scale);
  if (vec_norm(dvec) > opt.quad_tol * ref) {
    std::ostringstream msg;
    msg << "quadrature refinement stalled: levels differ by " << vec_norm(dvec)
        << " against scale " << ref;
    throw std::runtime_error("field_ops: " + msg.str());
  }
  return g3;
}

std::vector<LimitRow> limit_s_to_1(const ScalarField& u,
                                   const std::vector<double>& s_values,
                                   const FtOptions& ft) {
  const VectorField grad = gradient_spectral(u);
  const double gmax = grad.max_abs();
  if (gmax == 0.0) fail_arg("limit sweep needs a nonconstant field");
  const double target = 4.0 * kPi / 3.0; // sigma_3 / 3
  std::vector<LimitRow> rows;
  rows.reserve(s_values.size());
  for (double s : s_values) {
    KernelSpec ks;
    ks.family = Family::riesz;
    ks.s = s;
    ks.a = 1.0;
    const RadialProfile prof = make_kernel(ks);
    const RadialSpectrum sp = radial_ft(prof, ft);
    const VectorField Gs = nonlocal_gradient_spectral(u, sp);
    double worst = 0.0;
    for (int j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < Gs.comp[j].size(); ++i) {
        const double dev = (1.0 - s) * Gs.comp[j][i] / (2.0 + s) -
                           target * grad.comp[j][i];
        worst = std::max(worst, std::abs(dev));
      }
    rows.push_back({s, worst / gmax});
  }
  return rows;
}

double periodization_bound(const RadialProfile& g, double L, double u_l1,
                           double u_radius, double offset) {
  if (!(L - u_radius - offset > 0.0))
    fail_arg("periodization bound needs L > u_radius + offset");
  double total = 0.0;
  for (int k = 1; k <= 10000; ++k) {
    const double dist = k * L - u_radius - offset;
    const double count = 24.0 * double(k) * double(k) + 2.0;
    const double term = count * u_l1 * std::abs(g.dg(dist));
    total += term;
    if (term == 0.0 || term < 1e-18 * total) break;
  }
  return total;
}

void write_snapshot(const ScalarField& u, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_arg("cannot open snapshot path " + path);
  const std::int32_t n = u.grid.N;
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&u.grid.L), sizeof u.grid.L);
  out.write(reinterpret_cast<const char*>(u.v.data()),
            std::streamsize(u.v.size() * sizeof(double)));
  if (!out) fail_arg("snapshot write failed for " + path);
}

ScalarField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_arg("cannot open snapshot path " + path);
  std::int32_t n = 0;
  double L = 0.0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&L), sizeof L);
  if (!in) fail_arg("snapshot header truncated in " + path);
  ScalarField u{Grid3(n, L)};
  in.read(reinterpret_cast<char*>(u.v.data()),
          std::streamsize(u.v.size() * sizeof(double)));
  if (!in) fail_arg("snapshot payload truncated in " + path);
  return u;
}

void write_axis_probes(const ScalarField& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_arg("cannot open probe path " + path);
  out << "axis,t,value\n";
  out.precision(17);
  const int c = u.grid.N / 2;
  for (int axis = 0; axis < 3; ++axis)
    for (int i = 0; i < u.grid.N; ++i) {
      const int ix = axis == 0 ? i : c;
      const int iy = axis == 1 ? i : c;
      const int iz = axis == 2 ? i : c;
      out << axis << ',' << u.grid.coord(i) << ',' << u.at(ix, iy, iz) << '\n';
    }
}

} // namespace nlgrad
