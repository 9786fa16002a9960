#include "nlgrad/oscint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlgrad/special.hpp"

namespace nlgrad {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 16-point Gauss-Legendre abscissae/weights on [-1, 1] (positive half).
constexpr double kGL16X[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr double kGL16W[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

}  // namespace

double gl16(const RealFn& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) {
    double dx = h * kGL16X[i];
    acc += kGL16W[i] * (f(c - dx) + f(c + dx));
  }
  return acc * h;
}

double gl_log_panels(const RealFn& f, double a, double b, int panels) {
  if (!(a > 0.0 && b > a)) throw std::invalid_argument("gl_log_panels: need 0 < a < b");
  double ratio = std::pow(b / a, 1.0 / panels);
  double acc = 0.0, lo = a;
  for (int i = 0; i < panels; ++i) {
    double hi = (i + 1 == panels) ? b : lo * ratio;
    acc += gl16(f, lo, hi);
    lo = hi;
  }
  return acc;
}

double gl_uniform_panels(const RealFn& f, double a, double b, int panels) {
  double h = (b - a) / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) acc += gl16(f, a + i * h, a + (i + 1) * h);
  return acc;
}

namespace {

constexpr double kFresnelCrossover = 25.0;

// Series: int_0^U u^nu sin u du = sum_k (-1)^k U^{nu+2k+2} / ((2k+1)! (nu+2k+2))
// Accumulated in long double; the alternating terms peak near 2k+1 ~ U, so the
// crossover keeps the cancellation below ~1e9 ulps.
long double fresnel_sin_series(double nu, double U) {
  long double u2 = (long double)U * U;
  long double term = std::pow((long double)U, (long double)nu + 2.0L);  // k=0 numerator
  long double acc = 0.0L;
  for (int k = 0; k < 200; ++k) {
    long double denom = (long double)nu + 2.0L * k + 2.0L;
    acc += term / denom;
    term *= -u2 / ((2.0L * k + 2.0L) * (2.0L * k + 3.0L));
    if (std::abs((double)term) < 1e-22 * std::max(1.0, std::abs((double)acc))) break;
  }
  return acc;
}

long double fresnel_cos_series(double nu, double U) {
  long double u2 = (long double)U * U;
  long double term = std::pow((long double)U, (long double)nu + 1.0L);
  long double acc = 0.0L;
  for (int k = 0; k < 200; ++k) {
    long double denom = (long double)nu + 2.0L * k + 1.0L;
    acc += term / denom;
    term *= -u2 / ((2.0L * k + 1.0L) * (2.0L * k + 2.0L));
    if (std::abs((double)term) < 1e-22 * std::max(1.0, std::abs((double)acc))) break;
  }
  return acc;
}

// Entire part of the cosine integral: Cin(U) = int_0^U (1 - cos u)/u du.
long double cin_series(double U) {
  long double u2 = (long double)U * U;
  long double term = 0.5L * u2;  // k=1 numerator U^2/2!
  long double acc = 0.0L;
  for (int k = 1; k < 200; ++k) {
    acc += term / (2.0L * k);
    term *= -u2 / ((2.0L * k + 1.0L) * (2.0L * k + 2.0L));
    if (std::abs((double)term) < 1e-22 * std::max(1.0, std::abs((double)acc))) break;
  }
  return acc;
}

constexpr double kEulerGamma = 0.57721566490153286061;

// Asymptotic by-parts series for T(nu, U) = int_U^inf u^nu sin u du:
//   T(nu) = U^nu cos U - nu U^{nu-1} sin U - nu (nu-1) T(nu-2)
// truncated at the smallest term.
double fresnel_tail_asym(double nu, double U, bool sine) {
  double cu = std::cos(U), su = std::sin(U);
  double coef = 1.0, nuc = nu, acc = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 64; ++j) {
    double a, b;
    if (sine) {
      a = coef * std::pow(U, nuc) * cu;
      b = -coef * nuc * std::pow(U, nuc - 1.0) * su;
    } else {
      // int_U^inf u^nu cos u du = -U^nu sin U - nu U^{nu-1} cos U - nu(nu-1) T_cos(nu-2)
      a = -coef * std::pow(U, nuc) * su;
      b = -coef * nuc * std::pow(U, nuc - 1.0) * cu;
    }
    double mag = std::abs(a) + std::abs(b);
    if (mag > prev) break;  // optimal truncation
    acc += a + b;
    if (mag < 1e-17 * std::max(1.0, std::abs(acc))) break;
    prev = mag;
    coef *= -nuc * (nuc - 1.0);
    nuc -= 2.0;
  }
  return acc;
}

}  // namespace

double fresnel_sin_inf(double nu) {
  // Gamma(nu+1) sin(pi(nu+1)/2) = Gamma(nu+2) * [sin(pi z/2)/z],  z = nu+1;
  // the bracket is smooth through z = 0 where the value is pi/2.
  double z = nu + 1.0;
  double bracket = (std::abs(z) < 1e-12) ? 0.5 * kPi : std::sin(0.5 * kPi * z) / z;
  return gamma_fn(nu + 2.0) * bracket;
}

double fresnel_cos_inf(double nu) {
  return gamma_fn(nu + 1.0) * std::cos(0.5 * kPi * (nu + 1.0));
}

namespace {

// Tail integrals below the asymptotic crossover.  For nu <= -2 the head
// integral diverges, so the tail is raised by parts until the series base
// applies:
//   T_sin(nu) = -U^{nu+1} sin U/(nu+1) - T_cos(nu+1)/(nu+1)   (nu < -1)
//   T_cos(nu) = -U^{nu+1} cos U/(nu+1) + T_sin(nu+1)/(nu+1)   (nu < -1)
// with T_cos(-1) = -Ci(U).  Each step divides by |nu+1| >= 1, so no growth.
double tail_cos_small_u(double nu, double U);

double tail_sin_small_u(double nu, double U) {
  if (nu > -2.0) return fresnel_sin_inf(nu) - (double)fresnel_sin_series(nu, U);
  double np1 = nu + 1.0;
  return -std::pow(U, np1) * std::sin(U) / np1 - tail_cos_small_u(np1, U) / np1;
}

double tail_cos_small_u(double nu, double U) {
  if (nu > -1.0) return fresnel_cos_inf(nu) - (double)fresnel_cos_series(nu, U);
  if (std::abs(nu + 1.0) < 1e-9)
    return -(kEulerGamma + std::log(U) - (double)cin_series(U));
  double np1 = nu + 1.0;
  return -std::pow(U, np1) * std::cos(U) / np1 + tail_sin_small_u(np1, U) / np1;
}

}  // namespace

double fresnel_sin_tail(double nu, double U) {
  if (!(nu < 1.0)) throw std::domain_error("fresnel_sin_tail: requires nu < 1");
  if (!(U > 0.0)) throw std::domain_error("fresnel_sin_tail: requires U > 0");
  if (U >= kFresnelCrossover) return fresnel_tail_asym(nu, U, true);
  return tail_sin_small_u(nu, U);
}

double fresnel_sin(double nu, double U) {
  if (!(nu > -2.0)) throw std::domain_error("fresnel_sin: requires nu > -2");
  if (U <= 0.0) return 0.0;
  if (U < kFresnelCrossover) return (double)fresnel_sin_series(nu, U);
  return fresnel_sin_inf(nu) - fresnel_tail_asym(nu, U, true);
}

double fresnel_cos(double nu, double U) {
  if (!(nu > -1.0)) throw std::domain_error("fresnel_cos: requires nu > -1");
  if (U <= 0.0) return 0.0;
  if (U < kFresnelCrossover) return (double)fresnel_cos_series(nu, U);
  return fresnel_cos_inf(nu) - fresnel_tail_asym(nu, U, false);
}

double accelerate_alternating(const std::vector<double>& terms) {
  if (terms.empty()) return 0.0;
  // partial sums, then iterated averaging; the best estimate sits on the
  // deepest diagonal whose entries stopped changing
  std::vector<double> row(terms.size());
  double s = 0.0;
  for (size_t i = 0; i < terms.size(); ++i) {
    s += terms[i];
    row[i] = s;
  }
  double best = row.back();
  while (row.size() > 1) {
    for (size_t i = 0; i + 1 < row.size(); ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
    row.pop_back();
    best = row.back();
  }
  return best;
}

OscTail sin_tail_integral(const RealFn& f, double a, double freq, double rel_tol,
                          int max_arches) {
  OscTail out;
  double half = 0.5 / freq;  // half period of sin(2 pi freq rho)
  auto integrand = [&](double rho) { return f(rho) * std::sin(2.0 * kPi * freq * rho); };
  // first zero at or beyond a
  double k0 = std::ceil(a / half);
  double z = k0 * half;
  double lead = 0.0;
  if (z > a) lead = gl16(integrand, a, z);

  auto run = [&](int arches) {
    std::vector<double> terms;
    terms.reserve(arches);
    double lo = z;
    for (int i = 0; i < arches; ++i) {
      double hi = lo + half;
      terms.push_back(gl16(integrand, lo, hi));
      lo = hi;
    }
    return accelerate_alternating(terms);
  };

  int n = std::min(max_arches / 2, 64);
  double v1 = run(n);
  double v2 = run(2 * n);
  out.value = lead + v2;
  double scale = std::max(std::abs(out.value), 1e-300);
  out.converged = std::abs(v2 - v1) <= rel_tol * scale + 1e-14;
  return out;
}

namespace {

// w1(z) = (sin z - z cos z), series for small z to avoid cancellation
double sin_minus_zcos(double z) {
  if (std::abs(z) > 0.1) return std::sin(z) - z * std::cos(z);
  double z2 = z * z;
  // z^3/3 - z^5/30 + z^7/840 - z^9/45360
  return z * z2 * (1.0 / 3.0 + z2 * (-1.0 / 30.0 + z2 * (1.0 / 840.0 - z2 / 45360.0)));
}

double sinc(double z) {
  if (std::abs(z) > 1e-4) return std::sin(z) / z;
  double z2 = z * z;
  return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
}

}  // namespace

// Midpoint form: with f = fm + m u on u in [-h, h], xm the cell midpoint,
//   int f sin(omega x) dx = fm W0 sin(omega xm) + m W1 cos(omega xm)
//   int f cos(omega x) dx = fm W0 cos(omega xm) - m W1 sin(omega xm)
// where W0 = 2 sin(omega h)/omega and W1 = 2 (sin(omega h) - omega h cos(omega h))/omega^2.
double filon_sin_cell(double x0, double x1, double f0, double f1, double omega) {
  double h = 0.5 * (x1 - x0), xm = 0.5 * (x0 + x1);
  double fm = 0.5 * (f0 + f1), m = (f1 - f0) / (x1 - x0);
  double oh = omega * h;
  double w0 = 2.0 * h * sinc(oh);
  double w1 = (std::abs(omega) < 1e-300) ? 0.0 : 2.0 * sin_minus_zcos(oh) / (omega * omega);
  return fm * w0 * std::sin(omega * xm) + m * w1 * std::cos(omega * xm);
}

double filon_cos_cell(double x0, double x1, double f0, double f1, double omega) {
  double h = 0.5 * (x1 - x0), xm = 0.5 * (x0 + x1);
  double fm = 0.5 * (f0 + f1), m = (f1 - f0) / (x1 - x0);
  double oh = omega * h;
  double w0 = 2.0 * h * sinc(oh);
  double w1 = (std::abs(omega) < 1e-300) ? 0.0 : 2.0 * sin_minus_zcos(oh) / (omega * omega);
  return fm * w0 * std::cos(omega * xm) - m * w1 * std::sin(omega * xm);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need matching arrays, size >= 2");
  double n = (double)x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0, ybar = sy / n;
  for (size_t i = 0; i < x.size(); ++i) {
    double pred = fit.slope * x[i] + fit.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace nlgrad
