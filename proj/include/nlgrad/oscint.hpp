#pragma once

#include <functional>
#include <vector>

// Quadrature utilities shared by the radial transform and inversion code:
// fixed-order Gauss-Legendre panels, generalized Fresnel integrals
// (power-weighted sine/cosine moments), alternating-series acceleration for
// oscillatory tails, and Filon-type cell integrals that stay exact for a
// linear envelope at arbitrary oscillation frequency.

namespace nlgrad {

using RealFn = std::function<double(double)>;

// 16-point Gauss-Legendre on [a, b].
double gl16(const RealFn& f, double a, double b);

// Gauss-Legendre over n geometrically spaced panels on [a, b], a > 0.
double gl_log_panels(const RealFn& f, double a, double b, int panels);

// Gauss-Legendre over n uniform panels on [a, b].
double gl_uniform_panels(const RealFn& f, double a, double b, int panels);

// fresnel_sin(nu, U) = int_0^U u^nu sin(u) du   (nu > -2)
// fresnel_cos(nu, U) = int_0^U u^nu cos(u) du   (nu > -1)
// Power series below the crossover, regularized limit minus an asymptotic
// integration-by-parts tail above it.
double fresnel_sin(double nu, double U);
double fresnel_cos(double nu, double U);

// Regularized full-line limits:
//   fresnel_sin_inf(nu) = Gamma(nu+1) sin(pi (nu+1)/2), continued through nu = -1
//   fresnel_cos_inf(nu) = Gamma(nu+1) cos(pi (nu+1)/2)
double fresnel_sin_inf(double nu);
double fresnel_cos_inf(double nu);

// tail integral int_U^inf u^nu sin(u) du for nu < 1, any U > 0: asymptotic
// by-parts series for large U; below the crossover, nu > -2 goes through the
// full-line limit minus the head series and nu <= -2 is raised by parts
// (losing precision only within ~1e-6 of the nu = -2 pole).
double fresnel_sin_tail(double nu, double U);

// Iterated-averaging (van Wijngaarden) acceleration of sum_k terms[k] where
// the terms alternate in sign.  Returns the accelerated sum.
double accelerate_alternating(const std::vector<double>& terms);

// int_a^inf f(rho) sin(2 pi freq rho) drho for a smooth envelope f that decays
// to zero.  Integrates arch by arch between consecutive zeros of the sine and
// accelerates the resulting alternating series; `converged` reports agreement
// under doubling of the arch count.
struct OscTail {
  double value = 0.0;
  bool converged = false;
};
OscTail sin_tail_integral(const RealFn& f, double a, double freq,
                          double rel_tol = 1e-9, int max_arches = 256);

// Filon cell integrals with a linear envelope interpolating (x0,f0)-(x1,f1):
//   filon_sin_cell = int_{x0}^{x1} f(x) sin(omega x) dx
//   filon_cos_cell = int_{x0}^{x1} f(x) cos(omega x) dx
// Stable for omega*(x1-x0) both large and small.
double filon_sin_cell(double x0, double x1, double f0, double f1, double omega);
double filon_cos_cell(double x0, double x1, double f0, double f1, double omega);

// Least-squares line fit y = slope*x + intercept with coefficient of
// determination; used for power-law decay fits in log-log coordinates.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nlgrad
