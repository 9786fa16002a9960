#pragma once

// Special-function constants used throughout the kernel / transform pipeline:
// the Gamma function, sphere areas, the radial Fourier power-law coefficient
// c_alpha, its log-form replacement at the excluded even-integer orders, and
// the closed-form amplitude of the inverse kernel for the pure power-law case.

namespace nlgrad {

// Gamma(x) for real x in [-170, 170], poles excluded.
// Relative accuracy ~1e-13 away from poles; throws std::domain_error at
// nonpositive integers.
double gamma_fn(double x);

// Surface measure of the unit sphere S^{d-1} in R^d: 2 pi^{d/2} / Gamma(d/2).
double sphere_area(int d);

// Coefficient of the transform pair  |x|^{-(d-alpha)}  <->  c_alpha |xi|^{-alpha}
// (unitary convention, exponent -2 pi i x.xi):
//   c_alpha = pi^{d/2-alpha} Gamma(alpha/2) / Gamma((d-alpha)/2).
// Requires alpha < d and alpha not in {0, -2, -4, ...}; at those orders the
// pair degenerates and log_coeffs supplies the logarithmic form instead.
double c_alpha(int d, double alpha);

// Logarithmic transform coefficients at the excluded order alpha = -k, k = 2*ell:
// the transform of |x|^{-(d+k)} behaves like (-a_k log|xi| + lambda_k) |xi|^k.
//   a_k      = (-1)^{k/2} 2 pi^{k+d/2} / (Gamma((d+k)/2) (k/2)!)   (closed form)
//   lambda_k = d/dalpha [ (alpha+k) c_alpha ] at alpha = -k          (numeric limit)
// lambda_k uses fourth-order difference quotients with Richardson extrapolation;
// two step sizes must agree to 1e-6 relative or a std::runtime_error is thrown.
struct LogPowerCoeffs {
  int k;            // even order, k = 2*ell
  double a_k;       // log-term coefficient
  double lambda_k;  // constant-term coefficient
};
LogPowerCoeffs log_coeffs(int d, int ell);

// Normalization constant of the fractional-gradient inversion pair,
//   K(s,d) = 1/(sigma_d pi^{d/2}) *
//            Gamma((d+1+s)/2) Gamma((d+1-s)/2) /
//            (Gamma(d/2) Gamma((3-s)/2) Gamma((s+1)/2)),
// valid for 0 < s <= 1.  K(1,3) = 3/(16 pi^2).
double k_sd(double s, int d);

// Amplitude A = K(s,d) (1-s) of the inverse kernel V(x) = A x / |x|^{d-s+1}
// for the normalized power-law kernel of order s.
double riesz_amplitude(double s, int d);

}  // namespace nlgrad
