#pragma once

#include <string>
#include <vector>

#include "nlgrad/kernel.hpp"

// Radial Fourier transform of kernel profiles in d = 3 and certification of
// the spectrum's asymptotic laws.  For a radial g the transform is itself
// radial and reduces to the one-dimensional sine integral
//
//   ghat(xi) = (2/xi) int_0^inf g(rho) rho sin(2 pi rho xi) drho,
//
// which the evaluator assembles from three exact-envelope pieces: the head
// power law via generalized Fresnel integrals, the tabulated transition
// region via Filon cells, and the tail power law via Fresnel tail integrals
// (an arch-summation fallback covers profiles without a declared tail law).

namespace nlgrad {

enum class HeadKind { power, log_form, finite };

// Small-xi behaviour tag.  power:    ghat ~ coef * xi^{-exponent}
//                          log_form: ghat ~ (-log_A log xi + log_lambda) * xi^{-exponent}
//                          finite:   ghat ~ limit + corr_coef * xi^{corr_exponent}
struct SpectrumHead {
  HeadKind kind = HeadKind::finite;
  double coef = 0.0;
  double exponent = 0.0;
  double log_A = 0.0;
  double log_lambda = 0.0;
  double limit = 0.0;
  double corr_coef = 0.0;
  double corr_exponent = 0.0;
};

// Large-xi behaviour tag: ghat ~ coef * xi^{-exponent}.  Driven by the
// profile's head law (only the short-range singularity survives at high
// frequency); unset when the profile declares no head power law.
struct SpectrumTail {
  bool set = false;
  double coef = 0.0;
  double exponent = 0.0;
};

struct FtOptions {
  double xi_min = 1e-3;
  double xi_max = 1e3;
  int n = 2048;         // log-spaced frequency grid size
  int mid_cells = 2048; // Filon cells across the tabulated transition region
  int threads = 1;
};

struct RadialSpectrum {
  int d = 3;
  std::vector<double> xi;
  std::vector<double> ghat;
  std::vector<char> ok; // per-point quadrature convergence flag
  bool all_ok = true;
  SpectrumHead head;
  SpectrumTail tail;
  double min_value = 0.0; // grid minimum of ghat and where it sits
  double argmin = 0.0;
  // Two-column text export (xi, ghat) for plotting.
  void write_table(const std::string& path) const;
};

// Single-point evaluation; the workhorse behind radial_ft and the inversion
// integrands.  Requires head.exponent < d when a head law is declared and
// tail.exponent > 1 for a non-compact tail law.
double radial_ft_at(const RadialProfile& prof, double xi, int mid_cells = 2048);

// Transform on a log-spaced grid plus asymptotic tags.  The finite-kind head
// tag carries the zero-frequency limit (the profile's mass) and the quadratic
// correction coefficient -(2 pi^2 / 3) * second moment when the tail is
// integrable enough to support them.
RadialSpectrum radial_ft(const RadialProfile& prof, const FtOptions& opt = {});

// Closed-form transform of the pure power envelope rho^{-(d-alpha)}:
// power form c_alpha(d, alpha) xi^{-alpha} away from the excluded orders,
// logarithmic form (-A log xi + lambda) xi^{-alpha} at alpha in {0,-2,-4,...}.
// Requires alpha < d; alpha = 0 only in the log branch.
struct HomogeneousTerm {
  bool log_form = false;
  double coef = 0.0;
  double exponent = 0.0; // decay order alpha (power and log form alike)
  double log_A = 0.0;
  double log_lambda = 0.0;
  double eval(double xi) const;
};
HomogeneousTerm homogeneous_ft(int d, double alpha);

// Checks the computed spectrum against its declared head/tail tags: log-log
// slope fits over the outermost decades within 0.05 of the predicted order,
// the predicted leading term dominating the remainder by a factor >= 10 at
// the grid ends, and the relative remainder shrinking toward the ends.  The
// finite head kind instead fits the correction coefficient against the tag.
// Conclusive only when the grid spans >= 4 decades on each side of xi = 1.
struct AsymptoticsReport {
  bool conclusive = false;
  bool head_pass = false;
  bool tail_pass = false;
  double head_order_fit = 0.0; // fitted decay order (or corr coef, finite kind)
  double head_order_want = 0.0;
  double tail_order_fit = 0.0;
  double tail_order_want = 0.0;
  double head_rel_remainder = 0.0; // |ghat - lead| / lead at the grid ends
  double tail_rel_remainder = 0.0;
  std::string note;
};
AsymptoticsReport verify_asymptotics(const RadialSpectrum& sp);

// Grid scan for strict positivity of the spectrum.
struct PositivityReport {
  bool positive = false;
  double min_value = 0.0;
  double argmin = 0.0;
};
PositivityReport check_positivity(const RadialSpectrum& sp);

}  // namespace nlgrad
