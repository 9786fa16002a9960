#pragma once
// Inversion kernel construction: from a positive radial spectrum ghat build
// the spectral symbol H(xi) = c_gamma / (xi^gamma ghat(xi)), split it into
// head / tail / compact-middle parts with smooth cutoffs, and invert it to
// the radial profile omega(rho) whose gradient gives the vector kernel V:
//
//   omega = inverse transform of H,   |V|(rho) = -omega'(rho) / (sigma_d (d-2))
//
// The tail of H carries a homogeneous leading term L xi^{-delta} inherited
// from the spectrum's tail law; that term is inverted in closed form through
// the duality  inverse of xi^{-delta}  =  rho^{-(d-delta)} / c_delta,  and
// only the subtracted residual goes through numeric quadrature.  This keeps
// every numeric integrand absolutely integrable.
//
// Only d = 3 is supported (the quadrature backend reduces to sine integrals).

#include <cstddef>
#include <string>
#include <vector>

#include "nlgrad/radial_fourier.hpp"

namespace nlgrad {

// One power contribution  coef * xi^exponent  (exponent signed as written).
struct PowerTerm {
    double coef = 0.0;
    double exponent = 0.0;
};

// Sampled symbol H on the spectrum grid plus everything invert_symbol needs:
// the smooth three-way split, the homogeneous tail term, and a two-term
// power model for H below the first grid point.
struct SpectralSymbol {
    int d = 3;
    double gamma = 2.0;
    double c_gamma = 0.0;             // c_alpha(d, gamma)
    std::vector<double> xi;
    std::vector<double> H;            // c_gamma / (xi^gamma ghat)
    std::vector<double> H1, H2, H3;   // head, tail, compact middle; sum == H
    double xi1 = 0.0;                 // phi1 falls from 1 to 0 over [xi1, 2 xi1]
    double xi2 = 0.0;                 // 1 - phi2 rises from 0 to 1 over [xi2, 2 xi2]
    double lead_coef = 0.0;           // H ~ lead_coef * xi^{-lead_decay} at infinity
    double lead_decay = 0.0;
    std::vector<PowerTerm> head_model;   // H on (0, xi.front()]
    double head_model_mismatch = 0.0; // relative gap model vs sample at xi.front()
};

// Precondition: spectrum certified positive, tail tag set with exponent in
// (0, gamma), gamma < d.  Throws std::domain_error otherwise (in particular
// for sign-changing spectra, where no positive symbol exists).
SpectralSymbol build_symbol(const RadialSpectrum& spectrum, double gamma = 2.0,
                            double xi1 = 0.5, double xi2 = 2.0);

// Log-log power fits of |V| over the inner and outer decades of the grid.
struct DecayFit {
    double inner_slope = 0.0, inner_r2 = 0.0;   // fit over [1e-2, 3e-1]
    double outer_slope = 0.0, outer_r2 = 0.0;   // fit over [3, 1e2]
    bool reliable = false;                      // both r^2 >= 0.99
};

// omega, omega', and |V| on a log grid, with the closed-form head term kept
// symbolically so the kernel can be evaluated at any radius.
struct InversionKernel {
    int d = 3;
    std::vector<double> rho;
    std::vector<double> omega;
    std::vector<double> domega;
    std::vector<double> V;            // |V| = -omega' / (sigma_d (d-2))
    double closed_coef = 0.0;         // closed-form part: closed_coef * rho^{-closed_decay}
    double closed_decay = 0.0;
    bool omega_positive = false;
    bool omega_decreasing = false;
    bool v_nonneg = false;
    DecayFit fit;

    double omega_at(double rho) const;
    double domega_at(double rho) const;
    double v_at(double rho) const;

  private:
    friend InversionKernel invert_symbol(const SpectralSymbol&, int);
    std::vector<double> qxi_;         // quadrature grid (copy of symbol grid)
    std::vector<double> resid_;       // H - lead on qxi_
    std::vector<PowerTerm> head_terms_;  // residual model below qxi_.front()
};

// Grid defaults: rho in [1e-2, 1e2], 64 points per decade.
InversionKernel invert_symbol(const SpectralSymbol& symbol, int d = 3);

DecayFit decay_regression(const InversionKernel& kernel);

// Real-space check of  (omega * g)(rho) = rho^{-(d-2)}  via the 1-D radial
// reduction of the convolution; probes at a fixed set of radii.
struct ConvolutionProbe {
    double rho = 0.0;
    double value = 0.0;       // computed (omega * g)(rho)
    double expected = 0.0;    // rho^{-(d-2)}
    double rel_dev = 0.0;
    bool converged = false;   // doubling the panel count moved the value < 1e-3
};

struct ConvolutionReport {
    std::vector<ConvolutionProbe> probes;
    double max_rel_dev = 0.0;
    bool all_converged = false;
};

ConvolutionReport verify_convolution_identity(const InversionKernel& kernel,
                                              const RadialProfile& profile);

// Mollified fallback: omega_eps = inverse transform of H e^{-eps xi^2},
// extrapolated to eps -> 0 with one Richardson step.  Cross-check only.
double omega_mollified(const SpectralSymbol& symbol, double rho, double eps);

}  // namespace nlgrad
