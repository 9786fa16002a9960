#include "nlgrad/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nlgrad/kernel.hpp"
#include "nlgrad/oscint.hpp"
#include "nlgrad/special.hpp"

namespace nlgrad {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// C-infinity step: 0 for w <= 0, 1 for w >= 1.
double smooth_step(double w) {
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  const double fa = std::exp(-1.0 / w);
  const double fb = std::exp(-1.0 / (1.0 - w));
  return fa / (fa + fb);
}

// 1 below lo, 0 above 2*lo, smooth in log xi.
double cutoff_down(double xi, double lo) {
  return 1.0 - smooth_step(std::log(xi / lo) / std::log(2.0));
}

double head_sum(const std::vector<PowerTerm>& terms, double xi) {
  double s = 0.0;
  for (const auto& t : terms) s += t.coef * std::pow(xi, t.exponent);
  return s;
}

// int_0^{xi0} (sum A xi^e) xi sin(2 pi r xi) dxi via the Fresnel moments.
double head_moment_sin(const std::vector<PowerTerm>& terms, double xi0,
                       double r) {
  const double c = kTwoPi * r;
  const double U = c * xi0;
  double acc = 0.0;
  for (const auto& t : terms)
    acc += t.coef * std::pow(c, -(t.exponent + 2.0)) *
           fresnel_sin(t.exponent + 1.0, U);
  return acc;
}

// int_0^{xi0} (sum A xi^e) xi^2 cos(2 pi r xi) dxi.
double head_moment_cos(const std::vector<PowerTerm>& terms, double xi0,
                       double r) {
  const double c = kTwoPi * r;
  const double U = c * xi0;
  double acc = 0.0;
  for (const auto& t : terms)
    acc += t.coef * std::pow(c, -(t.exponent + 3.0)) *
           fresnel_cos(t.exponent + 2.0, U);
  return acc;
}

}  // namespace

SpectralSymbol build_symbol(const RadialSpectrum& spectrum, double gamma,
                            double xi1, double xi2) {
  const int d = spectrum.d;
  if (spectrum.xi.size() < 8)
    throw std::invalid_argument("build_symbol: spectrum grid too small");
  if (!(gamma > 0.0) || gamma >= static_cast<double>(d))
    throw std::domain_error("build_symbol: gamma must lie in (0, d)");
  if (!(xi1 > 0.0) || !(xi2 > 0.0))
    throw std::invalid_argument("build_symbol: cutoffs must be positive");
  if (!(spectrum.min_value > 0.0))
    throw std::domain_error(
        "build_symbol: spectrum is not strictly positive; no positive symbol "
        "exists");
  if (!spectrum.tail.set)
    throw std::domain_error("build_symbol: spectrum carries no tail law tag");
  const double alpha = spectrum.tail.exponent;
  if (!(alpha > 0.0 && alpha < gamma))
    throw std::domain_error(
        "build_symbol: tail order must satisfy 0 < alpha < gamma");
  if (spectrum.head.kind == HeadKind::log_form)
    throw std::domain_error(
        "build_symbol: logarithmic head laws are not supported");

  SpectralSymbol sym;
  sym.d = d;
  sym.gamma = gamma;
  sym.c_gamma = c_alpha(d, gamma);
  sym.xi = spectrum.xi;
  sym.xi1 = xi1;
  sym.xi2 = xi2;
  const std::size_t n = sym.xi.size();
  sym.H.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    sym.H[i] = sym.c_gamma / (std::pow(sym.xi[i], gamma) * spectrum.ghat[i]);

  sym.lead_coef = sym.c_gamma / spectrum.tail.coef;
  sym.lead_decay = gamma - alpha;

  if (spectrum.head.kind == HeadKind::power) {
    // ghat ~ C xi^{-beta} (1 + O(xi^beta)): the next order below the grid is
    // a constant mass-defect term, already ~1e-3 relative at xi = 1e-4.
    const double A = sym.c_gamma / spectrum.head.coef;
    const double beta = spectrum.head.exponent;
    sym.head_model.push_back({A, beta - gamma});
  } else {
    const double M = spectrum.head.limit;
    if (!(M > 0.0) || !std::isfinite(M))
      throw std::domain_error(
          "build_symbol: head limit must be positive and finite");
    sym.head_model.push_back({sym.c_gamma / M, -gamma});
    if (spectrum.head.corr_coef != 0.0)
      sym.head_model.push_back(
          {-sym.c_gamma * spectrum.head.corr_coef / (M * M),
           -gamma + spectrum.head.corr_exponent});
  }
  sym.head_model_mismatch =
      std::abs(head_sum(sym.head_model, sym.xi.front()) - sym.H.front()) /
      sym.H.front();

  sym.H1.resize(n);
  sym.H2.resize(n);
  sym.H3.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p1 = cutoff_down(sym.xi[i], xi1);
    const double t2 = 1.0 - cutoff_down(sym.xi[i], xi2);
    sym.H1[i] = sym.H[i] * p1;
    sym.H2[i] = sym.H[i] * t2;
    sym.H3[i] = sym.H[i] - sym.H1[i] - sym.H2[i];
  }
  return sym;
}

double InversionKernel::omega_at(double r) const {
  if (!(r > 0.0)) throw std::domain_error("omega_at: rho must be positive");
  const double c = kTwoPi * r;
  double acc = head_moment_sin(head_terms_, qxi_.front(), r);
  for (std::size_t i = 0; i + 1 < qxi_.size(); ++i)
    acc += filon_sin_cell(qxi_[i], qxi_[i + 1], resid_[i] * qxi_[i],
                          resid_[i + 1] * qxi_[i + 1], c);
  return closed_coef * std::pow(r, -closed_decay) + (2.0 / r) * acc;
}

double InversionKernel::domega_at(double r) const {
  if (!(r > 0.0)) throw std::domain_error("domega_at: rho must be positive");
  const double c = kTwoPi * r;
  double sacc = head_moment_sin(head_terms_, qxi_.front(), r);
  double cacc = head_moment_cos(head_terms_, qxi_.front(), r);
  for (std::size_t i = 0; i + 1 < qxi_.size(); ++i) {
    const double x0 = qxi_[i], x1 = qxi_[i + 1];
    sacc += filon_sin_cell(x0, x1, resid_[i] * x0, resid_[i + 1] * x1, c);
    cacc += filon_cos_cell(x0, x1, resid_[i] * x0 * x0,
                           resid_[i + 1] * x1 * x1, c);
  }
  const double om_num = (2.0 / r) * sacc;
  const double dnum = -om_num / r + (2.0 / r) * kTwoPi * cacc;
  return -closed_decay * closed_coef * std::pow(r, -closed_decay - 1.0) + dnum;
}

double InversionKernel::v_at(double r) const {
  return -domega_at(r) / (sphere_area(d) * (d - 2));
}

InversionKernel invert_symbol(const SpectralSymbol& symbol, int d) {
  if (d != 3 || symbol.d != 3)
    throw std::domain_error("invert_symbol: only d = 3 is supported");
  if (symbol.xi.size() < 8)
    throw std::invalid_argument("invert_symbol: symbol grid too small");
  // lead_decay in (1, 2) keeps the closed inverse integrable against rho
  // (needed by the convolution reduction) and short of the head order.
  if (!(symbol.lead_decay > 1.0 && symbol.lead_decay < 2.0))
    throw std::domain_error(
        "invert_symbol: gamma - alpha must lie in (1, 2)");

  InversionKernel K;
  K.d = 3;
  K.qxi_ = symbol.xi;
  const std::size_t n = K.qxi_.size();
  K.resid_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    K.resid_[i] = symbol.H[i] -
                  symbol.lead_coef * std::pow(K.qxi_[i], -symbol.lead_decay);
  K.head_terms_ = symbol.head_model;
  K.head_terms_.push_back({-symbol.lead_coef, -symbol.lead_decay});
  K.closed_coef = symbol.lead_coef / c_alpha(3, symbol.lead_decay);
  K.closed_decay = 3.0 - symbol.lead_decay;

  const int per_decade = 64;
  const int m = 4 * per_decade + 1;
  K.rho.resize(m);
  K.omega.resize(m);
  K.domega.resize(m);
  K.V.resize(m);
  const double denom = sphere_area(3) * 1.0;
  for (int j = 0; j < m; ++j) {
    const double r = std::pow(10.0, -2.0 + static_cast<double>(j) / per_decade);
    K.rho[j] = r;
    K.omega[j] = K.omega_at(r);
    K.domega[j] = K.domega_at(r);
    K.V[j] = -K.domega[j] / denom;
  }

  K.omega_positive = true;
  K.omega_decreasing = true;
  K.v_nonneg = true;
  double vmax = 0.0;
  for (int j = 0; j < m; ++j) vmax = std::max(vmax, std::abs(K.V[j]));
  for (int j = 0; j < m; ++j) {
    if (!(K.omega[j] > 0.0)) K.omega_positive = false;
    if (j > 0 && K.omega[j] > K.omega[j - 1] * (1.0 + 1e-10))
      K.omega_decreasing = false;
    if (K.V[j] < -1e-12 * vmax) K.v_nonneg = false;
  }
  K.fit = decay_regression(K);
  return K;
}

DecayFit decay_regression(const InversionKernel& kernel) {
  DecayFit f;
  auto window_fit = [&kernel](double lo, double hi, double* slope,
                              double* r2) {
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < kernel.rho.size(); ++j) {
      const double r = kernel.rho[j];
      if (r < lo * 0.999999 || r > hi * 1.000001) continue;
      if (!(kernel.V[j] > 0.0)) continue;
      lx.push_back(std::log(r));
      ly.push_back(std::log(kernel.V[j]));
    }
    if (lx.size() < 8) {
      *slope = 0.0;
      *r2 = 0.0;
      return;
    }
    const LineFit lf = fit_line(lx, ly);
    *slope = lf.slope;
    *r2 = lf.r2;
  };
  window_fit(1e-2, 3e-1, &f.inner_slope, &f.inner_r2);
  window_fit(3.0, 1e2, &f.outer_slope, &f.outer_r2);
  f.reliable = f.inner_r2 >= 0.99 && f.outer_r2 >= 0.99;
  return f;
}

ConvolutionReport verify_convolution_identity(const InversionKernel& kernel,
                                              const RadialProfile& profile) {
  if (profile.d() != 3 || kernel.d != 3)
    throw std::domain_error(
        "verify_convolution_identity: only d = 3 is supported");
  const std::vector<double> probes = {0.5, 1.0, 2.0, 5.0};
  const double sigma_lo = 1e-6;
  double sigma_hi = 1e4;
  if (profile.tail().compact) sigma_hi = profile.tail().valid_from;

  // Cumulative table of F(tau) = int_0^tau u omega(u) du; below tau0 the
  // closed-form head term dominates and integrates analytically.
  const double tau0 = 1e-6;
  const double tau_max = (sigma_hi + probes.back()) * 1.2;
  const double cd = kernel.closed_decay;
  const int cells =
      static_cast<int>(std::ceil(60.0 * std::log10(tau_max / tau0)));
  std::vector<double> lF(static_cast<std::size_t>(cells) + 1);
  const double l0 = std::log(tau0);
  const double dl = (std::log(tau_max) - l0) / cells;
  double F = kernel.closed_coef * std::pow(tau0, 2.0 - cd) / (2.0 - cd);
  if (!(F > 0.0))
    throw std::runtime_error(
        "verify_convolution_identity: omega head term must be positive");
  lF[0] = std::log(F);
  for (int i = 0; i < cells; ++i) {
    const double a = std::exp(l0 + i * dl);
    const double b = std::exp(l0 + (i + 1) * dl);
    F += gl16([&kernel](double u) { return u * kernel.omega_at(u); }, a, b);
    if (!(F > 0.0))
      throw std::runtime_error(
          "verify_convolution_identity: omega must stay positive");
    lF[static_cast<std::size_t>(i) + 1] = std::log(F);
  }
  auto F_at = [&](double tau) -> double {
    if (tau <= 0.0) return 0.0;
    if (tau <= tau0)
      return kernel.closed_coef * std::pow(tau, 2.0 - cd) / (2.0 - cd);
    double t = (std::log(tau) - l0) / dl;
    if (t > cells) t = cells;
    const int i = std::min(static_cast<int>(t), cells - 1);
    const double w = t - i;
    return std::exp(lF[i] * (1.0 - w) + lF[static_cast<std::size_t>(i) + 1] * w);
  };

  ConvolutionReport rep;
  rep.all_converged = true;
  for (const double p : probes) {
    auto f = [&](double s) {
      return s * profile.g(s) * (F_at(p + s) - F_at(std::abs(p - s)));
    };
    auto conv_at = [&](int panels) {
      double I;
      if (p < sigma_hi)
        I = gl_log_panels(f, sigma_lo, p, panels) +
            gl_log_panels(f, p, sigma_hi, (4 * panels) / 3);
      else
        I = gl_log_panels(f, sigma_lo, sigma_hi, 2 * panels);
      return (kTwoPi / p) * I;
    };
    ConvolutionProbe pr;
    pr.rho = p;
    const double v1 = conv_at(24);
    pr.value = conv_at(48);
    pr.expected = std::pow(p, -1.0);
    pr.rel_dev = std::abs(pr.value - pr.expected) / pr.expected;
    pr.converged = std::abs(pr.value - v1) <= 1e-3 * std::abs(pr.value);
    rep.max_rel_dev = std::max(rep.max_rel_dev, pr.rel_dev);
    rep.all_converged = rep.all_converged && pr.converged;
    rep.probes.push_back(pr);
  }
  return rep;
}

double omega_mollified(const SpectralSymbol& symbol, double rho, double eps) {
  if (!(rho > 0.0) || !(eps > 0.0))
    throw std::domain_error("omega_mollified: rho and eps must be positive");
  const double c = kTwoPi * rho;
  // Below the grid the damping factor is within 1e-12 of 1; use the
  // undamped Fresnel moments of the full head model.
  double acc = head_moment_sin(symbol.head_model, symbol.xi.front(), rho);
  for (std::size_t i = 0; i + 1 < symbol.xi.size(); ++i) {
    const double x0 = symbol.xi[i], x1 = symbol.xi[i + 1];
    const double e0 = symbol.H[i] * std::exp(-eps * x0 * x0) * x0;
    const double e1 = symbol.H[i + 1] * std::exp(-eps * x1 * x1) * x1;
    acc += filon_sin_cell(x0, x1, e0, e1, c);
  }
  return (2.0 / rho) * acc;
}

}  // namespace nlgrad
