#include "nlgrad/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>

#include "nlgrad/oscint.hpp"
#include "nlgrad/special.hpp"

namespace nlgrad {
namespace {

[[noreturn]] void fail(const char* fmt, double x = 0, double y = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, x, y);
  throw std::invalid_argument(buf);
}

// C-inf step: 0 for u <= 0, 1 for u >= 1.
double step_up(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double f = std::exp(-1.0 / u), fc = std::exp(-1.0 / (1.0 - u));
  return f / (f + fc);
}

// C-inf bump supported on [mu-w, mu+w], peak value e^{-4}.
double bump_fn(double x, double mu, double w) {
  double u = (x - (mu - w)) / (2.0 * w);
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return std::exp(-1.0 / (u * (1.0 - u)));
}

// Cubic Hermite on a uniform grid: values y with derivatives dy.
double hermite_eval(const std::vector<double>& y, const std::vector<double>& dy,
                    double x0, double h, int n, double x) {
  int j = (int)((x - x0) / h);
  j = std::max(0, std::min(j, n - 1));
  double t = (x - (x0 + j * h)) / h;
  double omt = 1.0 - t, t2 = t * t;
  double h00 = (1.0 + 2.0 * t) * omt * omt;
  double h10 = t * omt * omt;
  double h01 = t2 * (3.0 - 2.0 * t);
  double h11 = t2 * (t - 1.0);
  return h00 * y[j] + h * h10 * dy[j] + h01 * y[j + 1] + h * h11 * dy[j + 1];
}

// Convex C-inf bridge for p on [r,R]: p'' is prescribed as a nonnegative
// combination of the head/tail curvatures (smoothly windowed at the
// junctions) plus two interior bumps whose coefficients solve the discrete
// two-moment system matching (p, p') at both ends.  The second-moment
// weights are the exact composition of two trapezoid passes, so the
// integrated chain hits the endpoint targets at machine precision.
struct Transition {
  double r = 0, R = 0, h = 0;
  int n = 0; // intervals
  double endpoint_residual = 0.0;
  std::vector<double> w, dp, p; // p'', p', p at the n+1 uniform nodes

  double eval_p(double x) const { return hermite_eval(p, dp, r, h, n, x); }
  double eval_dp(double x) const { return hermite_eval(dp, w, r, h, n, x); }
};

std::shared_ptr<Transition> build_transition(const KernelSpec& sp) {
  const int M = 4000;
  const double d = sp.d, s = sp.s, a = sp.a, r = sp.r, R = sp.R, b = sp.b;
  const double Delta = R - r, h = Delta / M;
  const bool power_tail = sp.family == Family::intermediate;

  auto tr = std::make_shared<Transition>();
  tr->r = r;
  tr->R = R;
  tr->h = h;
  tr->n = M;

  std::vector<double> sig(M + 1);
  for (int i = 0; i <= M; ++i) sig[i] = r + h * i;

  const double p_r = a * std::pow(r, -s);
  const double dp_r = -s * a * std::pow(r, -s - 1.0);
  auto ph2 = [&](double x) { return s * (s + 1.0) * a * std::pow(x, -s - 2.0); };

  double e = 0.0, p_R = 0.0, dp_R = 0.0;
  if (power_tail) {
    e = sp.tail - d + 1.0; // p-space tail exponent
    p_R = b * std::pow(R, -e);
    dp_R = -e * b * std::pow(R, -e - 1.0);
  }
  auto pt2 = [&](double x) { return e * (e + 1.0) * b * std::pow(x, -e - 2.0); };

  const double T0 = dp_R - dp_r;
  const double T1 = p_R - p_r - dp_r * Delta;
  if (T0 <= 0.0)
    fail("kernel transition infeasible: tail slope %g must exceed head slope %g at the junctions",
         dp_R, dp_r);
  if (T1 <= 0.0) {
    if (sp.family == Family::local)
      fail("kernel transition infeasible: chord-slope condition s/r >= 1/(R-r) fails (s/r = %g < %g)",
           s / r, 1.0 / Delta);
    fail("kernel transition infeasible: chord-slope condition p(R)-p(r)-p'(r)(R-r) > 0 fails (got %g)",
         T1);
  }

  // discrete moment weights: m1 = trapezoid, m2 = exact composition weights
  // for int (R-sigma) w dsigma under two chained trapezoid integrations
  std::vector<double> m1(M + 1, h), m2(M + 1);
  m1[0] = m1[M] = h / 2.0;
  for (int i = 0; i <= M; ++i) m2[i] = h * (R - sig[i]);
  m2[0] = h / 2.0 * Delta - h * h / 4.0;
  m2[M] = h * h / 4.0;

  auto dot = [&](const std::vector<double>& wts, const std::vector<double>& f) {
    double acc = 0.0;
    for (int i = 0; i <= M; ++i) acc += wts[i] * f[i];
    return acc;
  };

  // adaptive junction windows: halve until the windowed head/tail curvature
  // consumes at most half of each moment budget
  double wS = Delta / 8.0;
  std::vector<double> base(M + 1);
  double B0 = 0.0, B1 = 0.0;
  bool base_ok = false;
  for (int it = 0; it < 60; ++it) {
    for (int i = 0; i <= M; ++i) {
      double v = step_up((r + wS - sig[i]) / wS) * ph2(sig[i]);
      if (power_tail) v += step_up((sig[i] - (R - wS)) / wS) * pt2(sig[i]);
      base[i] = v;
    }
    B0 = dot(m1, base);
    B1 = dot(m2, base);
    if (B0 <= T0 / 2.0 && B1 <= T1 / 2.0) {
      base_ok = true;
      break;
    }
    wS *= 0.5;
  }
  if (!base_ok) fail("kernel transition infeasible: junction windows exhaust the moment budget");

  const double T0p = T0 - B0, T1p = T1 - B1;
  if (T0p <= 0.0 || T1p <= 0.0)
    fail("kernel transition infeasible: junction curvature leaves no moment budget");
  const double cstar = T1p / T0p; // required centroid distance from R
  if (!(0.03 * Delta < cstar && cstar < 0.90 * Delta))
    fail("kernel transition infeasible: interior curvature centroid %g*Delta outside (0.03, 0.90)",
         cstar / Delta);

  const double lo = std::max(0.02 * Delta, 0.4 * cstar);
  const double hi = std::min(0.94 * Delta, 2.5 * cstar);
  const double mu2 = R - lo, w2 = std::min(0.8 * lo, 0.4 * (hi - lo));
  const double mu1 = R - hi;
  const double w1 = std::min({0.8 * (Delta - hi), 0.4 * (hi - lo), 0.25 * Delta});

  std::vector<double> f1(M + 1), f2(M + 1);
  for (int i = 0; i <= M; ++i) {
    f1[i] = bump_fn(sig[i], mu1, w1);
    f2[i] = bump_fn(sig[i], mu2, w2);
  }
  const double a11 = dot(m1, f1), a12 = dot(m1, f2);
  const double a21 = dot(m2, f1), a22 = dot(m2, f2);
  const double det = a11 * a22 - a12 * a21;
  if (std::abs(det) < 1e-300) fail("kernel transition infeasible: degenerate bump moment system");
  const double c1 = (T0p * a22 - T1p * a12) / det;
  const double c2 = (T1p * a11 - T0p * a21) / det;
  if (c1 < 0.0 || c2 < 0.0)
    fail("kernel transition infeasible: convex interpolation needs negative curvature (c1=%g, c2=%g)",
         c1, c2);

  tr->w.resize(M + 1);
  for (int i = 0; i <= M; ++i) tr->w[i] = base[i] + c1 * f1[i] + c2 * f2[i];

  tr->dp.resize(M + 1);
  tr->p.resize(M + 1);
  tr->dp[0] = dp_r;
  tr->p[0] = p_r;
  for (int i = 1; i <= M; ++i)
    tr->dp[i] = tr->dp[i - 1] + (tr->w[i - 1] + tr->w[i]) * h / 2.0;
  for (int i = 1; i <= M; ++i)
    tr->p[i] = tr->p[i - 1] + (tr->dp[i - 1] + tr->dp[i]) * h / 2.0;

  const double res_dp = std::abs(tr->dp[M] - dp_R) / std::max(1.0, std::abs(dp_R));
  const double res_p = std::abs(tr->p[M] - p_R) / std::max(1.0, std::abs(p_R));
  if (res_dp > 1e-10 || res_p > 1e-10)
    throw std::logic_error("kernel transition: moment system failed to close the endpoints");
  tr->endpoint_residual = std::max(res_dp, res_p);
  // pin the endpoints so local profiles vanish identically at R
  tr->dp[M] = dp_R;
  tr->p[M] = p_R;
  return tr;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::riesz: return "riesz";
    case Family::local: return "local";
    case Family::intermediate: return "intermediate";
    case Family::two_scale: return "two_scale";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "riesz") return Family::riesz;
  if (name == "local") return Family::local;
  if (name == "intermediate") return Family::intermediate;
  if (name == "two_scale") return Family::two_scale;
  throw std::invalid_argument("unknown kernel family: " + name);
}

void KernelSpec::validate() const {
  if (d < 2) fail("kernel spec: d must be >= 2 (got %g)", (double)d);
  if (!(s > 0.0 && s < 1.0)) fail("kernel spec: s must lie in (0,1) (got %g)", s);
  if (!(a > 0.0)) fail("kernel spec: a must be positive (got %g)", a);
  if (!(rho_min > 0.0 && rho_max > rho_min))
    fail("kernel spec: need 0 < rho_min < rho_max (got %g, %g)", rho_min, rho_max);
  if (table_n < 16) fail("kernel spec: table_n must be >= 16 (got %g)", (double)table_n);
  if (family == Family::riesz) return; // r, R, b, tail ignored
  if (!(r > 0.0 && R > r)) fail("kernel spec: need 0 < r < R (got r=%g, R=%g)", r, R);
  switch (family) {
    case Family::local:
      if (b != 0.0) fail("kernel spec: local family requires b = 0 (got %g)", b);
      break;
    case Family::intermediate:
      if (!(tail > (double)d))
        fail("kernel spec: intermediate family requires alpha_tail > d (got %g)", tail);
      if (!(b > 0.0)) fail("kernel spec: b must be positive (got %g)", b);
      break;
    case Family::two_scale:
      if (!(tail > 0.0 && tail < 1.0))
        fail("kernel spec: two_scale family requires t in (0,1) (got %g)", tail);
      if (!(b > 0.0)) fail("kernel spec: b must be positive (got %g)", b);
      if (!(blend_sharpness > 0.0))
        fail("kernel spec: blend_sharpness must be positive (got %g)", blend_sharpness);
      break;
    default:
      break;
  }
}

double RadialProfile::p(double rho) const {
  return std::pow(rho, spec_.d - 1) * g_(rho);
}

void RadialProfile::fill_table() {
  int n = spec_.table_n;
  trho_.resize(n);
  tg_.resize(n);
  double l0 = std::log(spec_.rho_min), l1 = std::log(spec_.rho_max);
  for (int i = 0; i < n; ++i) {
    trho_[i] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    tg_[i] = g_(trho_[i]);
  }
}

void RadialProfile::write_table(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char line[80];
  for (size_t i = 0; i < trho_.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g %.17g\n", trho_[i], tg_[i]);
    out << line;
  }
}

RadialProfile RadialProfile::from_functions(std::function<double(double)> g,
                                            std::function<double(double)> dg,
                                            int d, HeadLaw head, TailLaw tail,
                                            double rho_min, double rho_max,
                                            int n) {
  RadialProfile prof;
  prof.spec_.d = d;
  prof.spec_.rho_min = rho_min;
  prof.spec_.rho_max = rho_max;
  prof.spec_.table_n = n;
  prof.g_ = std::move(g);
  prof.dg_ = std::move(dg);
  prof.head_ = head;
  prof.tail_ = tail;
  prof.fill_table();
  return prof;
}

RadialProfile make_kernel(const KernelSpec& spec) {
  spec.validate();
  RadialProfile prof;
  prof.spec_ = spec;
  const int d = spec.d;
  const double a = spec.a, s = spec.s;
  const double head_exp = d - 1.0 + s;

  switch (spec.family) {
    case Family::riesz: {
      prof.head_ = {a, head_exp, std::numeric_limits<double>::infinity()};
      prof.tail_ = {false, a, head_exp, 0.0};
      prof.g_ = [a, head_exp](double rho) { return a * std::pow(rho, -head_exp); };
      prof.dg_ = [a, head_exp](double rho) {
        return -a * head_exp * std::pow(rho, -head_exp - 1.0);
      };
      prof.defect_ = 0.0;
      break;
    }
    case Family::two_scale: {
      const double t = spec.tail, b = spec.b, r = spec.r, R = spec.R;
      if (!(s > t))
        fail("two_scale kernel: head order s=%g must exceed tail order t=%g", s, t);
      // p-space crossing of the two power laws must land inside [r, R]
      const double rho_cross = std::pow(a / b, 1.0 / (s - t));
      if (!(rho_cross >= r && rho_cross <= R))
        fail("two_scale kernel: power crossing at rho=%g lies outside [r,R]; "
             "need a/b between r^(s-t) and R^(s-t)", rho_cross);
      // smooth max of the two power laws in log-log coordinates; tau is sized
      // so the junction defect stays below 10^{-blend_sharpness}
      const double tau = std::pow(10.0, -spec.blend_sharpness) / (2.0 * std::log(2.0));
      const double la = std::log(a), lb = std::log(b);
      const double dm1 = d - 1.0;
      auto weights = [=](double sigma, double& lp, double& mprime) {
        double q1 = la - s * sigma, q2 = lb - t * sigma;
        double hi = std::max(q1, q2), gap = std::abs(q1 - q2);
        lp = hi + tau * std::log1p(std::exp(-gap / tau));
        double w1; // softmax weight of the head branch
        if (gap / tau > 700.0)
          w1 = (q1 >= q2) ? 1.0 : 0.0;
        else
          w1 = 1.0 / (1.0 + std::exp((q2 - q1) / tau));
        mprime = -(s * w1 + t * (1.0 - w1));
      };
      prof.g_ = [=](double rho) {
        double sigma = std::log(rho), lp, mp;
        weights(sigma, lp, mp);
        return std::exp(lp - dm1 * sigma);
      };
      prof.dg_ = [=](double rho) {
        double sigma = std::log(rho), lp, mp;
        weights(sigma, lp, mp);
        return std::exp(lp - (dm1 + 1.0) * sigma) * (mp - dm1);
      };
      prof.head_ = {a, head_exp, r};
      prof.tail_ = {false, b, dm1 + t, R};
      double dr = std::abs(prof.p(r) / (a * std::pow(r, -s)) - 1.0);
      double dR = std::abs(prof.p(R) / (b * std::pow(R, -t)) - 1.0);
      prof.defect_ = std::max(dr, dR);
      break;
    }
    case Family::local:
    case Family::intermediate: {
      const double r = spec.r, R = spec.R, b = spec.b;
      auto tr = build_transition(spec);
      const bool compact = spec.family == Family::local;
      const double tail_exp = compact ? 0.0 : spec.tail;
      const double dm1 = d - 1.0;
      prof.g_ = [=](double rho) {
        if (rho <= r) return a * std::pow(rho, -head_exp);
        if (rho >= R)
          return compact ? 0.0 : b * std::pow(rho, -tail_exp);
        double pv = tr->eval_p(rho);
        if (compact && pv < 0.0) pv = 0.0; // roundoff guard on the flat run-out
        return pv * std::pow(rho, -dm1);
      };
      prof.dg_ = [=](double rho) {
        if (rho <= r) return -a * head_exp * std::pow(rho, -head_exp - 1.0);
        if (rho >= R)
          return compact ? 0.0 : -b * tail_exp * std::pow(rho, -tail_exp - 1.0);
        double p = tr->eval_p(rho), dp = tr->eval_dp(rho);
        return std::pow(rho, -dm1) * (dp - dm1 * p / rho);
      };
      prof.head_ = {a, head_exp, r};
      prof.tail_ = compact ? TailLaw{true, 0.0, 0.0, R} : TailLaw{false, b, tail_exp, R};
      prof.defect_ = tr->endpoint_residual;
      break;
    }
  }
  prof.fill_table();
  if (!check_monotone_convex(prof))
    throw std::logic_error("make_kernel: constructed profile failed admissibility certification");
  return prof;
}

bool check_monotone_convex(const RadialProfile& prof) {
  const auto& rho = prof.table_rho();
  const auto& g = prof.table_g();
  const int n = (int)rho.size();
  const double dm1 = prof.d() - 1.0;
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = std::pow(rho[i], dm1) * g[i];
  double pmax = *std::max_element(p.begin(), p.end());
  // slack floors cover integration roundoff on near-zero stretches
  for (int i = 1; i < n; ++i) {
    double slack = 1e-11 * std::max(p[i - 1], p[i]) + 1e-12 * pmax;
    if (p[i] > p[i - 1] + slack) return false;
  }
  for (int i = 1; i + 1 < n; ++i) {
    double hl = rho[i] - rho[i - 1], hr = rho[i + 1] - rho[i];
    double d2 = 2.0 * ((p[i + 1] - p[i]) / hr - (p[i] - p[i - 1]) / hl) / (hl + hr);
    double slack = (1e-8 * p[i] + 1e-9 * pmax) / (rho[i] * rho[i]);
    if (d2 < -slack) return false;
  }
  return true;
}

GradientConditionReport check_gradient_condition(const RadialProfile& prof) {
  GradientConditionReport rep;
  const int d = prof.d();
  const double sd = sphere_area(d);
  const HeadLaw& head = prof.head();
  const TailLaw& tail = prof.tail();

  // inner: sigma_d int_0^1 rho^d |g'| drho; the head power integrates in
  // closed form, any transition part between head.valid_to and 1 by panels
  bool inner_ok = true;
  double inner = 0.0;
  double c = std::min(1.0, head.valid_to);
  if (c > 0.0 && head.exponent < d) {
    inner += head.coef * head.exponent * std::pow(c, d - head.exponent) /
             (d - head.exponent);
  } else if (c > 0.0 && head.exponent > 0.0) {
    inner_ok = false;
    rep.note += "inner integral divergent (head exponent >= d); ";
  } else if (c <= 0.0) {
    c = 1e-6; // fixture without a head law: quadrature only, lower cutoff
    rep.note += "inner truncated at 1e-6; ";
  }
  if (c < 1.0) {
    inner += gl_log_panels(
        [&](double x) { return std::pow(x, d) * std::abs(prof.dg(x)); }, c, 1.0, 24);
  }
  rep.inner_integral = sd * inner;

  // outer: dyadic doubling with geometric tail extrapolation
  auto f = [&](double x) { return std::pow(x, d - 1) * std::abs(prof.dg(x)); };
  double outer = 0.0;
  if (tail.compact && tail.valid_from <= 1.0) {
    rep.pass = true;
  } else if (tail.compact) {
    outer = gl_log_panels(f, 1.0, tail.valid_from, 32);
    rep.pass = true;
  } else {
    double prev = -1.0, lo = 1.0;
    bool converged = false;
    for (int k = 0; k < 200; ++k) {
      double panel = gl_log_panels(f, lo, 2.0 * lo, 4);
      outer += panel;
      rep.doublings = k + 1;
      if (prev >= 0.0 && k >= 8) {
        double q = panel / std::max(prev, 1e-300);
        if (q >= 0.999) {
          rep.note += "outer tail panels not decreasing (non-integrable tail)";
          break;
        }
        double rest = panel * q / (1.0 - q);
        if (rest <= 1e-9 * std::max(outer, 1e-300)) {
          outer += rest;
          converged = true;
          break;
        }
      }
      prev = panel;
      lo *= 2.0;
    }
    rep.pass = converged;
    if (!converged && rep.note.empty())
      rep.note += "outer tail quadrature did not converge under interval doubling";
  }
  rep.outer_integral = sd * outer;
  rep.pass = rep.pass && inner_ok;
  return rep;
}

}  // namespace nlgrad
