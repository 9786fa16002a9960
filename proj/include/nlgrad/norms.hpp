#pragma once
// Rearrangement-based norms of periodic grid fields.
//
// A grid field rearranges exactly: its decreasing rearrangement is the
// sorted-magnitude step function with one step per cell, so Lebesgue,
// Lorentz, weak, and sum-space norms of the rearrangement reduce to
// closed-form sums over steps.  On top of that sit the truncation
// splittings u = G_k(u) + T_k(u), a rearrangement bound check for
// convolutions on small grids, and the Sobolev-quotient experiment table
// with its CSV/JSON writers.
#include <string>
#include <utility>
#include <vector>

#include "nlgrad/field_ops.hpp"
#include "nlgrad/kernel.hpp"
#include "nlgrad/radial_fourier.hpp"

namespace nlgrad {

// Decreasing rearrangement of |v|: right-continuous step function on
// (0, support volume), zero beyond.  value[i] holds on (cum[i], cum[i+1]];
// head[i] = int_0^{cum[i]} v* supports the running average in O(log n).
struct RearrangedProfile {
  std::vector<double> value;  // non-increasing, strictly positive
  std::vector<double> cum;    // cumulative volumes, size value.size() + 1
  std::vector<double> head;   // running integral of v*, size cum.size()
  double domain_volume = 0.0;

  double vstar(double y) const;      // step value at y, 0 beyond support
  double vstarstar(double y) const;  // (1/y) int_0^y v*; total()/y beyond
  double dist(double tau) const;     // A(tau) = |{ |v| > tau }|
  double total() const { return head.empty() ? 0.0 : head.back(); }
  double support() const { return cum.empty() ? 0.0 : cum.back(); }
};

RearrangedProfile rearrange(const ScalarField& u);
// Profile from raw magnitudes sharing one cell volume (vector fields,
// synthetic test profiles).  Zeros are dropped; volumes may differ from
// cell * count only through domain_volume.
RearrangedProfile rearrange_samples(std::vector<double> mags, double cell,
                                    double domain_volume);

// Target-space descriptor.  Lorentz requires 1 < p < inf for finite q and
// admits p >= 1 only at q = inf; truncation levels must be nonnegative.
enum class SpaceTag { lebesgue, lorentz, weak, sum };
struct NormSpec {
  SpaceTag tag = SpaceTag::lebesgue;
  double p = 2.0;
  double q = 2.0;  // Lorentz second exponent; may be infinity
  double k = 0.0;  // truncation level for sum-space work
  void validate() const;  // throws std::invalid_argument
};

// || v ||_{L^p}: exact step sums.
double lp_norm(const RearrangedProfile& prof, double p);
// Lorentz norm built on the running average v**.  Steps evaluate in closed
// form (pure powers and integer q by expansion); non-integer q with an
// offset step falls back to panel quadrature refined to rounding level.
// p = 1 with finite q diverges for any nonzero profile: returns +infinity.
double lorentz_norm(const RearrangedProfile& prof, double p, double q);
// The v*-based variant (no averaging); lorentz_norm dominates it.
double lorentz_norm_vstar(const RearrangedProfile& prof, double p, double q);
// sup_y y^{1/p} v**(y), exact per step (endpoints plus interior critical
// point of y^{1/p - 1}(v y + C)).
double weak_norm(const RearrangedProfile& prof, double p);

// Truncations: T_k clamps to [-k, k], G_k keeps the excess; u = G_k + T_k
// exactly.  Profile forms act on v* directly: |G_k u|* = (v* - k)_+ and
// |T_k u|* = min(v*, k), because both arise from monotone maps of |u|.
std::pair<ScalarField, ScalarField> truncate(const ScalarField& u, double k);
RearrangedProfile truncate_above(const RearrangedProfile& prof, double k);
RearrangedProfile truncate_below(const RearrangedProfile& prof, double k);

// Upper bound on || u ||_{L^m + L^q} over truncation decompositions
// (G_k u, T_k u): log-grid sweep of k over [1e-6, 1] * max|u| plus the
// k = 0 endpoint, then golden-section refinement to 1e-3 relative.
struct SumNormResult {
  double value = 0.0;
  double k = 0.0;  // minimizing truncation level
};
SumNormResult sum_space_norm(const ScalarField& u, double m, double q);

// Periodic convolution h(x) = sum_z v(z) F(x - z) h^3 by literal
// summation, O(N^6); N <= 32 is enforced (grids must match).
ScalarField periodic_convolution(const ScalarField& v, const ScalarField& F);
// int_tau^inf v**(y) F**(y) dy, exact per union-breakpoint piece: where
// both profiles sit in fixed steps the integrand is a + b/y + c/y^2, and
// beyond both supports it is (|v|_1 |F|_1) / y^2.
double oneil_rhs(const RearrangedProfile& vp, const RearrangedProfile& Fp,
                 double tau);

// Rearrangement bound for a periodic convolution h = v * F on one grid:
// checks h**(tau) <= int_tau^inf v**(y) F**(y) dy at log-spaced tau.
// A probe fails when lhs - rhs > slack * max(1, rhs).
struct OneilProbe {
  double tau = 0.0, lhs = 0.0, rhs = 0.0;
};
struct OneilReport {
  bool pass = true;
  double worst_violation = 0.0;  // max over probes of lhs - rhs
  std::vector<OneilProbe> probes;
  std::vector<OneilProbe> failures;
};
OneilReport oneil_check(const ScalarField& v, const ScalarField& F,
                        int n_probes = 50, double slack = 1e-8);

// Sobolev-quotient experiments.  One config describes one theorem sweep:
//   "1.2"  riesz kernels over s_values; lhs = ||u||_{L^{d/(d-s)}},
//          rhs = (1 - s) ||Gu||_{L^1}
//   "1.4"  local/intermediate kernel; lhs = ||u||_{L^m + L^q} with
//          m = pd/(d - sp), q = pd/(d - p); rhs = ||Gu||_{L^p}
//   "1.5"  two-scale kernel, q = pd/(d - tp)
//   "1.6"  Lorentz refinement of 1.4 at k = ||Gu||_{L^p}:
//          lhs = ||G_k u||_{m, p} + ||T_k u||_{q, p}
//   "1.7"  Lorentz refinement of 1.5
// Families: "gaussians" (params = widths) and "bumps" (params = radii) on
// the configured grid; "dilations" (params = log2 lambda) realize u_lambda
// by scaling the grid length L -> lambda L with the kernel fixed, which is
// the exact dilation at unchanged resolution.
struct SobolevConfig {
  std::string theorem = "1.4";
  KernelSpec kernel;               // ignored for 1.2 (riesz built per s)
  std::string family = "gaussians";
  std::vector<double> params{1.0};
  std::vector<double> s_values{0.5};  // 1.2 only
  double p = 2.0;
  int N = 64;
  double L = 16.0;
  FtOptions ft;
};
struct SobolevRow {
  std::string theorem, kernel_id, family;
  double param = 0.0, s = 0.0, t = 0.0, p = 0.0;
  double lhs = 0.0, rhs = 0.0, quotient = 0.0;
  double k_used = 0.0, k_best = 0.0;
  bool skipped = false;
  std::string reason;
};
std::vector<SobolevRow> sobolev_experiment(const SobolevConfig& config);

// CSV schema: theorem,kernel,family,param,s,t,p,lhs,rhs,quotient,k_used.
// Skipped rows are omitted from the CSV; the JSON summary records them
// with reasons next to per-theorem quotient ranges and k_best lists.
void write_sobolev_csv(const std::string& path,
                       const std::vector<SobolevRow>& rows);
void write_sobolev_summary(const std::string& path,
                           const std::vector<SobolevRow>& rows);

}  // namespace nlgrad
