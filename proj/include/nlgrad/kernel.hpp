#pragma once
// Admissible radial kernels with doubly homogeneous decay.
//
// Families (profiles g(rho) in dimension d):
//   riesz         a rho^{-(d-1+s)} everywhere
//   local         a rho^{-(d-1+s)} on (0,r], identically 0 on [R,inf)
//   intermediate  a rho^{-(d-1+s)} on (0,r], b rho^{-alpha_tail} on [R,inf)
//   two_scale     a rho^{-(d-1+s)} on (0,r], b rho^{-(d-1+t)} on [R,inf)
//
// Every accepted profile certifies the admissibility invariant: p(rho) =
// rho^{d-1} g(rho) is non-increasing and convex on (0,inf).  That invariant
// is what guarantees strict positivity of the radial Fourier transform
// downstream, so construction fails loudly instead of producing a profile
// that merely looks plausible.

#include <functional>
#include <string>
#include <vector>

namespace nlgrad {

enum class Family { riesz, local, intermediate, two_scale };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

struct KernelSpec {
  Family family = Family::riesz;
  int d = 3;
  double s = 0.5;    // head order: g ~ a rho^{-(d-1+s)} near 0
  double tail = 0.3; // t for two_scale, alpha_tail for intermediate; unused otherwise
  double a = 1.0;    // head amplitude
  double b = 1.0;    // tail amplitude; must be 0 for local, unused for riesz
  double r = 1.0;    // head formula exact on (0, r]
  double R = 2.0;    // tail formula exact on [R, inf)
  double blend_sharpness = 10.0; // two_scale junction defect <= 10^{-sharpness}
  double rho_min = 1e-4;
  double rho_max = 1e4;
  int table_n = 4096;

  // Structural range checks; throws std::invalid_argument naming the field.
  void validate() const;
};

// Exact power-law segments of a profile: g = coef * rho^{-exponent} on the
// stated range.  valid_to == +inf (riesz) means the head law is global.
struct HeadLaw {
  double coef = 0.0;
  double exponent = 0.0;
  double valid_to = 0.0;
};
struct TailLaw {
  bool compact = false; // g identically 0 on [valid_from, inf)
  double coef = 0.0;
  double exponent = 0.0;
  double valid_from = 0.0;
};

class RadialProfile {
 public:
  double g(double rho) const { return g_(rho); }
  double dg(double rho) const { return dg_(rho); }
  double p(double rho) const; // rho^{d-1} g(rho)
  int d() const { return spec_.d; }
  const KernelSpec& spec() const { return spec_; }
  const HeadLaw& head() const { return head_; }
  const TailLaw& tail() const { return tail_; }
  // Largest relative mismatch against the family formulas at the junctions
  // rho = r and rho = R (0 for riesz).
  double transition_defect() const { return defect_; }
  const std::vector<double>& table_rho() const { return trho_; }
  const std::vector<double>& table_g() const { return tg_; }
  // Two-column text export (rho, g) for plotting.
  void write_table(const std::string& path) const;

  // Fixture constructor for negative controls; fn need not satisfy the
  // admissibility invariant and no certification runs.
  static RadialProfile from_functions(std::function<double(double)> g,
                                      std::function<double(double)> dg, int d,
                                      HeadLaw head, TailLaw tail,
                                      double rho_min = 1e-4,
                                      double rho_max = 1e4, int n = 4096);

 private:
  RadialProfile() = default;
  friend RadialProfile make_kernel(const KernelSpec& spec);
  void fill_table();

  KernelSpec spec_;
  std::function<double(double)> g_, dg_;
  HeadLaw head_;
  TailLaw tail_;
  double defect_ = 0.0;
  std::vector<double> trho_, tg_;
};

// Constructs the family profile and certifies admissibility.  Throws
// std::invalid_argument with a constructive message when the requested
// parameters cannot support a convex non-increasing transition (for local:
// the chord-slope condition s/r >= 1/(R-r)).
RadialProfile make_kernel(const KernelSpec& spec);

struct GradientConditionReport {
  double inner_integral = 0.0; // sigma_d int_0^1 rho^d |g'(rho)| drho
  double outer_integral = 0.0; // sigma_d int_1^inf rho^{d-1} |g'(rho)| drho
  bool pass = false;
  int doublings = 0; // dyadic tail panels consumed
  std::string note;
};

// Radial quadrature of the gradient integrability condition.  The outer
// integral is summed over dyadic panels [2^k, 2^{k+1}]; pass=false when the
// panel sums fail to converge (detects non-integrable tails).
GradientConditionReport check_gradient_condition(const RadialProfile& prof);

// True iff first differences of p are non-positive and second divided
// differences nonnegative on the sample table, up to relative slack.
bool check_monotone_convex(const RadialProfile& prof);

}  // namespace nlgrad
