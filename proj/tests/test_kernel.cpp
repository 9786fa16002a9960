#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "nlgrad/kernel.hpp"
#include "nlgrad/special.hpp"

using namespace nlgrad;

namespace {

template <class F>
std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

KernelSpec local_spec() {
  KernelSpec sp;
  sp.family = Family::local;
  sp.s = 0.5;
  sp.b = 0.0;
  sp.r = 1.0;
  sp.R = 3.5;
  return sp;
}

KernelSpec intermediate_spec() {
  KernelSpec sp;
  sp.family = Family::intermediate;
  sp.s = 0.6;
  sp.tail = 4.0;
  sp.a = 1.0;
  sp.b = 2.0;
  sp.r = 1.0;
  sp.R = 2.5;
  return sp;
}

}  // namespace

TEST_CASE("family names round-trip") {
  for (Family f : {Family::riesz, Family::local, Family::intermediate, Family::two_scale}) {
    CHECK(family_from_name(family_name(f)) == f);
  }
  CHECK_THROWS_AS(family_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("spec validation rejects out-of-range parameters") {
  KernelSpec sp;
  sp.s = 1.2;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  sp = KernelSpec{};
  sp.d = 1;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  sp = KernelSpec{};
  sp.table_n = 8;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  sp = local_spec();
  sp.b = 1.0;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  sp = local_spec();
  sp.r = 2.0;
  sp.R = 1.0;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  sp = intermediate_spec();
  sp.tail = 2.5; // must exceed d
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  sp = KernelSpec{};
  sp.family = Family::two_scale;
  sp.tail = 1.5; // t must lie in (0,1)
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
}

TEST_CASE("riesz profile is a global power law") {
  KernelSpec sp; // defaults: riesz, d=3, s=0.5, a=1
  auto prof = make_kernel(sp);
  for (double rho : {0.07, 0.37, 1.0, 42.5}) {
    CHECK(prof.g(rho) == doctest::Approx(std::pow(rho, -2.5)).epsilon(1e-14));
    CHECK(prof.dg(rho) == doctest::Approx(-2.5 * std::pow(rho, -3.5)).epsilon(1e-14));
    CHECK(prof.p(rho) == doctest::Approx(std::pow(rho, -0.5)).epsilon(1e-14));
  }
  CHECK(prof.head().coef == 1.0);
  CHECK(prof.head().exponent == doctest::Approx(2.5));
  CHECK(std::isinf(prof.head().valid_to));
  CHECK(!prof.tail().compact);
  CHECK(prof.tail().exponent == doctest::Approx(2.5));
  CHECK(prof.transition_defect() == 0.0);

  // amplitude scales linearly; r/R/b/tail are ignored by this family
  sp.a = 3.7;
  sp.r = 5.0;
  sp.R = 2.0;
  sp.b = -3.0;
  sp.tail = 9.0;
  auto scaled = make_kernel(sp);
  CHECK(scaled.g(2.0) == doctest::Approx(3.7 * std::pow(2.0, -2.5)).epsilon(1e-14));
}

TEST_CASE("riesz gradient condition integrates in closed form") {
  auto prof = make_kernel(KernelSpec{});
  auto rep = check_gradient_condition(prof);
  // sigma_3 * s(d-1+s)/( (d-head)(head-d+1) )-free closed values: both sides equal 4*pi*5
  CHECK(rep.pass);
  CHECK(rep.inner_integral == doctest::Approx(62.831853071795864769).epsilon(1e-13));
  CHECK(rep.outer_integral == doctest::Approx(62.831853071795864769).epsilon(1e-8));
  CHECK(rep.doublings > 8);
}

TEST_CASE("two_scale profile matches both power laws away from the junction") {
  KernelSpec sp;
  sp.family = Family::two_scale; // defaults a=b=1, r=1, R=2, s=0.5, t=0.3
  auto prof = make_kernel(sp);
  // head branch on (0, r]
  CHECK(prof.g(0.25) == doctest::Approx(std::pow(0.25, -2.5)).epsilon(1e-13));
  CHECK(prof.g(0.9) == doctest::Approx(std::pow(0.9, -2.5)).epsilon(1e-13));
  // tail branch on [R, inf)
  CHECK(prof.g(8.0) == doctest::Approx(std::pow(8.0, -2.3)).epsilon(1e-13));
  CHECK(prof.g(250.0) == doctest::Approx(std::pow(250.0, -2.3)).epsilon(1e-13));
  CHECK(prof.head().valid_to == doctest::Approx(1.0));
  CHECK(prof.tail().exponent == doctest::Approx(2.3));
  CHECK(prof.transition_defect() >= 0.0);
  CHECK(prof.transition_defect() <= 1e-10);

  // smooth max dominates the exact max with a one-sided defect <= 1e-9
  for (double rho : {0.8, 0.9, 1.0, 1.1, 1.25}) {
    double m = std::max(std::pow(rho, -0.5), std::pow(rho, -0.3)) *
               std::pow(rho, -2.0);
    CHECK(prof.g(rho) >= m * (1.0 - 1e-15));
    CHECK(prof.g(rho) <= m * (1.0 + 1e-9));
  }

  // sharper blend shrinks the junction defect
  sp.blend_sharpness = 12.0;
  auto sharp = make_kernel(sp);
  CHECK(sharp.transition_defect() <= 1e-12);
}

TEST_CASE("two_scale rejects inverted orders and stray crossings") {
  KernelSpec sp;
  sp.family = Family::two_scale;
  sp.s = 0.3;
  sp.tail = 0.5;
  CHECK(thrown_message([&] { make_kernel(sp); }).find("exceed tail order") !=
        std::string::npos);
  sp = KernelSpec{};
  sp.family = Family::two_scale;
  sp.b = 5.0; // crossing at (1/5)^5 << r
  CHECK(thrown_message([&] { make_kernel(sp); }).find("crossing") != std::string::npos);
  sp.b = 1.0;
  sp.a = 5.0; // crossing at 5^5 >> R
  CHECK(thrown_message([&] { make_kernel(sp); }).find("crossing") != std::string::npos);
}

TEST_CASE("two_scale gradient condition reproduces both decay exponents") {
  KernelSpec sp;
  sp.family = Family::two_scale;
  auto rep = check_gradient_condition(make_kernel(sp));
  CHECK(rep.pass);
  // inner: head law integrates to 4*pi*5; outer: tail law to 4*pi*23/3
  CHECK(rep.inner_integral == doctest::Approx(62.831853071795864769).epsilon(1e-13));
  CHECK(rep.outer_integral == doctest::Approx(96.342174710086992646).epsilon(1e-8));
}

TEST_CASE("local profile: exact head, smooth convex run-out, hard zero") {
  auto prof = make_kernel(local_spec());
  // head law exact on (0, r]
  CHECK(prof.g(0.6) == doctest::Approx(std::pow(0.6, -2.5)).epsilon(1e-14));
  CHECK(prof.p(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  // identically zero from R on
  CHECK(prof.g(3.5) == 0.0);
  CHECK(prof.g(10.0) == 0.0);
  CHECK(prof.tail().compact);
  CHECK(prof.tail().valid_from == doctest::Approx(3.5));
  CHECK(prof.transition_defect() <= 1e-10);
  // transition values frozen from an independent construction of the same
  // moment-matched curvature profile (float64 reference run)
  CHECK(prof.p(1.2) == doctest::Approx(0.904971237988786).epsilon(2e-9));
  CHECK(prof.p(1.8) == doctest::Approx(0.621647706687006).epsilon(2e-9));
  CHECK(prof.p(2.4) == doctest::Approx(0.338539815354548).epsilon(2e-9));
  CHECK(prof.p(3.0) == doctest::Approx(0.116901445203059).epsilon(2e-9));
  CHECK(std::abs(prof.p(3.4) - 0.000212900607892363) < 1e-9);
}

TEST_CASE("local family enforces the chord-slope support bound") {
  // s/r >= 1/(R-r) fails for R = 2.5 and marginally at R = 3.0 (equality)
  for (double R : {1.5, 2.5, 3.0}) {
    auto sp = local_spec();
    sp.R = R;
    CHECK(thrown_message([&] { make_kernel(sp); }).find("chord-slope") !=
          std::string::npos);
  }
  for (double R : {3.5, 4.0, 6.0}) {
    auto sp = local_spec();
    sp.R = R;
    CHECK_NOTHROW(make_kernel(sp));
  }
}

TEST_CASE("local gradient condition terminates without tail doublings") {
  auto rep = check_gradient_condition(make_kernel(local_spec()));
  CHECK(rep.pass);
  CHECK(rep.doublings == 0);
  CHECK(rep.inner_integral == doctest::Approx(62.831853071795864769).epsilon(1e-13));
  CHECK(rep.outer_integral > 0.0);
  CHECK(rep.outer_integral < rep.inner_integral); // mass stops at R
}

TEST_CASE("intermediate profile: exact head and power tail, frozen transition") {
  auto prof = make_kernel(intermediate_spec());
  CHECK(prof.g(0.5) == doctest::Approx(std::pow(0.5, -2.6)).epsilon(1e-14));
  CHECK(prof.g(3.0) == doctest::Approx(2.0 / 81.0).epsilon(1e-14));
  CHECK(prof.g(2.5) == doctest::Approx(2.0 * std::pow(2.5, -4.0)).epsilon(1e-14));
  // continuity at both junctions
  CHECK(prof.p(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(prof.p(2.5 - 1e-9) == doctest::Approx(0.32).epsilon(1e-7));
  CHECK(prof.transition_defect() <= 1e-10);
  CHECK(prof.p(1.2) == doctest::Approx(0.893286614566989).epsilon(2e-9));
  CHECK(prof.p(1.7) == doctest::Approx(0.655338247381329).epsilon(2e-9));
  CHECK(prof.p(2.2) == doctest::Approx(0.417530974076902).epsilon(2e-9));
  CHECK(prof.p(2.45) == doctest::Approx(0.333167914217214).epsilon(2e-9));
}

TEST_CASE("intermediate family rejects infeasible amplitude ratios") {
  auto sp = intermediate_spec();
  sp.b = 0.5; // tail too weak: chord-slope fails
  CHECK(thrown_message([&] { make_kernel(sp); }).find("chord-slope") !=
        std::string::npos);
  sp.b = 4.0; // tail too strong: required curvature centroid leaves the band
  CHECK(thrown_message([&] { make_kernel(sp); }).find("centroid") != std::string::npos);
  for (double b : {1.0, 2.0}) {
    sp.b = b;
    CHECK_NOTHROW(make_kernel(sp));
  }
}

TEST_CASE("intermediate gradient condition closes over the power tail") {
  auto rep = check_gradient_condition(make_kernel(intermediate_spec()));
  CHECK(rep.pass);
  // head 2.6/(3-2.6): inner = 4*pi*6.5 in closed form
  CHECK(rep.inner_integral == doctest::Approx(81.681408993334624201).epsilon(1e-13));
  // tail part alone contributes 4*pi*0.64 beyond R
  CHECK(rep.outer_integral > 12.566370614359172 * 0.64);
  CHECK(rep.doublings > 8);
}

TEST_CASE("dg agrees with central differences of g for every family") {
  struct Case {
    KernelSpec sp;
    double probes[3];
  };
  KernelSpec ts;
  ts.family = Family::two_scale;
  const Case cases[] = {
      {KernelSpec{}, {0.37, 1.0, 12.0}},
      {ts, {0.5, 1.7, 5.0}},
      {local_spec(), {0.5, 2.0, 3.2}},
      {intermediate_spec(), {0.7, 1.8, 3.0}},
  };
  for (const auto& c : cases) {
    auto prof = make_kernel(c.sp);
    for (double rho : c.probes) {
      double h = 1e-5 * rho;
      double fd = (prof.g(rho + h) - prof.g(rho - h)) / (2.0 * h);
      CHECK(std::abs(fd - prof.dg(rho)) <= 1e-6 * std::abs(prof.dg(rho)));
    }
  }
}

TEST_CASE("admissibility check rejects non-monotone and non-convex profiles") {
  // ball indicator: p = rho^{d-1} increases on the support
  auto ball = RadialProfile::from_functions(
      [](double rho) { return rho <= 1.0 ? 1.0 : 0.0; }, [](double) { return 0.0; },
      3, HeadLaw{}, TailLaw{true, 0.0, 0.0, 1.0}, 1e-2, 10.0, 512);
  CHECK(!check_monotone_convex(ball));

  // decreasing but concave p
  auto concave = RadialProfile::from_functions(
      [](double rho) { return (1.0 - 0.25 * rho * rho) / (rho * rho); },
      [](double rho) { return -2.0 / (rho * rho * rho); }, 3, HeadLaw{},
      TailLaw{}, 0.1, 1.4, 256);
  CHECK(!check_monotone_convex(concave));

  // the real families all pass (already certified inside make_kernel)
  CHECK(check_monotone_convex(make_kernel(KernelSpec{})));
  CHECK(check_monotone_convex(make_kernel(local_spec())));
}

TEST_CASE("gradient condition flags a critically slow tail") {
  // g = rho^{-2} in d = 3: outer integrand is 2/rho, dyadic panels plateau
  auto prof = RadialProfile::from_functions(
      [](double rho) { return std::pow(rho, -2.0); },
      [](double rho) { return -2.0 * std::pow(rho, -3.0); }, 3,
      HeadLaw{1.0, 2.0, std::numeric_limits<double>::infinity()},
      TailLaw{false, 1.0, 2.0, 1.0}, 1e-4, 1e4, 512);
  auto rep = check_gradient_condition(prof);
  CHECK(!rep.pass);
  CHECK(rep.note.find("not decreasing") != std::string::npos);
}

TEST_CASE("sample table covers the requested range and round-trips to disk") {
  KernelSpec sp;
  sp.rho_min = 0.1;
  sp.rho_max = 10.0;
  sp.table_n = 64;
  auto prof = make_kernel(sp);
  REQUIRE(prof.table_rho().size() == 64);
  CHECK(prof.table_rho().front() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(prof.table_rho().back() == doctest::Approx(10.0).epsilon(1e-13));
  for (size_t i = 0; i < prof.table_rho().size(); i += 13) {
    CHECK(prof.table_g()[i] == doctest::Approx(prof.g(prof.table_rho()[i])));
  }

  const std::string path = "/tmp/nlgrad_kernel_table_test.txt";
  prof.write_table(path);
  std::ifstream in(path);
  REQUIRE(in.good());
  double rho = 0, g = 0;
  int rows = 0;
  bool exact = true;
  while (in >> rho >> g) {
    exact = exact && rho == prof.table_rho()[rows] && g == prof.table_g()[rows];
    ++rows;
  }
  CHECK(rows == 64);
  CHECK(exact); // %.17g survives the parse bit-for-bit
  std::remove(path.c_str());
}
