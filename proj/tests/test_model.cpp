#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jumphk/model.hpp"
#include "jumphk/rng.hpp"

using namespace jumphk;

namespace {

ModelSpec stable1d(double alpha = 0.5) {
  ModelSpec m;
  m.dim = 1;
  m.coeff.params = {1.0};
  m.kernel.family = KernelFamily::stable_like;
  m.kernel.alpha = alpha;
  return m;
}

}  // namespace

TEST_CASE("family names round-trip") {
  for (auto f : {CoeffFamily::constant, CoeffFamily::smooth_periodic, CoeffFamily::checkerboard})
    CHECK(coeff_family_from_string(to_string(f)) == f);
  for (auto f : {KernelFamily::zero, KernelFamily::stable_like, KernelFamily::truncated_stable,
                 KernelFamily::mixed_index, KernelFamily::comparability_violating})
    CHECK(kernel_family_from_string(to_string(f)) == f);
  CHECK_THROWS(kernel_family_from_string("not-a-family"));
}

TEST_CASE("small-jump second moment of the unit stable family") {
  // integral of h^2 |h|^{-3/2} over |h| <= 1 is 2 * (2/3) = 4/3
  const ModelSpec m = stable1d();
  const MomentReport rep = moment_bounds(m, 1.0, 64, 3);
  CHECK(rep.converged);
  CHECK(rep.k1 == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  CHECK(rep.K_lambda == doctest::Approx(4.0 / 3.0).epsilon(1e-6));

  JumpKernel J(m.kernel, 1);
  CHECK(J.second_moment_small(vec1(0.3), 1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  // delta = 1/4: 2 * integral_0^{1/4} h^{1/2} dh = (4/3) 8^{-1}
  CHECK(J.second_moment_small(vec1(0.0), 0.25) ==
        doctest::Approx((4.0 / 3.0) * std::pow(0.25, 1.5)).epsilon(1e-6));
}

TEST_CASE("tail mass of the unit stable family") {
  // 2 * integral_{1/2}^inf h^{-3/2} dh = 4 sqrt 2
  const ModelSpec m = stable1d();
  const SplitReport s = split_kernel(m, 0.5);
  CHECK(s.has_big);
  CHECK(s.tail_constant);
  CHECK(s.N_sup == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-6));

  JumpKernel J(m.kernel, 1);
  CHECK(J.tail_mass(vec1(0.0), 0.5) == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(std::isinf(J.support_radius()));
}

TEST_CASE("truncated family cuts the tail exactly") {
  ModelSpec m = stable1d();
  m.kernel.family = KernelFamily::truncated_stable;
  m.kernel.trunc_radius = 1.0;
  JumpKernel J(m.kernel, 1);
  CHECK(J.support_radius() == doctest::Approx(1.0));
  CHECK(J(vec1(0.0), vec1(1.5)) == 0.0);
  // 2 * integral_{1/2}^{1} h^{-3/2} dh = 4 (sqrt 2 - 1)
  CHECK(J.tail_mass(vec1(0.0), 0.5) ==
        doctest::Approx(4.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-6));
  CHECK(J.tail_mass(vec1(0.0), 1.0) == doctest::Approx(0.0).epsilon(1e-12));

  const SplitReport s = split_kernel(m, 0.5);
  CHECK(s.has_big);
  const SplitReport s2 = split_kernel(m, 1.0);
  CHECK_FALSE(s2.has_big);
}

TEST_CASE("zero kernel is inert") {
  ModelSpec m;
  m.dim = 1;
  m.coeff.params = {1.0};
  JumpKernel J(m.kernel, 1);
  CHECK(J.is_zero());
  CHECK(J(vec1(0.0), vec1(0.5)) == 0.0);
  CHECK(J.tail_mass(vec1(0.0), 0.25) == 0.0);
  const SplitReport s = split_kernel(m, 0.5);
  CHECK_FALSE(s.has_big);
}

TEST_CASE("envelope dominates the kernel along rays") {
  for (auto fam : {KernelFamily::stable_like, KernelFamily::mixed_index,
                   KernelFamily::comparability_violating}) {
    ModelSpec m = stable1d();
    m.kernel.family = fam;
    m.kernel.beta_idx = 0.8;
    m.kernel.c_lo = 0.5;
    m.kernel.c_hi = 2.0;
    JumpKernel J(m.kernel, 1);
    RngStream g(17, 0);
    for (int i = 0; i < 2000; ++i) {
      const double x = g.uniform(-4.0, 4.0);
      const double r = std::exp(g.uniform(std::log(1e-4), std::log(50.0)));
      const double side = g.uniform() < 0.5 ? 1.0 : -1.0;
      CHECK(J(vec1(x), vec1(x + side * r)) <= J.envelope_at(r) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("envelope sampling matches envelope masses") {
  const ModelSpec m = stable1d();
  JumpKernel J(m.kernel, 1);
  const double r1 = 1.0 / 128, r2 = 8.0;
  const double total = J.envelope_mass(r1, r2);
  CHECK(total > 0);
  // inverse-CDF draws land in sub-shells proportionally to their mass
  const double mid = 0.5;
  const double frac = J.envelope_mass(r1, mid) / total;
  RngStream g(7, 1);
  const int n = 50000;
  int low = 0;
  for (int i = 0; i < n; ++i) {
    const double r = J.envelope_sample_radius(r1, r2, g.uniform());
    CHECK(r >= r1);
    CHECK(r <= r2 * (1 + 1e-12));
    if (r < mid) ++low;
  }
  const double se = std::sqrt(frac * (1 - frac) / n);
  CHECK(std::abs(static_cast<double>(low) / n - frac) < 4 * se);
}

TEST_CASE("ellipticity validator reads the field") {
  ModelSpec m;
  m.dim = 1;
  m.coeff.params = {2.0};
  m.coeff.lambda = 2.0;
  EllipticityReport r = validate_ellipticity(m, 500, 5);
  CHECK(r.pass);
  CHECK(r.worst_eig_min == doctest::Approx(2.0));

  m.coeff.family = CoeffFamily::checkerboard;
  m.coeff.params = {0.5, 2.0};
  r = validate_ellipticity(m, 2000, 5);
  CHECK(r.pass);
  CHECK(r.worst_eig_min == doctest::Approx(0.5));
  CHECK(r.worst_eig_max == doctest::Approx(2.0));

  // declared constant too small -> fail
  m.coeff.lambda = 1.5;
  r = validate_ellipticity(m, 2000, 5);
  CHECK_FALSE(r.pass);
}

TEST_CASE("symmetry check flags the asymmetric perturbation") {
  ModelSpec m = stable1d();
  SymmetryReport r = check_symmetry(m, 500, 11);
  CHECK(r.pass);
  CHECK(r.max_rel_asym < 1e-12);

  m.kernel.asym_perturb = 0.1;
  r = check_symmetry(m, 500, 11);
  CHECK_FALSE(r.pass);
  CHECK(r.max_rel_asym > 1e-3);
}

TEST_CASE("comparability: bounded for stable-like, unbounded for the cone family") {
  ModelSpec m = stable1d();
  ComparabilityReport r = comparability_sweep(m, vec0(), {0.25, 0.5, 1.0}, 2000, 13);
  CHECK(r.all_finite);
  CHECK(r.pass);
  for (double k : r.k_r) {
    CHECK(k >= 1.0);
    CHECK(k < 4.0);  // sup ratio for a radial power kernel stays near 2^{1+alpha}
  }

  m.kernel.family = KernelFamily::comparability_violating;
  r = comparability_sweep(m, vec0(), {0.25, 0.5, 1.0}, 2000, 13);
  CHECK_FALSE(r.all_finite);
  CHECK_FALSE(r.pass);
}

TEST_CASE("checkerboard field has no drift; smooth field does") {
  CoeffSpec cs;
  cs.family = CoeffFamily::smooth_periodic;
  cs.params = {1.0, 0.25};
  CoeffField f(cs, 1);
  CHECK(f.differentiable());
  bool nonzero = false;
  for (double x : {0.1, 0.3, 0.7}) {
    if (std::abs(f.drift(vec1(x))[0]) > 1e-12) nonzero = true;
  }
  CHECK(nonzero);

  cs.family = CoeffFamily::checkerboard;
  cs.params = {0.5, 2.0};
  CoeffField g(cs, 1);
  CHECK_FALSE(g.differentiable());
  CHECK_THROWS(g.drift(vec1(0.3)));
}

TEST_CASE("model validation rejects bad parameters") {
  ModelSpec m = stable1d();
  CHECK_NOTHROW(m.validate());
  m.kernel.alpha = 2.5;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = stable1d();
  m.dim = 3;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = stable1d();
  m.kernel.c_lo = -1.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = stable1d();
  m.kernel.family = KernelFamily::mixed_index;
  m.kernel.beta_idx = 0.3;  // below alpha
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
