#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jumphk/estimators.hpp"

using namespace jumphk;

namespace {

ModelSpec bm1d() {
  ModelSpec m;
  m.dim = 1;
  m.coeff.params = {1.0};
  return m;
}

ModelSpec stable1d(double alpha = 0.5) {
  ModelSpec m = bm1d();
  m.kernel.family = KernelFamily::stable_like;
  m.kernel.alpha = alpha;
  return m;
}

McParams quick(int n) {
  McParams mc;
  mc.n_paths = n;
  mc.dt = 1e-3;
  mc.workers = 4;
  mc.seed = 11;
  return mc;
}

double phi(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
}

}  // namespace

TEST_CASE("density histogram matches the Gaussian marginal") {
  const auto dens = estimate_density(bm1d(), vec0(), {0.25}, quick(40000), 3.0);
  REQUIRE(dens.size() == 1);
  const DensityEstimate& de = dens[0];
  CHECK(de.inside_fraction > 0.999);
  CHECK(de.bin_width >= 2.0 * std::sqrt(1e-3) / 5.0);
  int bad = 0;
  for (int b = 0; b < static_cast<int>(de.density.size()); ++b) {
    const double x = de.bin_center(b, 1)[0];
    const double want = phi(x, 0.25);
    if (std::abs(de.density[b] - want) > 4.0 * de.se[b] + 0.01 * want) ++bad;
  }
  CHECK(bad == 0);
  // histogram integrates to the inside mass
  double total = 0;
  for (double d : de.density) total += d * de.bin_width;
  CHECK(total == doctest::Approx(de.inside_fraction).epsilon(1e-9));
}

TEST_CASE("density estimator rejects bad inputs") {
  CHECK_THROWS_AS(estimate_density(bm1d(), vec0(), {}, quick(100), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_density(bm1d(), vec0(), {0.5, 0.5}, quick(100), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_density(bm1d(), vec0(), {0.5}, quick(100), -1.0),
                  std::invalid_argument);
}

TEST_CASE("on-diagonal slope recovers the Gaussian decay") {
  McParams mc = quick(40000);
  const OnDiagonalFit fit = on_diagonal_decay(bm1d(), vec0(), {0.125, 0.25, 0.5, 1.0}, mc);
  CHECK(std::abs(fit.slope + 0.5) < 0.05);
  CHECK(fit.slope_se < 0.05);
  // intercept near log phi(0; 1) at t = 1
  CHECK(std::abs(fit.intercept - std::log(phi(0.0, 1.0))) < 0.1);
}

TEST_CASE("exit scaling claim on the pure diffusion") {
  McParams mc = quick(4000);
  const ClaimCheck c = check_exit_scaling(bm1d(), mc, {1.0 / 16, 1.0 / 8, 1.0 / 4});
  CHECK(c.pass);
  CHECK(c.claim_id == "prop_4_1a");
  CHECK(std::abs(c.fitted.at("slope") - 2.0) < 0.1);
  // ratios are E tau / r^2 = 1 for this calibration model
  CHECK(c.fitted.at("c_lo") > 0.9);
  CHECK(c.fitted.at("c_hi") < 1.1);
  CHECK(c.diagnostics.columns.front() == "r");
  CHECK(c.diagnostics.rows.size() == 3);
}

TEST_CASE("tightness claim finds a uniform exit scale") {
  McParams mc = quick(4000);
  const ClaimCheck c = check_tightness(bm1d(), mc, {0.125, 0.25, 0.5});
  CHECK(c.pass);
  CHECK(c.fitted.at("t0_min") > 0);
  CHECK(c.fitted.at("cv") < 0.5);
}

TEST_CASE("hitting claim sees no decay toward small targets") {
  McParams mc = quick(4000);
  const ClaimCheck c = check_hitting(bm1d(), mc);
  CHECK(c.pass);
  CHECK(c.fitted.at("c3") > 0);
  // d=1 interval targets are hit with probability bounded away from zero, so
  // the volume-normalized constant grows as targets shrink
  const auto& rows = c.diagnostics.rows;
  REQUIRE(rows.size() == 5);
  CHECK(rows.front()[4] > rows.back()[4]);
}

TEST_CASE("levy identity is vacuously exact without jumps") {
  McParams mc = quick(2000);
  const ClaimCheck c = check_levy_system(bm1d(), mc);
  CHECK(c.pass);
  CHECK(c.fitted.at("lhs") == 0.0);
  CHECK(c.fitted.at("rhs") == 0.0);
}

TEST_CASE("levy identity holds for the stable model at small n") {
  McParams mc = quick(20000);
  const ClaimCheck c = check_levy_system(stable1d(), mc);
  CHECK(c.fitted.at("lhs") > 0.0);
  CHECK(c.fitted.at("rhs") > 0.0);
  CHECK(std::abs(c.fitted.at("lhs") - c.fitted.at("rhs")) <=
        c.fitted.at("band") + 1e-12);
  CHECK(c.pass);
}

TEST_CASE("hoelder fit returns exponent one without jumps") {
  GridSpec g;
  g.extent = 2.0;
  g.h = 1.0 / 16;
  const ClaimCheck c = fit_hoelder(bm1d(), g, 21, 20, 60);
  CHECK(c.pass);
  CHECK(c.fitted.at("alpha") == doctest::Approx(1.0));
  CHECK(c.fitted.at("C") > 0);
}

TEST_CASE("harnack ratio is stable for the compliant kernel") {
  GridSpec g;
  g.extent = 2.0;
  g.h = 1.0 / 16;
  const ClaimCheck c = check_harnack(stable1d(), g, 23, 25);
  CHECK(c.pass);
  CHECK(c.fitted.at("C") >= 1.0);
  CHECK(c.fitted.at("growth") < 0.10);
}

TEST_CASE("weighted poincare ratio is finite and refinement-stable") {
  GridSpec g;
  g.extent = 2.0;
  g.h = 1.0 / 16;
  const ClaimCheck c = check_weighted_poincare(bm1d(), g, 29, 100);
  CHECK(c.pass);
  CHECK(c.fitted.at("ratio_max") > 0.01);
  CHECK(c.fitted.at("ratio_max") < 2.0);
}

TEST_CASE("nash ratio is finite and refinement-stable") {
  GridSpec g;
  g.extent = 2.0;
  g.h = 1.0 / 16;
  const ClaimCheck c = check_nash(stable1d(), g, 31, 100);
  CHECK(c.pass);
  CHECK(c.fitted.at("ratio_max") > 0);
}

TEST_CASE("upper bound claim needs a truncated kernel") {
  GridSpec g;
  g.extent = 2.0;
  g.h = 1.0 / 16;
  CHECK_THROWS_AS(check_upper_bound(stable1d(), g), std::invalid_argument);
  ModelSpec m = stable1d();
  m.kernel.family = KernelFamily::truncated_stable;
  m.kernel.trunc_radius = 1.0;
  const ClaimCheck c = check_upper_bound(m, g);
  CHECK(c.pass);
  CHECK(std::isfinite(c.fitted.at("c_obs")));
  CHECK(c.fitted.at("c_obs") > 0);
}

TEST_CASE("boundary data family shapes") {
  // signed family takes both signs; nonnegative family never goes negative
  BoundaryDataFamily signedfam(1, vec0(), 0.5, 7, false);
  bool pos = false, neg = false;
  for (int k = 0; k < 40; ++k) {
    for (double x = -3.5; x <= 3.5; x += 0.05) {
      const double v = signedfam.eval(k, vec1(x));
      if (v > 0) pos = true;
      if (v < 0) neg = true;
      CHECK(std::abs(v) <= 1.0 + 1e-12);
    }
  }
  CHECK(pos);
  CHECK(neg);

  BoundaryDataFamily nn(1, vec0(), 0.5, 7, true, 10);
  for (int k = 0; k < 30; ++k)
    for (double x = -3.5; x <= 3.5; x += 0.05) CHECK(nn.eval(k, vec1(x)) >= 0.0);
  // escalated indices are one-sided slabs: support on exactly one side
  for (int k = 10; k < 18; ++k) {
    bool left = false, right = false;
    for (double x = -3.5; x <= 3.5; x += 0.01) {
      if (nn.eval(k, vec1(x)) > 0) (x < 0 ? left : right) = true;
    }
    CHECK(left != right);
  }
}

TEST_CASE("test function family is periodic on the torus") {
  TestFunctionFamily fam(1, 2.0, 9);
  for (int k = 0; k < 10; ++k) {
    for (double x : {-1.7, -0.3, 0.9}) {
      CHECK(fam.eval(k, vec1(x)) == doctest::Approx(fam.eval(k, vec1(x + 4.0))).epsilon(1e-12));
    }
  }
  CHECK(fam.eval(0, vec0()) == doctest::Approx(1.0));
}

TEST_CASE("claim registry is closed and described") {
  const auto& ids = claim_ids();
  CHECK(ids.size() == 11);
  for (const auto& id : ids) CHECK_FALSE(claim_description(id).empty());
  CHECK_THROWS_AS(claim_description("thm_9_9"), std::invalid_argument);
}
