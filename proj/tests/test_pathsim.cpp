#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "jumphk/parallel.hpp"
#include "jumphk/pathsim.hpp"

using namespace jumphk;

namespace {

ModelSpec bm1d(double a = 1.0) {
  ModelSpec m;
  m.dim = 1;
  m.coeff.params = {a};
  m.coeff.lambda = std::max(a, 1.0 / a);
  return m;
}

ModelSpec stable1d(double alpha = 0.5) {
  ModelSpec m = bm1d();
  m.kernel.family = KernelFamily::stable_like;
  m.kernel.alpha = alpha;
  return m;
}

struct Acc {
  double s1 = 0, s2 = 0;
  std::size_t n = 0;
  void add(double v) {
    s1 += v;
    s2 += v * v;
    ++n;
  }
  double mean() const { return s1 / n; }
  double var() const { return s2 / n - mean() * mean(); }
  double se() const { return std::sqrt(var() / n); }
};

}  // namespace

TEST_CASE("pure diffusion marginal is exactly Gaussian") {
  // generator (1/2) a d^2/dx^2 with a = 2: X_1 ~ N(0, 2)
  const ProcessLaw law(bm1d(2.0), SimParams{1e-3, 0.5, true, 1.0});
  const std::size_t n = 40000;
  std::vector<double> xs(n);
  parallel_for(n, 4, [&](std::size_t i) {
    RngStream rng(101, i);
    Walker w(law, vec0(), rng);
    StepEvent ev;
    while (w.next(ev)) {
    }
    xs[i] = w.position()[0];
  });
  Acc a;
  for (double v : xs) a.add(v);
  CHECK(std::abs(a.mean()) < 4.0 * a.se());
  const double var_se = a.var() * std::sqrt(2.0 / n);
  CHECK(std::abs(a.var() - 2.0) < 4.0 * var_se);
}

TEST_CASE("breakpoints are landed exactly") {
  const ProcessLaw law(stable1d(), SimParams{1e-2, 0.5, true, 1.0});
  RngStream rng(7, 0);
  Walker w(law, vec0(), rng, {0.25, 0.5, 0.75});
  StepEvent ev;
  int seen = 0;
  double prev = 0.0;
  while (w.next(ev)) {
    CHECK(ev.t >= prev);
    prev = ev.t;
    if (ev.t == 0.25 || ev.t == 0.5 || ev.t == 0.75) ++seen;
  }
  CHECK(seen >= 3);
  CHECK(w.time() == doctest::Approx(1.0));
}

TEST_CASE("jump marks agree with the split radius") {
  const double lam = 0.5;
  const ProcessLaw law(stable1d(), SimParams{1e-3, lam, true, 0.5});
  const double delta = law.delta();
  CHECK(delta == doctest::Approx(lam / 64.0));
  RngStream rng(19, 3);
  Walker w(law, vec0(), rng);
  StepEvent ev;
  int small = 0, big = 0;
  while (w.next(ev)) {
    if (ev.mark == StepMark::diffusive) continue;
    const double r = dist(ev.x, ev.jump_origin);
    if (ev.mark == StepMark::small_jump) {
      ++small;
      CHECK(r > delta * (1 - 1e-9));
      CHECK(r <= lam * (1 + 1e-9));
    } else {
      ++big;
      CHECK(r > lam * (1 - 1e-9));
    }
  }
  CHECK(small > 0);
  CHECK(big >= 0);
}

TEST_CASE("big-jump counts are Poisson with intensity N") {
  // truncated kernel, constant tail rate: counts over the horizon are Poisson
  ModelSpec m = stable1d();
  m.kernel.family = KernelFamily::truncated_stable;
  m.kernel.trunc_radius = 1.0;
  const double horizon = 2.0;
  const ProcessLaw law(m, SimParams{1e-2, 0.5, true, horizon});
  const double N = law.big_intensity(vec0());
  CHECK(N == doctest::Approx(4.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-6));

  const std::size_t n = 20000;
  std::vector<double> counts(n);
  parallel_for(n, 4, [&](std::size_t i) {
    RngStream rng(23, i);
    Walker w(law, vec0(), rng);
    StepEvent ev;
    int c = 0;
    while (w.next(ev))
      if (ev.mark == StepMark::big_jump) ++c;
    counts[i] = c;
  });
  Acc a;
  for (double c : counts) a.add(c);
  const double mean_want = N * horizon;
  CHECK(std::abs(a.mean() - mean_want) < 3.0 * a.se());
  // Poisson: variance equals mean
  CHECK(std::abs(a.var() - mean_want) < 5.0 * mean_want / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("meyer flag strips the big channel") {
  const ProcessLaw law(stable1d(), SimParams{1e-2, 0.5, false, 1.0});
  RngStream rng(29, 1);
  Walker w(law, vec0(), rng);
  StepEvent ev;
  while (w.next(ev)) CHECK(ev.mark != StepMark::big_jump);
}

TEST_CASE("exit time of the unit-variance diffusion matches r^2") {
  const double r = 0.25;
  const ProcessLaw law(bm1d(), SimParams{r * r / 200.0, 0.5, true, 50.0 * r * r});
  const Ball ball{vec0(), r};
  const std::size_t n = 20000;
  std::vector<double> taus(n);
  std::vector<int> side(2, 0);
  std::vector<std::uint8_t> cens(n, 0);
  std::vector<std::int8_t> signs(n, 0);
  parallel_for(n, 4, [&](std::size_t i) {
    RngStream rng(31, i);
    const ExitResult er = exit_time(law, ball, vec0(), rng);
    taus[i] = er.tau;
    cens[i] = er.censored;
    signs[i] = er.exit_pos[0] > 0 ? 1 : -1;
  });
  Acc a;
  std::size_t ncens = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (cens[i]) {
      ++ncens;
      continue;
    }
    a.add(taus[i]);
    ++side[signs[i] > 0 ? 1 : 0];
  }
  CHECK(static_cast<double>(ncens) / n < 1e-3);
  // E tau = r^2 for generator (1/2) d^2/dx^2 started at the center
  CHECK(std::abs(a.mean() - r * r) < 3.0 * a.se() + law.params().dt);
  // symmetric exits
  const double p = static_cast<double>(side[1]) / a.n;
  CHECK(std::abs(p - 0.5) < 4.0 * std::sqrt(0.25 / a.n));
  // exit position sits on (or past) the boundary
  RngStream rng(31, 0);
  const ExitResult er = exit_time(law, ball, vec0(), rng);
  CHECK(std::abs(er.exit_pos[0]) >= r * (1 - 1e-9));
}

TEST_CASE("exit time scales inversely with the diffusion coefficient") {
  const double r = 0.25;
  const std::size_t n = 20000;
  auto mean_tau = [&](double a) {
    const ProcessLaw law(bm1d(a), SimParams{r * r / 400.0, 0.5, true, 100.0 * r * r});
    const Ball ball{vec0(), r};
    std::vector<double> taus(n);
    parallel_for(n, 4, [&](std::size_t i) {
      RngStream rng(37, i);  // paired seeds across the two laws
      taus[i] = exit_time(law, ball, vec0(), rng).tau;
    });
    Acc acc;
    for (double t : taus) acc.add(t);
    return acc.mean();
  };
  const double m1 = mean_tau(1.0), m4 = mean_tau(4.0);
  CHECK(m1 / m4 == doctest::Approx(4.0).epsilon(0.06));
}

TEST_CASE("bridge detection keeps the exit mean dt-stable") {
  // with endpoint-only monitoring the coarse run would overshoot by
  // 0.58 sqrt(a dt) in expectation, several times this tolerance
  const double r = 0.25;
  const Ball ball{vec0(), r};
  const std::size_t n = 30000;
  auto mean_tau = [&](double dt) {
    const ProcessLaw law(bm1d(), SimParams{dt, 0.5, true, 100.0 * r * r});
    std::vector<double> taus(n);
    parallel_for(n, 4, [&](std::size_t i) {
      RngStream rng(41 + static_cast<std::uint64_t>(1e6 * dt), i);
      taus[i] = exit_time(law, ball, vec0(), rng).tau;
    });
    Acc acc;
    for (double t : taus) acc.add(t);
    return acc.mean();
  };
  const double coarse = mean_tau(r * r / 50.0);
  const double fine = mean_tau(r * r / 800.0);
  const double se_bound = 3.0 * (r * r) * 0.82 * 2.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(coarse - fine) < se_bound + r * r / 50.0);
}

TEST_CASE("bridge crossing probability formula") {
  CHECK(bridge_cross_prob(-0.1, 0.5, 1.0) == 1.0);
  CHECK(bridge_cross_prob(0.5, -0.1, 1.0) == 1.0);
  CHECK(bridge_cross_prob(0.3, 0.4, 0.0) == 0.0);
  CHECK(bridge_cross_prob(0.3, 0.4, 0.01) ==
        doctest::Approx(std::exp(-2.0 * 0.3 * 0.4 / 0.01)));
  CHECK(bridge_cross_prob(3.0, 3.0, 0.1) == 0.0);  // underflow guard
}

TEST_CASE("effective variance folds the sub-resolution mass") {
  const ProcessLaw bm(bm1d(2.0), SimParams{1e-3, 0.5, true, 1.0});
  CHECK(effective_variance(bm, vec0(), vec1(1.0)) == doctest::Approx(2.0));
  const ProcessLaw st(stable1d(), SimParams{1e-3, 0.5, true, 1.0});
  const double v = effective_variance(st, vec0(), vec1(1.0));
  CHECK(v > 1.0);
  CHECK(v - 1.0 == doctest::Approx(st.kernel().second_moment_small(vec0(), st.delta()))
                       .epsilon(1e-9));
}

TEST_CASE("horizon censoring is flagged") {
  const ProcessLaw law(bm1d(), SimParams{1e-4, 0.5, true, 1e-3});
  const Ball ball{vec0(), 5.0};  // effectively never left
  RngStream rng(43, 0);
  const ExitResult er = exit_time(law, ball, vec0(), rng);
  CHECK(er.censored);
  CHECK(er.tau == doctest::Approx(1e-3));
}

TEST_CASE("skeleton helpers run and mark termination") {
  const PathSkeleton sk = simulate_small_jump(stable1d(), vec0(), 0.5, 1e-2, 0.5, 51);
  CHECK(sk.times.size() == sk.states.size());
  CHECK(sk.times.front() == 0.0);
  CHECK(sk.times.back() == doctest::Approx(0.5));
  for (std::size_t i = 1; i < sk.times.size(); ++i) CHECK(sk.times[i] > sk.times[i - 1]);
  for (auto mk : sk.marks) CHECK(mk != StepMark::big_jump);

  ModelSpec m = stable1d();
  const SplitReport split = split_kernel(m, 0.5);
  const PathSkeleton full = meyer_augment(m, split, vec0(), 0.5, 1e-2, 53);
  CHECK(full.times.back() == doctest::Approx(0.5));
  CHECK(full.terminated_by == PathSkeleton::End::horizon);
}
