#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jumphk/grid.hpp"
#include "jumphk/rng.hpp"

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

GridSpec gs(double extent, double h,
            BoundaryMode mode = BoundaryMode::periodic) {
  GridSpec g;
  g.extent = extent;
  g.h = h;
  g.boundary = mode;
  return g;
}

}  // namespace

TEST_CASE("generator is symmetric and conservative on the torus") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(2.0, 0.125));
  const SpMat L = gen.full();
  const SpMat D = SpMat(L - SpMat(L.transpose()));
  CHECK(Eigen::Map<const Eigen::VectorXd>(D.valuePtr(), D.nonZeros())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(gen.size());
  CHECK((L * ones).cwiseAbs().maxCoeff() < 1e-9);
  for (double k : gen.kill()) CHECK(k == 0.0);
}

TEST_CASE("restricted mode kills at the open boundary") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(1.0, 0.125, BoundaryMode::restricted));
  double total_kill = 0;
  for (double k : gen.kill()) total_kill += k;
  CHECK(total_kill > 0);
  const SpMat L = gen.full();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(gen.size());
  CHECK((L * ones).maxCoeff() < 1e-12);  // substochastic
}

TEST_CASE("quadratic form identity") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(1.0, 0.25));
  RngStream g(3, 0);
  Eigen::VectorXd f(gen.size());
  for (int i = 0; i < gen.size(); ++i) f[i] = g.normal();
  const double viaform = gen.form_energy(f);
  const double viamat = -f.dot(gen.full() * f) * gen.cell_volume();
  CHECK(viaform == doctest::Approx(viamat).epsilon(1e-10));
  CHECK(gen.form_energy_local(f) + gen.form_energy_jump(f) ==
        doctest::Approx(viaform).epsilon(1e-10));
  CHECK(gen.form_energy(Eigen::VectorXd::Ones(gen.size())) == doctest::Approx(0.0));
}

TEST_CASE("heat row against the circulant eigendecomposition") {
  // d=1, constant a, no jumps: eigenvalues -(a/h^2)(1 - cos(2 pi k / n))
  const double a = 2.0, h = 0.125, extent = 2.0, t = 0.37;
  const auto gen = DiscreteGenerator::assemble(bm1d(a), gs(extent, h));
  const int n = gen.size();
  const int src = gen.nearest_node(vec0());
  const Eigen::VectorXd row = gen.heat_row(t, src);
  for (int j = 0; j < n; ++j) {
    double want = 0;
    for (int k = 0; k < n; ++k) {
      const double lam = -(a / (h * h)) * (1.0 - std::cos(2.0 * M_PI * k / n));
      want += std::exp(t * lam) * std::cos(2.0 * M_PI * k * (j - src) / n);
    }
    want /= n;
    CHECK(row[j] == doctest::Approx(want).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("heat row conserves mass, stays positive, is symmetric") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(2.0, 0.125));
  const int i = gen.nearest_node(vec1(0.5)), j = gen.nearest_node(vec1(-0.75));
  for (double t : {0.05, 0.5, 2.0}) {
    const Eigen::VectorXd ri = gen.heat_row(t, i);
    CHECK(ri.sum() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(ri.minCoeff() >= 0.0);
    const Eigen::VectorXd rj = gen.heat_row(t, j);
    CHECK(ri[j] == doctest::Approx(rj[i]).epsilon(1e-8));
  }
}

TEST_CASE("semigroup property of heat rows") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(1.0, 0.25));
  const int n = gen.size();
  const int src = gen.nearest_node(vec0());
  const double t = 0.2;
  const Eigen::VectorXd two = gen.heat_row(2 * t, src);
  const Eigen::VectorXd one = gen.heat_row(t, src);
  Eigen::VectorXd composed = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    if (one[k] == 0.0) continue;
    composed += one[k] * gen.heat_row(t, k);
  }
  for (int j = 0; j < n; ++j) CHECK(composed[j] == doctest::Approx(two[j]).epsilon(1e-7).scale(1.0));
}

TEST_CASE("crank-nicolson path matches the periodic Gaussian") {
  // 2048 nodes exceeds the spectral cap, forcing the marching path; the
  // continuum answer is the wrapped heat kernel mass per cell
  const double h = 1.0 / 256, extent = 4.0, t = 0.125, a = 1.0;
  const auto gen = DiscreteGenerator::assemble(bm1d(a), gs(extent, h));
  REQUIRE(gen.size() == 2048);
  REQUIRE(gen.size() > DiscreteGenerator::kSpectralCap);
  const int src = gen.nearest_node(vec0());
  const Eigen::VectorXd row = gen.heat_row(t, src);
  const double L = 2.0 * extent;
  double maxerr = 0;
  for (int j = 0; j < gen.size(); ++j) {
    double x = gen.node(j)[0] - gen.node(src)[0];
    x -= L * std::round(x / L);
    double dens = 0;
    for (int m = -3; m <= 3; ++m) {
      const double u = x + m * L;
      dens += std::exp(-u * u / (2.0 * a * t)) / std::sqrt(2.0 * M_PI * a * t);
    }
    maxerr = std::max(maxerr, std::abs(row[j] / h - dens));
  }
  CHECK(maxerr < 2e-3);
}

TEST_CASE("chain sampler agrees with heat rows") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(1.0, 0.25));
  const int src = gen.nearest_node(vec0());
  const std::vector<double> ts = {0.1, 0.4};
  const int n_chains = 40000;
  const auto counts = gen.chain_sample(ts, src, n_chains, 77, 4);
  REQUIRE(counts.size() == ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const Eigen::VectorXd p = gen.heat_row(ts[k], src);
    std::int64_t total = 0;
    for (auto c : counts[k]) total += c;
    CHECK(total == n_chains);
    for (int j = 0; j < gen.size(); ++j) {
      const double mean = n_chains * p[j];
      const double sd = std::sqrt(std::max(mean * (1.0 - p[j]), 1.0));
      CHECK(std::abs(counts[k][j] - mean) < 4.5 * sd);
    }
  }
}

TEST_CASE("chain sampler is worker-count deterministic") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(1.0, 0.25));
  const int src = gen.nearest_node(vec1(0.25));
  const auto a = gen.chain_sample({0.3}, src, 5000, 13, 1);
  const auto b = gen.chain_sample({0.3}, src, 5000, 13, 4);
  CHECK(a == b);
}

TEST_CASE("discrete harmonic functions with no jumps are linear") {
  const auto gen = DiscreteGenerator::assemble(bm1d(), gs(1.0, 1.0 / 32, BoundaryMode::restricted));
  const auto mask = ball_mask(gen, vec0(), 0.5);
  HarmonicSolver solver(gen, mask);
  CHECK(solver.interior_size() > 0);
  Eigen::VectorXd data(gen.size());
  for (int i = 0; i < gen.size(); ++i) data[i] = 2.0 * gen.node(i)[0] + 0.25;
  double resid = 0;
  const Eigen::VectorXd u = solver.solve(data, &resid);
  CHECK(resid < 1e-10);
  for (int i = 0; i < gen.size(); ++i)
    CHECK(u[i] == doctest::Approx(2.0 * gen.node(i)[0] + 0.25).epsilon(1e-9));
}

TEST_CASE("harmonic solve obeys the maximum principle with jumps") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(2.0, 0.125));
  const auto mask = ball_mask(gen, vec0(), 0.5);
  HarmonicSolver solver(gen, mask);
  RngStream g(5, 2);
  Eigen::VectorXd data(gen.size());
  for (int i = 0; i < gen.size(); ++i) data[i] = g.uniform(0.0, 1.0);
  const Eigen::VectorXd u = solver.solve(data);
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < gen.size(); ++i) {
    if (mask[i]) continue;
    lo = std::min(lo, data[i]);
    hi = std::max(hi, data[i]);
    CHECK(u[i] == data[i]);  // data passes through
  }
  for (int i = 0; i < gen.size(); ++i) {
    CHECK(u[i] >= lo - 1e-9);
    CHECK(u[i] <= hi + 1e-9);
  }
}

TEST_CASE("node caps and spacing are enforced") {
  GridSpec g = gs(4.0, 1.0 / 2048);
  CHECK_THROWS_AS(DiscreteGenerator::assemble(bm1d(), g), std::invalid_argument);
  g = gs(4.0, 1.0 / 1024);  // 8192 nodes: fine without jumps, refused with them
  CHECK_NOTHROW(DiscreteGenerator::assemble(bm1d(), g));
  CHECK_THROWS_AS(DiscreteGenerator::assemble(stable1d(), g), std::invalid_argument);
  g = gs(4.0, 0.3);  // extent not a multiple of h
  CHECK_THROWS_AS(DiscreteGenerator::assemble(bm1d(), g), std::invalid_argument);
}

TEST_CASE("export format header and size") {
  const auto gen = DiscreteGenerator::assemble(stable1d(), gs(1.0, 0.5));
  const std::string text = gen.export_text();
  CHECK(text.rfind("# discrete generator export v1", 0) == 0);
  CHECK(text.find("nodes") != std::string::npos);
  // one coordinate line per node must be present
  CHECK(std::count(text.begin(), text.end(), '\n') > gen.size());
}

TEST_CASE("nearest node is exact on lattice points") {
  const auto gen = DiscreteGenerator::assemble(bm1d(), gs(1.0, 0.25));
  for (int i = 0; i < gen.size(); ++i) CHECK(gen.nearest_node(gen.node(i)) == i);
  CHECK(gen.nearest_node(vec1(0.26)) == gen.nearest_node(vec1(0.25)));
}
