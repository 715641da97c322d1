#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jumphk/quadrature.hpp"

using namespace jumphk;

TEST_CASE("interval integrals hit closed forms") {
  auto r = integrate_interval([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  r = integrate_interval([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));

  // standard normal mass over [-5, 5]
  r = integrate_interval([](double x) { return std::exp(-0.5 * x * x); }, -5.0, 5.0);
  CHECK(r.value == doctest::Approx(std::sqrt(2.0 * M_PI) * (std::erf(5.0 / std::sqrt(2.0))))
                       .epsilon(1e-9));
}

TEST_CASE("radial integrals handle both improper endpoints") {
  // integral of r^{-3/2} over [1, inf) = 2
  auto r = integrate_radial([](double s) { return std::pow(s, -1.5); }, 1.0,
                            std::numeric_limits<double>::infinity());
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));

  // integrable singularity at zero: r^{-1/2} over (0, 1] = 2
  r = integrate_radial([](double s) { return std::pow(s, -0.5); }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));

  // both at once: r^2 e^{-r} over (0, inf) = Gamma(3) = 2
  r = integrate_radial([](double s) { return s * s * std::exp(-s); }, 0.0,
                       std::numeric_limits<double>::infinity());
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("shell integrals carry the surface measure") {
  // d=1: two rays, 2 * integral_1^inf r^{-3/2} dr = 4
  auto r = integrate_shell(1, [](const Vec& z) { return std::pow(std::abs(z[0]), -1.5); }, 1.0,
                           std::numeric_limits<double>::infinity());
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-8));

  // d=2: 2*pi * integral_1^inf r^{-2.5} r dr = 4*pi
  r = integrate_shell(2, [](const Vec& z) { return std::pow(norm(z), -2.5); }, 1.0,
                      std::numeric_limits<double>::infinity());
  CHECK(r.value == doctest::Approx(4.0 * M_PI).epsilon(1e-7));

  // angular dependence: f = x^2/|z|^4 over 1 < |z| < 2 in d=2 equals
  // pi * ln 2 (half the radial mass of 1/|z|^2)
  r = integrate_shell(2, [](const Vec& z) {
        const double n2 = norm2(z);
        return z[0] * z[0] / (n2 * n2);
      },
      1.0, 2.0);
  CHECK(r.value == doctest::Approx(M_PI * std::log(2.0)).epsilon(1e-7));
}

TEST_CASE("box integrals in both dimensions") {
  Box b1{vec1(0.0), vec1(1.0), 1};
  auto r = integrate_box(1, [](const Vec& z) { return z[0] * z[0]; }, b1);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  Box b2{vec2(0.0, 0.0), vec2(1.0, 1.0), 2};
  r = integrate_box(2, [](const Vec& z) { return z[0] * z[0] * z[1] * z[1]; }, b2);
  CHECK(r.value == doctest::Approx(1.0 / 9.0).epsilon(1e-8));

  Box b3{vec2(-1.0, 0.5), vec2(2.0, 2.5), 2};
  CHECK(b3.volume() == doctest::Approx(6.0));
}
