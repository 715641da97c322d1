#include "jumphk/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace jumphk {
namespace {

constexpr double kTiny = 1e-300;

struct SimpsonAcc {
  double err = 0.0;
  bool depth_hit = false;
};

double simpson_rec(const Fn1& f, double a, double fa, double b, double fb, double m,
                   double fm, double whole, double tol, int depth, SimpsonAcc& acc) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    acc.depth_hit = true;
    acc.err += std::fabs(delta);
    return left + right + delta / 15.0;
  }
  if (std::fabs(delta) <= 15.0 * tol) {
    acc.err += std::fabs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, acc) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, acc);
}

QuadResult simpson(const Fn1& f, double a, double b, double tol, int max_depth) {
  QuadResult out;
  if (!(b > a)) return out;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  SimpsonAcc acc;
  out.value = simpson_rec(f, a, fa, b, fb, m, fm, whole, std::max(tol, kTiny), max_depth, acc);
  out.error = acc.err;
  return out;
}

}  // namespace

QuadResult integrate_interval(const Fn1& f, double a, double b, const QuadOptions& opt) {
  // Scale-free tolerance: one coarse pass estimates magnitude, second pass refines.
  QuadResult coarse = simpson(f, a, b, 1e-4, opt.max_depth / 2);
  const double scale = std::max(std::fabs(coarse.value), kTiny);
  return simpson(f, a, b, opt.rel_tol * scale, opt.max_depth);
}

QuadResult integrate_radial(const Fn1& g, double r1, double r2, const QuadOptions& opt) {
  QuadResult out;
  if (!(r2 > r1) || r2 <= 0.0) return out;

  const bool open_tail = std::isinf(r2);
  // Anchor radius separating the descending (singular end) and ascending parts.
  double anchor = r1;
  if (r1 <= 0.0) {
    anchor = open_tail ? 1.0 : r2;
    double hi = anchor;
    for (int k = 0; k < opt.max_shells; ++k) {
      const double lo = 0.5 * hi;
      QuadResult seg = integrate_interval(g, lo, hi, opt);
      out.value += seg.value;
      out.error += seg.error;
      if (k >= 4 && std::fabs(seg.value) <= opt.rel_tol * std::max(std::fabs(out.value), kTiny)) {
        hi = 0.0;
        break;
      }
      hi = lo;
    }
    if (hi > 0.0) out.converged = false;  // singular end never settled
  }

  if (open_tail) {
    double lo = anchor;
    double prev = std::numeric_limits<double>::infinity();
    int growing = 0;
    bool settled = false;
    for (int k = 0; k < opt.max_shells; ++k) {
      const double hi = 2.0 * lo;
      QuadResult seg = integrate_interval(g, lo, hi, opt);
      out.value += seg.value;
      out.error += seg.error;
      const double mag = std::fabs(seg.value);
      if (k >= 4 && mag <= opt.rel_tol * std::max(std::fabs(out.value), kTiny)) {
        settled = true;
        break;
      }
      growing = mag >= prev ? growing + 1 : 0;
      if (growing > 12) break;  // tail not decaying: divergent integral
      prev = mag;
      lo = hi;
    }
    if (!settled) out.converged = false;
  } else if (r2 > anchor) {
    // Finite range: geometric segments of ratio <= 2 keep Simpson honest on
    // power-law integrands.
    double lo = anchor;
    while (lo < r2) {
      const double hi = std::min(r2, 2.0 * lo);
      QuadResult seg = integrate_interval(g, lo, hi, opt);
      out.value += seg.value;
      out.error += seg.error;
      lo = hi;
    }
  }
  return out;
}

QuadResult integrate_shell(int dim, const FnV& f, double r1, double r2, const QuadOptions& opt) {
  if (dim == 1) {
    QuadResult out;
    for (double s : {1.0, -1.0}) {
      QuadResult part = integrate_radial([&](double r) { return f(vec1(s * r)); }, r1, r2, opt);
      out.value += part.value;
      out.error += part.error;
      out.converged = out.converged && part.converged;
    }
    return out;
  }

  // d=2: trapezoid over angles (periodic, so smooth kernels converge fast),
  // doubled until the value is stable.
  auto eval_dirs = [&](int n, QuadResult& res) {
    res = QuadResult{};
    const double w = 2.0 * M_PI / n;
    for (int i = 0; i < n; ++i) {
      const double th = (i + 0.5) * w;
      const double c = std::cos(th), s = std::sin(th);
      QuadResult rad = integrate_radial(
          [&](double r) { return r * f(vec2(r * c, r * s)); }, r1, r2, opt);
      res.value += w * rad.value;
      res.error += w * rad.error;
      res.converged = res.converged && rad.converged;
    }
  };

  QuadResult cur;
  eval_dirs(opt.min_dirs, cur);
  for (int n = 2 * opt.min_dirs; n <= opt.max_dirs; n *= 2) {
    QuadResult next;
    eval_dirs(n, next);
    const double delta = std::fabs(next.value - cur.value);
    next.error += delta;
    cur = next;
    if (delta <= opt.rel_tol * std::max(std::fabs(next.value), kTiny)) break;
  }
  return cur;
}

QuadResult integrate_box(int dim, const FnV& f, const Box& box, const QuadOptions& opt) {
  if (dim == 1) {
    return integrate_interval([&](double x) { return f(vec1(x)); }, box.lo[0], box.hi[0], opt);
  }
  QuadOptions inner = opt;
  inner.rel_tol = opt.rel_tol * 0.25;
  QuadResult out;
  Fn1 outer = [&](double x) {
    QuadResult row = integrate_interval(
        [&](double y) { return f(vec2(x, y)); }, box.lo[1], box.hi[1], inner);
    return row.value;
  };
  out = integrate_interval(outer, box.lo[0], box.hi[0], opt);
  return out;
}

}  // namespace jumphk
