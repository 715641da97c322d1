#pragma once

#include <functional>
#include <limits>

#include "jumphk/geometry.hpp"

namespace jumphk {

struct QuadOptions {
  double rel_tol = 1e-8;   // relative tolerance per radial segment
  int max_depth = 30;      // adaptive Simpson recursion cap
  int min_dirs = 16;       // d=2 angular resolution (doubled until stable)
  int max_dirs = 1024;
  int max_shells = 400;    // dyadic shell cap before declaring divergence
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;      // accumulated local error estimates
  bool converged = true;   // false when a tail fails to decay or caps are hit
};

using Fn1 = std::function<double(double)>;
using FnV = std::function<double(const Vec&)>;

// Adaptive Simpson over a finite interval.
QuadResult integrate_interval(const Fn1& f, double a, double b, const QuadOptions& opt = {});

// Integral of g over (r1, r2) with dyadic segmentation; r1 may be 0 (integrable
// singularities resolved by descending shells), r2 may be +inf (ascending
// shells until the tail stops contributing; non-decaying tails flag divergence).
QuadResult integrate_radial(const Fn1& g, double r1, double r2, const QuadOptions& opt = {});

// Integral of f(h) dh over the shell r1 < |h| < r2 in dimension dim. d=2 uses
// trapezoid in angle (spectrally accurate for smooth kernels) with doubling.
QuadResult integrate_shell(int dim, const FnV& f, double r1, double r2, const QuadOptions& opt = {});

// Integral of f over an axis-aligned box (dim 1 or 2), nested adaptive Simpson.
QuadResult integrate_box(int dim, const FnV& f, const Box& box, const QuadOptions& opt = {});

}  // namespace jumphk
