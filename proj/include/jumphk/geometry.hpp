#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace jumphk {

// Points live in dimension 1 or 2; unused components stay zero so norms and
// arithmetic never need a dim switch.
using Vec = std::array<double, 2>;

inline constexpr int kMaxDim = 2;

inline Vec vec0() { return {0.0, 0.0}; }
inline Vec vec1(double x) { return {x, 0.0}; }
inline Vec vec2(double x, double y) { return {x, y}; }

inline Vec add(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec scale(const Vec& a, double s) { return {a[0] * s, a[1] * s}; }
inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(sub(a, b)); }

// Surface measure of the unit sphere: 2 points in d=1, circle length in d=2.
inline double sphere_measure(int dim) { return dim == 1 ? 2.0 : 2.0 * M_PI; }

struct Ball {
  Vec center;
  double radius;
  bool contains(const Vec& x) const { return dist(x, center) < radius; }
};

struct Box {
  Vec lo;
  Vec hi;
  int dim;
  bool contains(const Vec& x) const {
    for (int k = 0; k < dim; ++k)
      if (x[k] < lo[k] || x[k] > hi[k]) return false;
    return true;
  }
  double volume() const {
    double v = 1.0;
    for (int k = 0; k < dim; ++k) v *= hi[k] - lo[k];
    return v;
  }
};

}  // namespace jumphk
