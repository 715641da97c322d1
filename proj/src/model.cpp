#include "jumphk/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jumphk/quadrature.hpp"
#include "jumphk/rng.hpp"

namespace jumphk {

namespace {

constexpr double kEpsFloor = 1e-30;
constexpr double kEllTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool even_cell(double x) {
  return (static_cast<long long>(std::llround(std::floor(x))) & 1LL) == 0;
}

// sin-based modulation shared by the spatially varying families; symmetric in
// (x, y) and 1-periodic in x1 + y1.
double modulation(const Vec& x, const Vec& y) {
  return 0.5 * (1.0 + std::sin(M_PI * (x[0] + y[0])));
}

[[noreturn]] void fail_point(const char* what, const Vec& x) {
  std::ostringstream os;
  os << what << " at x=(" << x[0] << ", " << x[1] << ")";
  throw std::runtime_error(os.str());
}

Vec sample_window(RngStream& rng, int dim) {
  Vec x = vec0();
  for (int k = 0; k < dim; ++k) x[k] = rng.uniform(-kSampleWindow, kSampleWindow);
  return x;
}

Vec sample_dir(RngStream& rng, int dim) {
  if (dim == 1) return vec1(rng.uniform() < 0.5 ? 1.0 : -1.0);
  const double th = rng.uniform(0.0, 2.0 * M_PI);
  return vec2(std::cos(th), std::sin(th));
}

Vec sample_ball(RngStream& rng, int dim, const Vec& c, double radius) {
  const double u = rng.uniform();
  const double r = radius * (dim == 1 ? u : std::sqrt(u));
  return add(c, scale(sample_dir(rng, dim), r));
}

// uniform in the shell r_in < |z - c| < r_out
Vec sample_shell(RngStream& rng, int dim, const Vec& c, double r_in, double r_out) {
  const double u = rng.uniform();
  double r;
  if (dim == 1) {
    r = r_in + u * (r_out - r_in);
  } else {
    r = std::sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in));
  }
  return add(c, scale(sample_dir(rng, dim), r));
}

}  // namespace

// ---- family names ---------------------------------------------------------

std::string to_string(CoeffFamily f) {
  switch (f) {
    case CoeffFamily::constant: return "constant";
    case CoeffFamily::smooth_periodic: return "smooth-periodic";
    case CoeffFamily::checkerboard: return "checkerboard";
  }
  return "?";
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::zero: return "zero";
    case KernelFamily::stable_like: return "stable-like";
    case KernelFamily::truncated_stable: return "truncated-stable";
    case KernelFamily::mixed_index: return "mixed-index";
    case KernelFamily::comparability_violating: return "comparability-violating";
  }
  return "?";
}

CoeffFamily coeff_family_from_string(const std::string& s) {
  if (s == "constant") return CoeffFamily::constant;
  if (s == "smooth-periodic") return CoeffFamily::smooth_periodic;
  if (s == "checkerboard") return CoeffFamily::checkerboard;
  throw std::invalid_argument("unknown coefficient family: " + s);
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "zero") return KernelFamily::zero;
  if (s == "stable-like") return KernelFamily::stable_like;
  if (s == "truncated-stable") return KernelFamily::truncated_stable;
  if (s == "mixed-index") return KernelFamily::mixed_index;
  if (s == "comparability-violating") return KernelFamily::comparability_violating;
  throw std::invalid_argument("unknown kernel family: " + s);
}

// ---- ModelSpec ------------------------------------------------------------

void ModelSpec::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dim must be 1 or 2");

  const auto& cp = coeff.params;
  switch (coeff.family) {
    case CoeffFamily::constant: {
      const std::size_t want = dim == 1 ? 1 : 3;
      if (cp.size() != want)
        throw std::invalid_argument("constant coefficients need " + std::to_string(want) +
                                    " params (d=1: [a]; d=2: [a11, a12, a22])");
      if (cp[0] <= 0 || (dim == 2 && cp[2] <= 0))
        throw std::invalid_argument("diagonal coefficient entries must be positive");
      break;
    }
    case CoeffFamily::smooth_periodic:
      if (cp.size() != 2) throw std::invalid_argument("smooth-periodic needs params [c0, c1]");
      if (!(cp[0] > std::fabs(cp[1])))
        throw std::invalid_argument("smooth-periodic needs c0 > |c1| to stay elliptic");
      break;
    case CoeffFamily::checkerboard:
      if (cp.size() != 2) throw std::invalid_argument("checkerboard needs params [lo, hi]");
      if (cp[0] <= 0 || cp[1] <= 0) throw std::invalid_argument("checkerboard values must be positive");
      break;
  }
  if (!(coeff.lambda > 0)) throw std::invalid_argument("declared ellipticity constant must be positive");

  const auto& k = kernel;
  if (k.family != KernelFamily::zero) {
    if (!(k.alpha > 0 && k.alpha < 2)) throw std::invalid_argument("kernel alpha must lie in (0,2)");
    if (!(k.c_lo > 0) || k.c_hi < k.c_lo)
      throw std::invalid_argument("kernel bounds need 0 < c_lo <= c_hi");
  }
  if (k.family == KernelFamily::mixed_index && !(k.beta_idx >= k.alpha && k.beta_idx < 2))
    throw std::invalid_argument("mixed-index needs alpha <= beta_idx < 2");
  if (k.family == KernelFamily::truncated_stable && !(k.trunc_radius > 0))
    throw std::invalid_argument("truncated-stable needs trunc_radius > 0");
  if (k.asym_perturb < 0) throw std::invalid_argument("asym_perturb must be >= 0");
}

// ---- CoeffField ------------------------------------------------------------

CoeffField::CoeffField(const CoeffSpec& spec, int dim) : spec_(spec), dim_(dim) {}

void CoeffField::matrix(const Vec& x, double out[3]) const {
  out[0] = out[1] = out[2] = 0.0;
  const auto& p = spec_.params;
  switch (spec_.family) {
    case CoeffFamily::constant:
      out[0] = p[0];
      if (dim_ == 2) { out[1] = p[1]; out[2] = p[2]; }
      break;
    case CoeffFamily::smooth_periodic:
      out[0] = p[0] + p[1] * std::sin(2.0 * M_PI * x[0]);
      if (dim_ == 2) out[2] = p[0] + p[1] * std::sin(2.0 * M_PI * x[1]);
      break;
    case CoeffFamily::checkerboard: {
      long long s = 0;
      for (int k = 0; k < dim_; ++k) s += static_cast<long long>(std::llround(std::floor(x[k])));
      const double v = (s & 1LL) == 0 ? p[0] : p[1];
      out[0] = v;
      if (dim_ == 2) out[2] = v;
      break;
    }
  }
}

Vec CoeffField::drift(const Vec& x) const {
  if (!differentiable())
    throw std::runtime_error("coefficient family has no pointwise drift; use the grid chain");
  Vec b = vec0();
  if (spec_.family == CoeffFamily::smooth_periodic) {
    // a_kk = c0 + c1 sin(2 pi x_k), off-diagonals zero
    for (int k = 0; k < dim_; ++k)
      b[k] = M_PI * spec_.params[1] * std::cos(2.0 * M_PI * x[k]);
  }
  return b;  // constant family: zero
}

double CoeffField::eig_min(const Vec& x) const {
  double a[3];
  matrix(x, a);
  if (dim_ == 1) return a[0];
  const double m = 0.5 * (a[0] + a[2]);
  const double d = std::sqrt(0.25 * (a[0] - a[2]) * (a[0] - a[2]) + a[1] * a[1]);
  return m - d;
}

double CoeffField::eig_max(const Vec& x) const {
  double a[3];
  matrix(x, a);
  if (dim_ == 1) return a[0];
  const double m = 0.5 * (a[0] + a[2]);
  const double d = std::sqrt(0.25 * (a[0] - a[2]) * (a[0] - a[2]) + a[1] * a[1]);
  return m + d;
}

// ---- JumpKernel ------------------------------------------------------------

JumpKernel::JumpKernel(const KernelSpec& spec, int dim) : spec_(spec), dim_(dim) {
  const double d = dim_;
  switch (spec_.family) {
    case KernelFamily::zero:
      break;
    case KernelFamily::stable_like:
      env_.push_back({0.0, kInf, spec_.c_hi, spec_.alpha});
      break;
    case KernelFamily::truncated_stable:
      env_.push_back({0.0, spec_.trunc_radius, spec_.c_hi, spec_.alpha});
      break;
    case KernelFamily::mixed_index:
      env_.push_back({0.0, 1.0, spec_.c_lo, spec_.beta_idx});
      env_.push_back({1.0, kInf, spec_.c_lo, spec_.alpha});
      break;
    case KernelFamily::comparability_violating:
      env_.push_back({0.0, kInf, spec_.c_lo, spec_.alpha});
      break;
  }
  if (spec_.asym_perturb > 0)
    env_.push_back({0.0, 1.0, spec_.asym_perturb, -d});  // constant bump on |h| <= 1
}

double JumpKernel::profile_c(const Vec& x, const Vec& y) const {
  if (spec_.family == KernelFamily::stable_like || spec_.family == KernelFamily::truncated_stable)
    return spec_.c_lo + (spec_.c_hi - spec_.c_lo) * modulation(x, y);
  return spec_.c_lo;
}

double JumpKernel::profile_gamma(const Vec& x, const Vec& y) const {
  if (spec_.family == KernelFamily::mixed_index)
    return spec_.alpha + (spec_.beta_idx - spec_.alpha) * modulation(x, y);
  return spec_.alpha;
}

double JumpKernel::cone_factor(const Vec& x, const Vec& y) const {
  // Direction field flips with the integer cell of the first coordinate; the
  // symmetrized half-sum keeps J symmetric while starving some (x, z) pairs.
  const double ax = even_cell(x[0]) ? 1.0 : -1.0;
  const double ay = even_cell(y[0]) ? 1.0 : -1.0;
  const double h1 = y[0] - x[0];
  double f = 0.0;
  if (h1 * ax > 0) f += 0.5;
  if (-h1 * ay > 0) f += 0.5;
  return f;
}

double JumpKernel::operator()(const Vec& x, const Vec& y) const {
  const Vec h = sub(y, x);
  const double r = norm(h);
  if (!(r > 0)) return 0.0;
  double v = 0.0;
  switch (spec_.family) {
    case KernelFamily::zero:
      break;
    case KernelFamily::stable_like:
      v = profile_c(x, y) * std::pow(r, -(dim_ + spec_.alpha));
      break;
    case KernelFamily::truncated_stable:
      v = r <= spec_.trunc_radius ? profile_c(x, y) * std::pow(r, -(dim_ + spec_.alpha)) : 0.0;
      break;
    case KernelFamily::mixed_index:
      v = spec_.c_lo * std::pow(r, -(dim_ + profile_gamma(x, y)));
      break;
    case KernelFamily::comparability_violating:
      v = spec_.c_lo * std::pow(r, -(dim_ + spec_.alpha)) * cone_factor(x, y);
      break;
  }
  if (spec_.asym_perturb > 0 && x[0] > y[0] && r <= 1.0) v += spec_.asym_perturb;
  return v;
}

bool JumpKernel::is_zero() const {
  return spec_.family == KernelFamily::zero && spec_.asym_perturb == 0.0;
}

double JumpKernel::envelope_at(double r) const {
  double v = 0.0;
  for (const auto& p : env_)
    if (r > p.r_lo && r <= p.r_hi) v += p.c * std::pow(r, -(dim_ + p.s));
  return v;
}

namespace {
// ∫ r^{-1-s} dr over (a, b), without the c * omega_d prefactor
double power_integral(double s, double a, double b) {
  if (!(b > a)) return 0.0;
  if (s > 0) {
    const double hi = std::isinf(b) ? 0.0 : std::pow(b, -s);
    return (std::pow(a, -s) - hi) / s;
  }
  if (s == 0) {
    if (std::isinf(b)) return kInf;
    return std::log(b / a);
  }
  if (std::isinf(b)) return kInf;
  return (std::pow(b, -s) - std::pow(a, -s)) / (-s);
}
}  // namespace

double JumpKernel::envelope_mass(double r1, double r2) const {
  const double omega = sphere_measure(dim_);
  double total = 0.0;
  for (const auto& p : env_) {
    const double a = std::max(r1, p.r_lo), b = std::min(r2, p.r_hi);
    if (b > a) total += omega * p.c * power_integral(p.s, a, b);
  }
  return total;
}

double JumpKernel::envelope_sample_radius(double r1, double r2, double u) const {
  const double omega = sphere_measure(dim_);
  // walk the clipped pieces; u selects the piece and the within-piece quantile
  double total = envelope_mass(r1, r2);
  if (!(total > 0)) return r1;
  double target = u * total;
  for (const auto& p : env_) {
    const double a = std::max(r1, p.r_lo), b = std::min(r2, p.r_hi);
    if (!(b > a)) continue;
    const double mass = omega * p.c * power_integral(p.s, a, b);
    if (target > mass) {
      target -= mass;
      continue;
    }
    const double q = std::min(1.0, std::max(0.0, target / mass));
    const double s = p.s;
    if (s > 0) {
      const double fa = std::pow(a, -s);
      const double fb = std::isinf(b) ? 0.0 : std::pow(b, -s);
      return std::pow(fa - q * (fa - fb), -1.0 / s);
    }
    if (s == 0) return a * std::pow(b / a, q);
    const double fa = std::pow(a, -s), fb = std::pow(b, -s);
    return std::pow(fa + q * (fb - fa), -1.0 / s);
  }
  return r2;  // numerical slack: fell off the end
}

double JumpKernel::radial_majorant(double r) const {
  // valid for r <= 1; coincides with the envelope there
  return envelope_at(std::min(r, 1.0));
}

double JumpKernel::second_moment_small(const Vec& x, double delta) const {
  if (is_zero() || !(delta > 0)) return 0.0;
  double g = profile_gamma(x, x);
  double c = profile_c(x, x);
  double fac = spec_.family == KernelFamily::comparability_violating ? 0.5 : 1.0;
  double reach = delta;
  if (spec_.family == KernelFamily::truncated_stable) reach = std::min(delta, spec_.trunc_radius);
  double v = fac * c * sphere_measure(dim_) * std::pow(reach, 2.0 - g) / (2.0 - g);
  if (spec_.asym_perturb > 0) {
    const double rr = std::min(delta, 1.0);
    v += spec_.asym_perturb * 0.5 * sphere_measure(dim_) * std::pow(rr, dim_ + 2.0) / (dim_ + 2.0);
  }
  return v;
}

double JumpKernel::support_radius() const {
  if (is_zero()) return 0.0;
  double r = 0.0;
  for (const auto& p : env_) r = std::max(r, p.r_hi);
  return r;
}

bool JumpKernel::tail_constant() const {
  if (is_zero()) return true;
  const bool mod_c = (spec_.family == KernelFamily::stable_like ||
                      spec_.family == KernelFamily::truncated_stable) &&
                     spec_.c_hi != spec_.c_lo;
  return !mod_c && spec_.family != KernelFamily::mixed_index &&
         spec_.family != KernelFamily::comparability_violating && spec_.asym_perturb == 0.0;
}

double JumpKernel::tail_mass(const Vec& x, double lam) const {
  if (!(lam > 0)) throw std::invalid_argument("tail cutoff must be positive");
  if (is_zero()) return 0.0;
  const double sup = support_radius();
  if (lam >= sup) return 0.0;

  if (tail_constant()) {
    // pure radial profile c r^{-d-alpha} up to the support radius
    const double a = spec_.alpha, c = spec_.c_lo;
    const double hi = std::isinf(sup) ? 0.0 : std::pow(sup, -a);
    return c * sphere_measure(dim_) * (std::pow(lam, -a) - hi) / a;
  }

  QuadOptions opt;
  opt.rel_tol = 1e-8;
  QuadResult q = integrate_shell(
      dim_, [&](const Vec& h) { return (*this)(x, add(x, h)); }, lam,
      std::isinf(sup) ? kInf : sup, opt);
  return q.value;
}

// ---- validators -------------------------------------------------------------

EllipticityReport validate_ellipticity(const ModelSpec& m, int n_samples, std::uint64_t seed) {
  m.validate();
  CoeffField field(m.coeff, m.dim);
  RngStream rng(seed, 0);
  EllipticityReport rep;
  rep.lambda_declared = m.coeff.lambda;
  rep.n_samples = n_samples;
  double worst = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const Vec x = sample_window(rng, m.dim);
    double a[3];
    field.matrix(x, a);
    for (int k = 0; k < 3; ++k)
      if (!std::isfinite(a[k])) fail_point("non-finite coefficient entry", x);
    const double lo = field.eig_min(x), hi = field.eig_max(x);
    double score;
    if (lo <= 0) {
      score = kInf;
    } else {
      score = std::max(hi, 1.0 / lo);
    }
    if (score > worst) {
      worst = score;
      rep.worst_point = x;
      rep.worst_eig_min = lo;
      rep.worst_eig_max = hi;
    }
  }
  rep.lambda_observed = worst;
  rep.pass = worst <= m.coeff.lambda * (1.0 + kEllTol);
  return rep;
}

SymmetryReport check_symmetry(const ModelSpec& m, int n_pairs, std::uint64_t seed, double tol) {
  m.validate();
  JumpKernel J(m.kernel, m.dim);
  RngStream rng(seed, 1);
  SymmetryReport rep;
  rep.n_pairs = n_pairs;
  for (int i = 0; i < n_pairs; ++i) {
    const Vec x = sample_window(rng, m.dim);
    // log-uniform separation probes both the singular and the tail regime
    const double r = std::exp(rng.uniform(std::log(1e-3), std::log(4.0)));
    const Vec y = add(x, scale(sample_dir(rng, m.dim), r));
    const double jxy = J(x, y), jyx = J(y, x);
    if (!std::isfinite(jxy) || !std::isfinite(jyx)) fail_point("non-finite kernel value", x);
    if (jxy < 0 || jyx < 0) fail_point("negative kernel value", x);
    const double rel = std::fabs(jxy - jyx) / std::max(std::max(jxy, jyx), kEpsFloor);
    if (rel > rep.max_rel_asym) {
      rep.max_rel_asym = rel;
      rep.worst_x = x;
      rep.worst_y = y;
    }
  }
  rep.pass = rep.max_rel_asym <= tol;
  return rep;
}

ComparabilityReport comparability_sweep(const ModelSpec& m, const Vec& x0,
                                        const std::vector<double>& radii, int n_samples,
                                        std::uint64_t seed) {
  m.validate();
  if (radii.empty()) throw std::invalid_argument("comparability sweep needs at least one radius");
  for (double r : radii)
    if (!(r > 0) || r >= kSampleWindow)
      throw std::invalid_argument("comparability radii must lie in (0, 4)");

  JumpKernel J(m.kernel, m.dim);
  ComparabilityReport rep;
  rep.radii = radii;
  rep.all_finite = true;

  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    RngStream rng(seed, 100 + ri);
    double k_best = 1.0;
    bool infinite = false;
    for (int i = 0; i < n_samples && !infinite; ++i) {
      const Vec x = sample_ball(rng, m.dim, x0, 0.5 * r);
      const Vec y = sample_ball(rng, m.dim, x0, 0.5 * r);
      const Vec z = sample_shell(rng, m.dim, x0, r, kSampleWindow);
      const double jxz = J(x, z), jyz = J(y, z);
      if (jyz <= kEpsFloor && jxz <= kEpsFloor) continue;
      if (jyz <= kEpsFloor || jxz <= kEpsFloor) {
        infinite = true;
        break;
      }
      k_best = std::max(k_best, std::max(jxz / jyz, jyz / jxz));
    }
    rep.k_r.push_back(infinite ? kInf : k_best);
    if (infinite) rep.all_finite = false;
  }

  // least squares of log k_r on log(1/r), finite entries only
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(rep.k_r[i])) continue;
    const double X = std::log(1.0 / radii[i]);
    const double Y = std::log(std::max(rep.k_r[i], 1.0));
    sx += X; sy += Y; sxx += X * X; sxy += X * Y;
    ++n;
  }
  if (n >= 2 && sxx * n - sx * sx > 1e-12) {
    rep.beta_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.kappa_fit = std::exp((sy - rep.beta_fit * sx) / n);
  } else if (n >= 1) {
    rep.beta_fit = 0.0;
    rep.kappa_fit = std::exp(sy / std::max(n, 1));
  }
  double rss = 0;
  int nr = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(rep.k_r[i])) continue;
    const double X = std::log(1.0 / radii[i]);
    const double Y = std::log(std::max(rep.k_r[i], 1.0));
    const double fit = std::log(std::max(rep.kappa_fit, kEpsFloor)) + rep.beta_fit * X;
    rss += (Y - fit) * (Y - fit);
    ++nr;
  }
  rep.fit_residual = nr > 0 ? std::sqrt(rss / nr) : 0.0;
  const double kFitTol = 0.5;  // RMS in log space
  rep.pass = rep.all_finite && rep.fit_residual <= kFitTol;
  return rep;
}

MomentReport moment_bounds(const ModelSpec& m, double lambda, int n_base, std::uint64_t seed) {
  m.validate();
  if (!(lambda > 0)) throw std::invalid_argument("moment cutoff lambda must be positive");
  JumpKernel J(m.kernel, m.dim);
  MomentReport rep;
  rep.lambda = lambda;
  rep.converged = true;
  if (J.is_zero()) return rep;

  QuadOptions opt;
  const double omega = sphere_measure(m.dim);

  QuadResult k1 = integrate_radial(
      [&](double r) { return omega * std::pow(r, m.dim + 1) * J.radial_majorant(r); }, 0.0, 1.0, opt);
  rep.k1 = k1.value;
  rep.quadrature_error += k1.error;
  rep.converged = rep.converged && k1.converged;

  RngStream rng(seed, 2);
  std::vector<Vec> base{vec0()};
  for (int i = 1; i < n_base; ++i) base.push_back(sample_window(rng, m.dim));

  const double sup = J.support_radius();
  for (const Vec& x : base) {
    QuadResult k2 = integrate_shell(
        m.dim, [&](const Vec& h) { return J(x, add(x, h)); }, 1.0,
        std::isinf(sup) ? kInf : std::max(sup, 1.0 + 1e-12), opt);
    rep.k2 = std::max(rep.k2, k2.value);
    rep.quadrature_error += k2.error;
    rep.converged = rep.converged && k2.converged;

    QuadResult K = integrate_shell(
        m.dim, [&](const Vec& h) { return norm2(h) * J(x, add(x, h)); }, 0.0, lambda, opt);
    rep.K_lambda = std::max(rep.K_lambda, K.value);
    rep.quadrature_error += K.error;
    rep.converged = rep.converged && K.converged;
  }
  return rep;
}

SplitReport split_kernel(const ModelSpec& m, double lambda) {
  m.validate();
  if (!(lambda > 0)) throw std::invalid_argument("split cutoff lambda must be positive");
  JumpKernel J(m.kernel, m.dim);
  SplitReport rep;
  rep.lam = lambda;
  rep.tail_constant = J.tail_constant();
  if (rep.tail_constant) {
    rep.N_sup = J.tail_mass(vec0(), lambda);
  } else {
    // the families vary along x1 with period <= 2; scan one period densely
    double sup = 0;
    for (int i = 0; i < 129; ++i) {
      Vec x = vec1(-1.0 + 2.0 * i / 128.0);
      sup = std::max(sup, J.tail_mass(x, lambda));
    }
    rep.N_sup = sup;
  }
  rep.has_big = rep.N_sup > 0;
  return rep;
}

}  // namespace jumphk
