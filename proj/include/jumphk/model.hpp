#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "jumphk/geometry.hpp"

namespace jumphk {

enum class CoeffFamily { constant, smooth_periodic, checkerboard };
enum class KernelFamily { zero, stable_like, truncated_stable, mixed_index, comparability_violating };

std::string to_string(CoeffFamily f);
std::string to_string(KernelFamily f);
CoeffFamily coeff_family_from_string(const std::string&);
KernelFamily kernel_family_from_string(const std::string&);

struct CoeffSpec {
  CoeffFamily family = CoeffFamily::constant;
  std::vector<double> params;  // constant d1:[a] d2:[a11,a12,a22]; smooth-periodic:[c0,c1]; checkerboard:[lo,hi]
  double lambda = 1.0;         // declared two-sided ellipticity constant
};

struct KernelSpec {
  KernelFamily family = KernelFamily::zero;
  double alpha = 0.5;          // order in (0,2)
  double beta_idx = 0.5;       // upper order for mixed_index, >= alpha
  double trunc_radius = 1.0;   // truncated_stable support radius
  double c_lo = 1.0;
  double c_hi = 1.0;
  double asym_perturb = 0.0;   // test knob: additive one-sided bump, breaks symmetry
};

struct ModelSpec {
  int dim = 1;
  CoeffSpec coeff;
  KernelSpec kernel;

  void validate() const;  // structural invariants; throws std::invalid_argument
};

// Diffusion matrix field a(x) with closed-form drift for the divergence form.
class CoeffField {
 public:
  CoeffField(const CoeffSpec& spec, int dim);

  // entries [a11, a12, a22]; a12 unused in d=1
  void matrix(const Vec& x, double out[3]) const;
  // b_j(x) = (1/2) sum_i d a_ij / d x_i
  Vec drift(const Vec& x) const;
  bool differentiable() const { return spec_.family != CoeffFamily::checkerboard; }
  double eig_min(const Vec& x) const;
  double eig_max(const Vec& x) const;
  double declared_lambda() const { return spec_.lambda; }
  const CoeffSpec& spec() const { return spec_; }

 private:
  CoeffSpec spec_;
  int dim_;
};

// One piece of a radial envelope: r in (r_lo, r_hi], value c * r^(-dim-s).
struct EnvelopePiece {
  double r_lo, r_hi, c, s;
};

// Jump kernel J(x,y) plus the radial machinery the sampler and the validators
// need: a global envelope dominating J along every ray, closed-form or
// tabulated tail masses, and small-jump second moments.
class JumpKernel {
 public:
  JumpKernel(const KernelSpec& spec, int dim);

  double operator()(const Vec& x, const Vec& y) const;
  bool is_zero() const;
  int dim() const { return dim_; }
  const KernelSpec& spec() const { return spec_; }

  // sup_x J(x, x + h) <= envelope_at(|h|); exact for the radial families.
  double envelope_at(double r) const;
  const std::vector<EnvelopePiece>& envelope() const { return env_; }
  // integral of the envelope over the shell r1 < |h| < r2 (full measure)
  double envelope_mass(double r1, double r2) const;
  // inverse-CDF draw of a radius from the envelope restricted to (r1, r2)
  double envelope_sample_radius(double r1, double r2, double u) const;

  // radial majorant valid for |h| <= 1 (moment bound input)
  double radial_majorant(double r) const;

  // ∫_{|h|<delta} |h|^2 J(x, x+h) dh with the modulation frozen at x
  double second_moment_small(const Vec& x, double delta) const;
  // N(x) = ∫_{|h|>lam} J(x, x+h) dh
  double tail_mass(const Vec& x, double lam) const;
  // true when tail_mass is constant in x
  bool tail_constant() const;
  // largest radius carrying kernel mass (inf unless truncated/zero)
  double support_radius() const;

 private:
  double profile_c(const Vec& x, const Vec& y) const;    // magnitude c(x,y)
  double profile_gamma(const Vec& x, const Vec& y) const;  // order gamma(x,y)
  double cone_factor(const Vec& x, const Vec& y) const;  // violating-family indicator pair

  KernelSpec spec_;
  int dim_;
  std::vector<EnvelopePiece> env_;
};

// ---- validators ----------------------------------------------------------

struct EllipticityReport {
  double lambda_declared = 0, lambda_observed = 0;
  double worst_eig_min = 0, worst_eig_max = 0;
  Vec worst_point = vec0();
  int n_samples = 0;
  bool pass = false;
};

struct SymmetryReport {
  double max_rel_asym = 0;
  Vec worst_x = vec0(), worst_y = vec0();
  int n_pairs = 0;
  bool pass = false;
};

struct ComparabilityReport {
  std::vector<double> radii;
  std::vector<double> k_r;       // observed sup ratio per radius (inf -> flagged)
  double kappa_fit = 0, beta_fit = 0, fit_residual = 0;
  bool all_finite = false;
  bool pass = false;
};

struct MomentReport {
  double k1 = 0;        // ∫_{|h|<=1} |h|^2 majorant
  double k2 = 0;        // sup_x ∫_{|h|>1} J
  double K_lambda = 0;  // sup_x ∫_{|h|<=lam} |h|^2 J
  double lambda = 0;
  double quadrature_error = 0;
  bool converged = false;
};

struct SplitReport {
  double lam = 0;
  double N_sup = 0;     // sup_x tail mass beyond lam
  bool has_big = false;
  bool tail_constant = false;
};

// Samples are drawn from a fixed window around the origin, wide enough to see
// every periodic cell the families use.
inline constexpr double kSampleWindow = 4.0;

EllipticityReport validate_ellipticity(const ModelSpec& m, int n_samples, std::uint64_t seed);
SymmetryReport check_symmetry(const ModelSpec& m, int n_pairs, std::uint64_t seed, double tol = 1e-12);
ComparabilityReport comparability_sweep(const ModelSpec& m, const Vec& x0,
                                        const std::vector<double>& radii, int n_samples,
                                        std::uint64_t seed);
MomentReport moment_bounds(const ModelSpec& m, double lambda, int n_base, std::uint64_t seed);
SplitReport split_kernel(const ModelSpec& m, double lambda);

}  // namespace jumphk
