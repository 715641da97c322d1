#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "jumphk/grid.hpp"
#include "jumphk/model.hpp"
#include "jumphk/pathsim.hpp"

namespace jumphk {

struct McParams {
  int n_paths = 10000;
  double dt = 1e-3;
  double lam = 0.5;
  double horizon = 1.0;  // terminal time for the density claims
  int workers = 1;
  std::uint64_t seed = 1;
};

// numeric table with named columns; serialized to the report and the CSV
struct DiagTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  void add(std::initializer_list<double> row) { rows.emplace_back(row); }
};

struct ClaimCheck {
  std::string claim_id;
  bool pass = false;
  std::map<std::string, double> fitted;      // fitted constants/exponents
  std::map<std::string, double> tolerances;  // pinned rule constants
  DiagTable diagnostics;
  std::vector<std::string> notes;
};

// ---- density ---------------------------------------------------------------

struct DensityEstimate {
  double t = 0;
  Vec center = vec0();
  double half_width = 0;
  double bin_width = 0;
  int bins_per_axis = 0;
  // row-major over axes in d=2
  std::vector<std::int64_t> counts;
  std::vector<double> density;
  std::vector<double> se;
  double inside_fraction = 0;
  Vec bin_center(int flat, int dim) const;
};

// Marginal histograms at the snapshot times, one Monte Carlo sweep. Bin width
// follows max(2 sqrt(dt)/5, Freedman-Diaconis) per snapshot.
std::vector<DensityEstimate> estimate_density(const ModelSpec& model, const Vec& x0,
                                              const std::vector<double>& t_grid,
                                              const McParams& mc, double half_width);

struct OnDiagonalFit {
  double slope = 0, slope_se = 0, intercept = 0;
  std::vector<double> t, p_hat, se;
};

// log p(t, x0, x0) regressed on log t; center bins scale with sqrt(t) so the
// relative bin bias is t-independent and cancels from the slope.
OnDiagonalFit on_diagonal_decay(const ModelSpec& model, const Vec& x0,
                                const std::vector<double>& t_grid, const McParams& mc);

// ---- boundary data / test function families ---------------------------------

// Bounded data on the complement of a ball: indicator shells, smooth bumps,
// near-point concentrations, and (second half) one-sided slabs that probe
// directional kernels. Values in [-1, 1]; nonneg when requested.
class BoundaryDataFamily {
 public:
  // indices >= escalate_from switch to cell-aligned one-sided slabs
  BoundaryDataFamily(int dim, Vec center, double R, std::uint64_t seed, bool nonneg,
                     int escalate_from = 1 << 30);
  // evaluate sample k at a point (continuum function; grids sample it)
  double eval(int k, const Vec& x) const;

 private:
  struct Item {
    int kind;       // 0 radial shell, 1 smooth bump, 3 axis slab
    double a, b;    // shell radii or slab window on axis 0
    Vec dir;        // bump center offset
    double width;   // bump width
    double amp;
  };
  Item make(int k) const;
  int dim_;
  Vec center_;
  double R_;
  std::uint64_t seed_;
  bool nonneg_;
  int escalate_;
};

// localized bump + piecewise-linear perturbations, for the functional
// inequalities; continuum functions evaluated on grid nodes
class TestFunctionFamily {
 public:
  TestFunctionFamily(int dim, double extent, std::uint64_t seed);
  double eval(int k, const Vec& x) const;

 private:
  int dim_;
  double extent_;
  std::uint64_t seed_;
};

// ---- claim estimators --------------------------------------------------------

// thm_2_4: off-diagonal decay of the truncated-jump oracle
ClaimCheck check_upper_bound(const ModelSpec& model, const GridSpec& grid,
                             std::vector<double> t_grid = {});

// thm_2_5: near-diagonal lower bound via Monte Carlo density
ClaimCheck check_lower_bound(const ModelSpec& model, const McParams& mc,
                             std::vector<double> t_grid = {});

// thm_2_6: oscillation exponent of harmonic functions
ClaimCheck fit_hoelder(const ModelSpec& model, const GridSpec& grid, std::uint64_t seed,
                       int n_data = 40, int n_pairs = 200);

// thm_2_7: uniform ratio bound for nonnegative harmonic functions
ClaimCheck check_harnack(const ModelSpec& model, const GridSpec& grid, std::uint64_t seed,
                         int n_data = 50);

// prop_3_2: exit-probability tightness scale
ClaimCheck check_tightness(const ModelSpec& model, const McParams& mc,
                           std::vector<double> radii = {});

// prop_3_4: weighted Poincare ratio
ClaimCheck check_weighted_poincare(const ModelSpec& model, const GridSpec& grid,
                                   std::uint64_t seed, int n_funcs = 200);

// prop_4_1a: mean exit time scaling
ClaimCheck check_exit_scaling(const ModelSpec& model, const McParams& mc,
                              std::vector<double> radii = {});

// prop_4_1b: small-target hitting probability
ClaimCheck check_hitting(const ModelSpec& model, const McParams& mc);

// prop_5_1: jump-count identity against the occupation integral
ClaimCheck check_levy_system(const ModelSpec& model, const McParams& mc);

// prop_6_1: harmonic-measure comparison through the kernel ratio
ClaimCheck check_harmonic_comparison(const ModelSpec& model, const GridSpec& grid,
                                     std::uint64_t seed);

// nash: discrete Nash ratio stability
ClaimCheck check_nash(const ModelSpec& model, const GridSpec& grid, std::uint64_t seed,
                      int n_funcs = 200);

const std::vector<std::string>& claim_ids();
std::string claim_description(const std::string& id);

}  // namespace jumphk
