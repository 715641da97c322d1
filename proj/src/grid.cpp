#include "jumphk/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "jumphk/parallel.hpp"
#include "jumphk/quadrature.hpp"
#include "jumphk/rng.hpp"

namespace jumphk {

namespace {
constexpr double kNegClip = -1e-12;
constexpr int kJumpNodeCap = 4096;    // all-pairs coupling budget
constexpr int kDenseSolveCap = 4000;  // dense LDLT budget for harmonic solves
}  // namespace

std::string to_string(BoundaryMode m) {
  return m == BoundaryMode::periodic ? "periodic" : "restricted";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "periodic") return BoundaryMode::periodic;
  if (s == "restricted") return BoundaryMode::restricted;
  throw std::invalid_argument("unknown boundary mode: " + s);
}

struct DiscreteGenerator::Caches {
  struct RowDist {
    double q = 0;  // total intensity, kill included
    std::vector<int> nbr;
    std::vector<double> cdf;  // cumulative rates over nbr (unnormalized)
  };
  std::once_flag rows_once;
  std::vector<RowDist> rows;
  std::once_flag evd_once;
  Eigen::MatrixXd evd_vectors;
  Eigen::VectorXd evd_values;
};

DiscreteGenerator::DiscreteGenerator(int dim, double h, double extent, BoundaryMode mode,
                                     std::vector<Vec> nodes, SpMat local, SpMat jump,
                                     std::vector<double> kill, double tail_mass)
    : dim_(dim),
      h_(h),
      extent_(extent),
      mode_(mode),
      nodes_(std::move(nodes)),
      local_(std::move(local)),
      jump_(std::move(jump)),
      kill_(std::move(kill)),
      tail_mass_(tail_mass),
      cache_(std::make_unique<Caches>()) {
  const int n = size();
  full_ = local_ + jump_;
  for (int i = 0; i < n; ++i)
    if (kill_[i] != 0.0) full_.coeffRef(i, i) -= kill_[i];
  full_.makeCompressed();
}

DiscreteGenerator::DiscreteGenerator(DiscreteGenerator&&) noexcept = default;
DiscreteGenerator& DiscreteGenerator::operator=(DiscreteGenerator&&) noexcept = default;
DiscreteGenerator::~DiscreteGenerator() = default;

namespace {

struct Lattice {
  int dim;
  int per_axis;        // nodes per axis
  double h, extent;
  bool periodic;
  int count() const { return dim == 1 ? per_axis : per_axis * per_axis; }
  Vec coord(int idx) const {
    if (dim == 1) return vec1(-extent + idx * h);
    const int i = idx / per_axis, j = idx % per_axis;
    return vec2(-extent + i * h, -extent + j * h);
  }
  int wrap_axis(int i) const {
    if (periodic) {
      i %= per_axis;
      return i < 0 ? i + per_axis : i;
    }
    return (i < 0 || i >= per_axis) ? -1 : i;
  }
  int index(int i, int j) const { return dim == 1 ? i : i * per_axis + j; }
};

bool nearly_integer(double v) { return std::fabs(v - std::llround(v)) < 1e-9; }

}  // namespace

DiscreteGenerator DiscreteGenerator::assemble(const ModelSpec& model, const GridSpec& grid) {
  model.validate();
  if (!(grid.h > 0) || !(grid.extent > 0))
    throw std::invalid_argument("grid needs positive h and extent");
  const double ratio = 2.0 * grid.extent / grid.h;
  if (!nearly_integer(ratio))
    throw std::invalid_argument("grid extent must be an integer multiple of h");

  CoeffField field(model.coeff, model.dim);
  JumpKernel J(model.kernel, model.dim);

  if (model.dim == 2 && model.coeff.family == CoeffFamily::constant &&
      model.coeff.params[1] != 0.0)
    throw std::invalid_argument("grid assembly supports diagonal diffusion matrices only");

  const bool periodic = grid.boundary == BoundaryMode::periodic;
  const bool radial_kernel = (model.kernel.family == KernelFamily::zero ||
                              ((model.kernel.family == KernelFamily::stable_like ||
                                model.kernel.family == KernelFamily::truncated_stable) &&
                               model.kernel.c_hi == model.kernel.c_lo)) &&
                             model.kernel.asym_perturb == 0.0;
  const bool varying = model.coeff.family != CoeffFamily::constant || !radial_kernel;
  if (periodic && varying && !nearly_integer(grid.extent))
    throw std::invalid_argument(
        "periodic wrap of a varying model needs an integer extent (period seam)");

  Lattice lat;
  lat.dim = model.dim;
  lat.h = grid.h;
  lat.extent = grid.extent;
  lat.periodic = periodic;
  lat.per_axis = static_cast<int>(std::llround(ratio)) + (periodic ? 0 : 1);

  const int n = lat.count();
  if (n > grid.node_cap)
    throw std::invalid_argument("grid exceeds the node budget (" + std::to_string(n) + " nodes)");
  if (!J.is_zero() && n > kJumpNodeCap)
    throw std::invalid_argument("all-pairs jump coupling exceeds the node budget; coarsen the grid");

  std::vector<Vec> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = lat.coord(i);

  const double span = 2.0 * grid.extent;
  const double hd = std::pow(grid.h, model.dim);
  std::vector<double> kill(n, 0.0);

  // local conductances: a(edge midpoint) / (2 h^2)
  std::vector<Eigen::Triplet<double>> tl;
  auto local_rate = [&](const Vec& mid, int axis) {
    double a[3];
    field.matrix(mid, a);
    const double akk = axis == 0 ? a[0] : a[2];
    return akk / (2.0 * grid.h * grid.h);
  };
  for (int idx = 0; idx < n; ++idx) {
    const Vec x = nodes[idx];
    const int i = lat.dim == 1 ? idx : idx / lat.per_axis;
    const int j = lat.dim == 1 ? 0 : idx % lat.per_axis;
    for (int axis = 0; axis < lat.dim; ++axis) {
      const int fi = axis == 0 ? i + 1 : i;
      const int fj = axis == 0 ? j : j + 1;
      const int wi = lat.wrap_axis(fi), wj = lat.dim == 1 ? 0 : lat.wrap_axis(fj);
      Vec mid = x;
      mid[axis] += 0.5 * grid.h;
      const double r = local_rate(mid, axis);
      const bool outside = (axis == 0 ? wi : wj) < 0;
      if (outside) {
        kill[idx] += r;  // absorbing ghost neighbour
        continue;
      }
      const int nb = lat.dim == 1 ? wi : lat.index(wi, wj);
      tl.emplace_back(idx, nb, r);
      tl.emplace_back(nb, idx, r);
      tl.emplace_back(idx, idx, -r);
      tl.emplace_back(nb, nb, -r);
    }
    if (!periodic) {
      // backward ghost edges on the low faces
      for (int axis = 0; axis < lat.dim; ++axis) {
        const int bi = axis == 0 ? i - 1 : i;
        const int bj = axis == 0 ? j : j - 1;
        if ((axis == 0 ? bi : bj) < 0) {
          Vec mid = x;
          mid[axis] -= 0.5 * grid.h;
          kill[idx] += local_rate(mid, axis);
        }
      }
    }
  }
  SpMat local(n, n);
  local.setFromTriplets(tl.begin(), tl.end());

  // jump weights
  SpMat jump(n, n);
  double tail_beyond = 0.0;
  if (!J.is_zero()) {
    QuadOptions cell_opt;
    cell_opt.rel_tol = 1e-8;
    auto cell_average = [&](const Vec& from, const Vec& centre) {
      Box cell;
      cell.dim = model.dim;
      for (int k = 0; k < model.dim; ++k) {
        cell.lo[k] = centre[k] - 0.5 * grid.h;
        cell.hi[k] = centre[k] + 0.5 * grid.h;
      }
      QuadResult q =
          integrate_box(model.dim, [&](const Vec& y) { return J(from, y); }, cell, cell_opt);
      return q.value / hd;
    };

    std::vector<Eigen::Triplet<double>> tj;
    tj.reserve(static_cast<std::size_t>(n) * std::min(n, 64));
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        Vec d = sub(nodes[b], nodes[a]);
        if (periodic)
          for (int k = 0; k < model.dim; ++k) d[k] -= span * std::round(d[k] / span);
        const double r = norm(d);
        if (!(r > 0)) continue;
        const Vec b_img = add(nodes[a], d);  // image of b seen from a
        double w;
        if (std::fabs(r - grid.h) < 1e-12) {
          // touching cells: average J over the neighbour cell, from both ends
          w = 0.5 * (cell_average(nodes[a], b_img) + cell_average(b_img, nodes[a]));
        } else {
          w = 0.5 * (J(nodes[a], b_img) + J(b_img, nodes[a]));
        }
        if (w <= 0.0) continue;
        const double rate = 2.0 * w * hd;
        tj.emplace_back(a, b, rate);
        tj.emplace_back(b, a, rate);
        tj.emplace_back(a, a, -rate);
        tj.emplace_back(b, b, -rate);
      }
    }
    jump.setFromTriplets(tj.begin(), tj.end());

    if (periodic) {
      // minimum-image wrap cannot see jumps longer than the half width
      tail_beyond = J.tail_mass(vec0(), grid.extent);
    } else {
      // kill rate toward the complement of the box; the radial tail minus the
      // in-box far weights, with the radius floored at half a cell so boundary
      // rows stay summable
      std::vector<double> far_sum(n, 0.0);
      std::vector<double> rho(n, 0.0);
      for (int a = 0; a < n; ++a) {
        double d = grid.extent - std::fabs(nodes[a][0]);
        for (int k = 1; k < model.dim; ++k)
          d = std::min(d, grid.extent - std::fabs(nodes[a][k]));
        rho[a] = std::max(d, 0.5 * grid.h);
      }
      for (int a = 0; a < n; ++a) {
        for (SpMat::InnerIterator it(jump, a); it; ++it) {
          if (it.row() == a) continue;
          const double r = dist(nodes[it.row()], nodes[a]);
          if (r > rho[a]) far_sum[a] += 0.5 * it.value();  // rate = 2 w h^d
        }
        const double tail = J.tail_mass(nodes[a], rho[a]);
        kill[a] += 2.0 * std::max(0.0, tail - far_sum[a]);
      }
    }
  }

  return DiscreteGenerator(model.dim, grid.h, grid.extent, grid.boundary, std::move(nodes),
                           std::move(local), std::move(jump), std::move(kill), tail_beyond);
}

int DiscreteGenerator::nearest_node(const Vec& x) const {
  const bool periodic = mode_ == BoundaryMode::periodic;
  const int per_axis = periodic ? static_cast<int>(std::llround(2.0 * extent_ / h_))
                                : static_cast<int>(std::llround(2.0 * extent_ / h_)) + 1;
  int id[2] = {0, 0};
  for (int k = 0; k < dim_; ++k) {
    int i = static_cast<int>(std::llround((x[k] + extent_) / h_));
    if (periodic) {
      i %= per_axis;
      if (i < 0) i += per_axis;
    } else {
      i = std::clamp(i, 0, per_axis - 1);
    }
    id[k] = i;
  }
  return dim_ == 1 ? id[0] : id[0] * per_axis + id[1];
}

SpMat DiscreteGenerator::full() const { return full_; }

double DiscreteGenerator::cell_volume() const { return std::pow(h_, dim_); }

double DiscreteGenerator::form_energy(const Eigen::VectorXd& f) const {
  return -f.dot(full_ * f) * cell_volume();
}

double DiscreteGenerator::form_energy_local(const Eigen::VectorXd& f) const {
  return -f.dot(local_ * f) * cell_volume();
}

double DiscreteGenerator::form_energy_jump(const Eigen::VectorXd& f) const {
  return -f.dot(jump_ * f) * cell_volume();
}

void DiscreteGenerator::build_spectral() const {
  std::call_once(cache_->evd_once, [&] {
    Eigen::MatrixXd dense(full_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigendecomposition of the generator failed");
    cache_->evd_vectors = es.eigenvectors();
    cache_->evd_values = es.eigenvalues();
  });
}

Eigen::VectorXd DiscreteGenerator::heat_row(double t, int src) const {
  const int n = size();
  if (src < 0 || src >= n) throw std::invalid_argument("source node out of range");
  if (t < 0) throw std::invalid_argument("time must be nonnegative");
  Eigen::VectorXd row;
  if (t == 0) {
    row = Eigen::VectorXd::Zero(n);
    row[src] = 1.0;
    return row;
  }

  if (n <= kSpectralCap) {
    build_spectral();
    const auto& V = cache_->evd_vectors;
    Eigen::VectorXd w = V.row(src).transpose();
    for (int k = 0; k < n; ++k) w[k] *= std::exp(t * cache_->evd_values[k]);
    row = V * w;
  } else {
    // Crank-Nicolson sub-steps at dt <= h^2/4
    const double dt0 = h_ * h_ / 4.0;
    const int m = static_cast<int>(std::ceil(t / dt0));
    const double dt = t / m;
    SpMat eye(n, n);
    eye.setIdentity();
    SpMat lhs = eye - (dt / 2.0) * full_;
    SpMat rhs = eye + (dt / 2.0) * full_;
    Eigen::SimplicialLDLT<SpMat> fact(lhs);
    if (fact.info() != Eigen::Success)
      throw std::runtime_error("Crank-Nicolson factorization failed");
    row = Eigen::VectorXd::Zero(n);
    row[src] = 1.0;
    for (int k = 0; k < m; ++k) row = fact.solve(rhs * row);
  }

  for (int i = 0; i < n; ++i) {
    if (row[i] < kNegClip)
      throw std::runtime_error("heat row negativity beyond tolerance at node " + std::to_string(i));
    if (row[i] < 0) row[i] = 0.0;
  }
  return row;
}

void DiscreteGenerator::build_rows() const {
  std::call_once(cache_->rows_once, [&] {
    const int n = size();
    cache_->rows.resize(n);
    for (int c = 0; c < n; ++c) {
      for (SpMat::InnerIterator it(full_, c); it; ++it) {
        const int r = static_cast<int>(it.row());
        if (r == c) continue;
        // symmetric off-diagonal: (r uses c) mirrors (c uses r)
        cache_->rows[r].nbr.push_back(c);
        cache_->rows[r].cdf.push_back(it.value());
      }
    }
    for (int i = 0; i < n; ++i) {
      auto& row = cache_->rows[i];
      double acc = 0;
      for (double& v : row.cdf) {
        acc += v;
        v = acc;
      }
      row.q = acc + kill_[i];
    }
  });
}

std::vector<std::vector<std::int64_t>> DiscreteGenerator::chain_sample(
    const std::vector<double>& t_grid, int src, int n_chains, std::uint64_t seed,
    int workers) const {
  const int n = size();
  if (src < 0 || src >= n) throw std::invalid_argument("source node out of range");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] <= t_grid[i - 1]) throw std::invalid_argument("t_grid must be increasing");
  build_rows();

  const std::size_t T = t_grid.size();
  std::unique_ptr<std::atomic<std::int64_t>[]> counts(new std::atomic<std::int64_t>[T * n]);
  for (std::size_t i = 0; i < T * n; ++i) counts[i].store(0, std::memory_order_relaxed);

  parallel_for(static_cast<std::size_t>(n_chains), workers, [&](std::size_t chain) {
    RngStream rng(seed, chain);
    int s = src;
    double t = 0;
    std::size_t k = 0;
    while (k < T) {
      const auto& row = cache_->rows[s];
      if (row.q <= 0) {
        for (; k < T; ++k) counts[k * n + s].fetch_add(1, std::memory_order_relaxed);
        break;
      }
      const double t_next = t + rng.exponential() / row.q;
      for (; k < T && t_grid[k] < t_next; ++k)
        counts[k * n + s].fetch_add(1, std::memory_order_relaxed);
      if (k >= T) break;
      t = t_next;
      const double u = rng.uniform() * row.q;
      const double jump_total = row.cdf.empty() ? 0.0 : row.cdf.back();
      if (u >= jump_total) break;  // absorbed; contributes no further occupancy
      const auto it = std::upper_bound(row.cdf.begin(), row.cdf.end(), u);
      s = row.nbr[static_cast<std::size_t>(it - row.cdf.begin())];
    }
  });

  std::vector<std::vector<std::int64_t>> out(T, std::vector<std::int64_t>(n, 0));
  for (std::size_t k = 0; k < T; ++k)
    for (int i = 0; i < n; ++i) out[k][i] = counts[k * n + i].load(std::memory_order_relaxed);
  return out;
}

std::string DiscreteGenerator::export_text() const {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "# discrete generator export v1\n");
  out += buf;
  std::snprintf(buf, sizeof buf, "dim %d\n", dim_);
  out += buf;
  std::snprintf(buf, sizeof buf, "h %.17g\n", h_);
  out += buf;
  std::snprintf(buf, sizeof buf, "extent %.17g\n", extent_);
  out += buf;
  std::snprintf(buf, sizeof buf, "boundary %s\n", to_string(mode_).c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "nodes %d\n", size());
  out += buf;
  std::snprintf(buf, sizeof buf, "nnz %d\n", static_cast<int>(full_.nonZeros()));
  out += buf;
  out += "# row col value\n";
  for (int c = 0; c < full_.outerSize(); ++c)
    for (SpMat::InnerIterator it(full_, c); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()), c, it.value());
      out += buf;
    }
  return out;
}

// ---- HarmonicSolver ----------------------------------------------------------

HarmonicSolver::HarmonicSolver(const DiscreteGenerator& gen, std::vector<std::uint8_t> domain_mask)
    : gen_(gen), mask_(std::move(domain_mask)) {
  const int n = gen.size();
  if (static_cast<int>(mask_.size()) != n)
    throw std::invalid_argument("mask length must match node count");
  std::vector<int> where(n, -1);
  for (int i = 0; i < n; ++i) {
    if (mask_[i]) {
      where[i] = static_cast<int>(interior_.size());
      interior_.push_back(i);
    } else {
      exterior_.push_back(i);
    }
  }
  if (interior_.empty()) throw std::invalid_argument("empty domain mask");
  if (static_cast<int>(interior_.size()) > kDenseSolveCap)
    throw std::invalid_argument("harmonic domain too large for the dense solver");
  if (exterior_.empty())
    throw std::invalid_argument("harmonic solve needs complement nodes carrying data");

  const SpMat L = gen.full();
  const int ni = static_cast<int>(interior_.size());
  a_dense_ = Eigen::MatrixXd::Zero(ni, ni);
  std::vector<Eigen::Triplet<double>> tc;
  for (int c = 0; c < L.outerSize(); ++c) {
    for (SpMat::InnerIterator it(L, c); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (where[r] < 0) continue;
      if (where[c] >= 0) {
        a_dense_(where[r], where[c]) -= it.value();  // A = -L_II
      } else {
        tc.emplace_back(where[r], c, it.value());    // L_IE, full-width columns
      }
    }
  }
  coupling_.resize(ni, n);
  coupling_.setFromTriplets(tc.begin(), tc.end());
  ldlt_.compute(a_dense_);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("harmonic solver factorization failed");
}

Eigen::VectorXd HarmonicSolver::solve(const Eigen::VectorXd& data, double* rel_residual) const {
  const int n = gen_.size();
  if (data.size() != n) throw std::invalid_argument("data length must match node count");
  Eigen::VectorXd g = data;
  for (int i : interior_) g[i] = 0.0;  // interior entries of the data are ignored
  Eigen::VectorXd rhs = coupling_ * g;
  Eigen::VectorXd u = ldlt_.solve(rhs);
  if (rel_residual) {
    const double num = (a_dense_ * u - rhs).norm();
    *rel_residual = num / std::max(rhs.norm(), 1e-300);
  }
  Eigen::VectorXd out = g;
  for (std::size_t k = 0; k < interior_.size(); ++k) out[interior_[k]] = u[k];
  return out;
}

std::vector<std::uint8_t> ball_mask(const DiscreteGenerator& gen, const Vec& center,
                                    double radius) {
  std::vector<std::uint8_t> mask(gen.size(), 0);
  for (int i = 0; i < gen.size(); ++i)
    if (dist(gen.node(i), center) < radius) mask[i] = 1;
  return mask;
}

}  // namespace jumphk
