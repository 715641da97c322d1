#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "jumphk/geometry.hpp"
#include "jumphk/model.hpp"

namespace jumphk {

enum class BoundaryMode { periodic, restricted };

std::string to_string(BoundaryMode);
BoundaryMode boundary_mode_from_string(const std::string&);

struct GridSpec {
  double extent = 4.0;  // box [-extent, extent]^d
  double h = 1.0 / 16;
  BoundaryMode boundary = BoundaryMode::periodic;
  int node_cap = 40000;
};

using SpMat = Eigen::SparseMatrix<double>;

// Graph form on the lattice: conductances a(edge midpoint)/(2h^2) between
// axis neighbours, jump weights 2 J h^d between all node pairs (cell-averaged
// for the touching neighbours), killing on the diagonal in restricted mode.
class DiscreteGenerator {
 public:
  static DiscreteGenerator assemble(const ModelSpec& model, const GridSpec& grid);

  // direct construction (tests, synthetic chains)
  DiscreteGenerator(int dim, double h, double extent, BoundaryMode mode,
                    std::vector<Vec> nodes, SpMat local, SpMat jump,
                    std::vector<double> kill, double tail6mass = 0.0);
  DiscreteGenerator(DiscreteGenerator&&) noexcept;
  DiscreteGenerator& operator=(DiscreteGenerator&&) noexcept;
  ~DiscreteGenerator();

  int size() const { return static_cast<int>(nodes_.size()); }
  int dim() const { return dim_; }
  double spacing() const { return h_; }
  double extent() const { return extent_; }
  BoundaryMode boundary() const { return mode_; }
  const Vec& node(int i) const { return nodes_[i]; }
  const std::vector<Vec>& nodes() const { return nodes_; }
  int nearest_node(const Vec& x) const;

  const SpMat& local_part() const { return local_; }
  const SpMat& jump_part() const { return jump_; }
  const std::vector<double>& kill() const { return kill_; }
  SpMat full() const;  // local + jump + kill diagonal

  double cell_volume() const;
  double form_energy(const Eigen::VectorXd& f) const;  // local + jump + kill
  double form_energy_local(const Eigen::VectorXd& f) const;
  double form_energy_jump(const Eigen::VectorXd& f) const;

  // mass the minimum-image wrap cannot represent (reported, not dropped silently)
  double tail_mass_beyond_cutoff() const { return tail_mass_; }

  // row of exp(tL) from node src as a probability vector. Dense spectral path
  // up to kSpectralCap nodes, Crank-Nicolson sub-steps beyond. Entries in
  // [-1e-12, 0) are clipped to zero; anything more negative throws.
  Eigen::VectorXd heat_row(double t, int src) const;

  // exact continuous-time chain; returns per-time occupancy counts (size() per
  // time row). Deterministic for a fixed seed independent of worker count.
  std::vector<std::vector<std::int64_t>> chain_sample(const std::vector<double>& t_grid,
                                                      int src, int n_chains,
                                                      std::uint64_t seed, int workers) const;

  // coordinate triplet export with a small header; 17 significant digits
  std::string export_text() const;

  static constexpr int kSpectralCap = 2000;

 private:
  struct Caches;  // row CDFs + spectral data, built once behind a flag
  void build_rows() const;
  void build_spectral() const;

  int dim_;
  double h_;
  double extent_;
  BoundaryMode mode_;
  std::vector<Vec> nodes_;
  SpMat local_;
  SpMat jump_;
  SpMat full_;
  std::vector<double> kill_;
  double tail_mass_ = 0;
  std::unique_ptr<Caches> cache_;
};

// Nonlocal Dirichlet solve: harmonic on the masked nodes, prescribed data on
// every other node. The factorization is cached so many data vectors are cheap.
class HarmonicSolver {
 public:
  HarmonicSolver(const DiscreteGenerator& gen, std::vector<std::uint8_t> domain_mask);

  // data: full-length vector, read on the complement; result: full-length,
  // solution on the domain, data elsewhere
  Eigen::VectorXd solve(const Eigen::VectorXd& data, double* rel_residual = nullptr) const;
  int interior_size() const { return static_cast<int>(interior_.size()); }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

 private:
  const DiscreteGenerator& gen_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> interior_, exterior_;
  Eigen::MatrixXd a_dense_;  // -L restricted to the domain
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  Eigen::SparseMatrix<double> coupling_;  // L[domain, complement]
};

// mask helper: nodes with |x - center| < radius
std::vector<std::uint8_t> ball_mask(const DiscreteGenerator& gen, const Vec& center, double radius);

}  // namespace jumphk
