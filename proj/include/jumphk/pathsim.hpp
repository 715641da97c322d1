#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "jumphk/geometry.hpp"
#include "jumphk/model.hpp"
#include "jumphk/rng.hpp"

namespace jumphk {

enum class StepMark { diffusive, small_jump, big_jump };

struct SimParams {
  double dt = 1e-3;      // target window length; windows shrink near events
  double lam = 0.5;      // split radius between resolved and big jumps
  bool meyer = true;     // simulate the big-jump channel
  double horizon = 1.0;
};

struct PathSkeleton {
  std::vector<double> times;   // strictly increasing, starts at 0
  std::vector<Vec> states;
  std::vector<StepMark> marks; // marks[0] is diffusive by convention
  enum class End { horizon, exit, absorbed } terminated_by = End::horizon;
};

// One emitted event. Jump events fold the diffusive bridge since the previous
// event into the same entry; jump_origin is the pre-jump position so jump
// displacements stay exact for consumers that need them.
struct StepEvent {
  double t;
  Vec x;
  StepMark mark;
  Vec jump_origin;  // valid when mark != diffusive
};

// Everything derived from (model, params) that is reusable across paths:
// coefficient field, kernel envelopes, the small-jump candidate rate, the
// sub-resolution variance compensation, and the big-jump intensity N(x).
class ProcessLaw {
 public:
  ProcessLaw(const ModelSpec& model, const SimParams& params);

  const ModelSpec& model() const { return model_; }
  const SimParams& params() const { return params_; }
  const CoeffField& coeff() const { return field_; }
  const JumpKernel& kernel() const { return J_; }

  double delta() const { return delta_; }          // resolved-jump floor (lam / 64)
  double small_rate() const { return rate_small_; } // envelope candidate rate on (delta, lam]
  bool has_big() const { return has_big_; }
  double big_intensity(const Vec& x) const;        // N(x)
  double big_envelope_mass() const { return big_env_mass_; }

 private:
  ModelSpec model_;
  SimParams params_;
  CoeffField field_;
  JumpKernel J_;
  double delta_ = 0;
  double lam_eff_ = 0;       // min(lam, kernel support)
  double rate_small_ = 0;
  double big_env_mass_ = 0;
  bool has_big_ = false;
  bool big_const_ = false;
  double big_const_value_ = 0;
  std::vector<double> big_table_;  // N on a periodic x1 grid when not constant
  double big_period_ = 2.0;
  friend class Walker;
};

// Event-driven path iterator. Each call to next() advances to the next emitted
// event (accepted jump, window close, breakpoint, horizon). Breakpoints are
// landed on exactly so marginals can be read off at prescribed times.
class Walker {
 public:
  Walker(const ProcessLaw& law, Vec x0, RngStream& rng,
         std::vector<double> breakpoints = {});

  bool next(StepEvent& ev);  // false once the horizon is reached
  double time() const { return t_; }
  const Vec& position() const { return x_; }

 private:
  void open_window();
  void diffuse(double ds);

  const ProcessLaw& law_;
  RngStream& rng_;
  double t_;
  Vec x_;
  std::vector<double> breaks_;
  std::size_t break_idx_ = 0;

  // current window
  double win_start_ = 0;
  double win_end_ = 0;
  bool win_alarm_ = false;
  double win_nx_ = 0;
  std::vector<double> win_jumps_;
  std::size_t win_pos_ = 0;
  bool win_open_ = false;

  // big-jump clock
  double clock_ = 0;
  double threshold_ = 0;
};

// Small-jump process only: the big channel is discarded regardless of params.
PathSkeleton simulate_small_jump(const ModelSpec& model, const Vec& x0, double horizon,
                                 double dt, double lam, std::uint64_t seed,
                                 std::uint64_t stream = 0);

// Full process: small-jump skeleton plus big jumps inserted where the additive
// clock crosses unit exponential thresholds.
PathSkeleton meyer_augment(const ModelSpec& model, const SplitReport& split, const Vec& x0,
                           double horizon, double dt, std::uint64_t seed,
                           std::uint64_t stream = 0);

struct ExitResult {
  double tau = 0;
  Vec exit_pos = vec0();
  bool censored = false;  // horizon hit first
};

// variance rate of the simulated diffusion (including the folded sub-resolution
// jump mass) along a unit direction, frozen at x
double effective_variance(const ProcessLaw& law, const Vec& x, const Vec& dir);

// P(a Brownian bridge with endpoint clearances d0, d1 > 0 and variance var_ds
// crosses the level); 1 when either clearance is nonpositive
double bridge_cross_prob(double d0, double d1, double var_ds);

// First time the ball is left. Jump overshoot is kept as-is; diffusive legs are
// checked for within-window boundary crossings with a bridge test, so tau is
// biased high by at most one window and never by the sqrt(dt) endpoint effect.
// Crossings detected mid-window report the boundary touch point as exit_pos.
ExitResult exit_time(const ProcessLaw& law, const Ball& ball, const Vec& x0, RngStream& rng);

}  // namespace jumphk
