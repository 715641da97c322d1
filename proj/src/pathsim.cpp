#include "jumphk/pathsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jumphk/quadrature.hpp"

namespace jumphk {

namespace {
constexpr double kMinWindow = 1e-12;
constexpr int kMaxProposals = 10000;
constexpr int kBigTableSize = 1024;
}  // namespace

ProcessLaw::ProcessLaw(const ModelSpec& model, const SimParams& params)
    : model_(model), params_(params), field_(model.coeff, model.dim), J_(model.kernel, model.dim) {
  model_.validate();
  if (!field_.differentiable())
    throw std::invalid_argument(
        "continuous-space stepping needs differentiable coefficients; use the grid chain");
  if (!(params_.dt > 0) || !(params_.horizon > 0))
    throw std::invalid_argument("dt and horizon must be positive");
  if (!(params_.lam > 0)) throw std::invalid_argument("split radius lam must be positive");

  delta_ = params_.lam / 64.0;
  const double sup = J_.support_radius();
  lam_eff_ = std::min(params_.lam, sup);
  rate_small_ = lam_eff_ > delta_ ? J_.envelope_mass(delta_, lam_eff_) : 0.0;

  if (params_.meyer && sup > params_.lam) {
    big_env_mass_ = J_.envelope_mass(params_.lam, sup);
    big_const_ = J_.tail_constant();
    if (big_const_) {
      big_const_value_ = J_.tail_mass(vec0(), params_.lam);
      has_big_ = big_const_value_ > 0;
    } else {
      // N varies along x1 only, with period dividing 2; tabulate one period
      big_table_.resize(kBigTableSize + 1);
      double peak = 0;
      for (int i = 0; i <= kBigTableSize; ++i) {
        const Vec x = vec1(big_period_ * i / kBigTableSize);
        big_table_[i] = J_.tail_mass(x, params_.lam);
        peak = std::max(peak, big_table_[i]);
      }
      has_big_ = peak > 0;
    }
  }
}

double ProcessLaw::big_intensity(const Vec& x) const {
  if (!has_big_) return 0.0;
  if (big_const_) return big_const_value_;
  double u = std::fmod(x[0], big_period_);
  if (u < 0) u += big_period_;
  const double s = u / big_period_ * kBigTableSize;
  const int i = std::min(static_cast<int>(s), kBigTableSize - 1);
  const double w = s - i;
  return (1.0 - w) * big_table_[i] + w * big_table_[i + 1];
}

// ---- Walker -----------------------------------------------------------------

Walker::Walker(const ProcessLaw& law, Vec x0, RngStream& rng, std::vector<double> breakpoints)
    : law_(law), rng_(rng), t_(0.0), x_(x0), breaks_(std::move(breakpoints)) {
  std::sort(breaks_.begin(), breaks_.end());
  if (law_.has_big()) threshold_ = rng_.exponential();
}

void Walker::diffuse(double ds) {
  if (!(ds > 0)) return;
  const int dim = law_.model().dim;
  const Vec b = law_.coeff().drift(x_);
  double a[3];
  law_.coeff().matrix(x_, a);
  // fold sub-resolution jump mass into the diffusion, split evenly per axis
  const double comp = law_.kernel().second_moment_small(x_, law_.delta()) / dim;
  a[0] += comp;
  const double sq = std::sqrt(ds);
  if (dim == 1) {
    x_[0] += b[0] * ds + std::sqrt(a[0]) * sq * rng_.normal();
    return;
  }
  a[2] += comp;
  // lower Cholesky of the 2x2
  const double l11 = std::sqrt(a[0]);
  const double l21 = a[1] / l11;
  const double l22 = std::sqrt(std::max(a[2] - l21 * l21, 0.0));
  const double z1 = rng_.normal(), z2 = rng_.normal();
  x_[0] += b[0] * ds + l11 * sq * z1;
  x_[1] += b[1] * ds + (l21 * z1 + l22 * z2) * sq;
}

void Walker::open_window() {
  const auto& p = law_.params();
  double cap = p.dt;
  if (law_.small_rate() > 0) cap = std::min(cap, 2.0 / law_.small_rate());
  if (cap < kMinWindow)
    throw std::runtime_error("step size underflow: candidate jump rate too large for dt floor");

  while (break_idx_ < breaks_.size() && breaks_[break_idx_] <= t_) ++break_idx_;
  double end = std::min(t_ + cap, p.horizon);
  if (break_idx_ < breaks_.size()) end = std::min(end, breaks_[break_idx_]);

  win_alarm_ = false;
  win_nx_ = 0;
  if (law_.has_big()) {
    win_nx_ = law_.big_intensity(x_);
    if (win_nx_ > 0) {
      const double dt_alarm = (threshold_ - clock_) / win_nx_;
      if (t_ + dt_alarm <= end) {
        end = t_ + std::max(dt_alarm, 0.0);
        win_alarm_ = true;
      }
    }
  }

  win_end_ = end;
  win_start_ = t_;
  win_jumps_.clear();
  win_pos_ = 0;
  const double len = win_end_ - t_;
  if (law_.small_rate() > 0 && len > 0) {
    const std::uint64_t k = rng_.poisson(law_.small_rate() * len);
    for (std::uint64_t i = 0; i < k; ++i) win_jumps_.push_back(t_ + len * rng_.uniform());
    std::sort(win_jumps_.begin(), win_jumps_.end());
  }
  win_open_ = true;
}

bool Walker::next(StepEvent& ev) {
  const auto& p = law_.params();
  const JumpKernel& J = law_.kernel();
  for (;;) {
    if (t_ >= p.horizon) return false;
    if (!win_open_) open_window();

    if (win_pos_ < win_jumps_.size()) {
      // candidate small jump: diffuse the bridge, then thin
      const double u = win_jumps_[win_pos_++];
      diffuse(u - t_);
      t_ = u;
      const double lam_hi = std::min(p.lam, J.support_radius());
      const double rho = J.envelope_sample_radius(law_.delta(), lam_hi, rng_.uniform());
      Vec dir;
      if (law_.model().dim == 1) {
        dir = vec1(rng_.uniform() < 0.5 ? 1.0 : -1.0);
      } else {
        const double th = rng_.uniform(0.0, 2.0 * M_PI);
        dir = vec2(std::cos(th), std::sin(th));
      }
      const Vec h = scale(dir, rho);
      const double env = J.envelope_at(rho);
      const double accept = env > 0 ? J(x_, add(x_, h)) / env : 0.0;
      if (rng_.uniform() < accept) {
        ev.jump_origin = x_;
        x_ = add(x_, h);
        ev.t = t_;
        ev.x = x_;
        ev.mark = StepMark::small_jump;
        return true;
      }
      continue;  // thinned: phantom candidate, no event emitted
    }

    // close the window; the clock integrates N frozen at the window opening,
    // exact for constant N and O(dt)-weak otherwise
    diffuse(win_end_ - t_);
    t_ = win_end_;
    clock_ += win_nx_ * (win_end_ - win_start_);
    win_open_ = false;
    if (win_alarm_) {
      // insert a big jump at the alarm instant
      ev.jump_origin = x_;
      const double sup = J.support_radius();
      bool done = false;
      for (int trial = 0; trial < kMaxProposals; ++trial) {
        const double rho = J.envelope_sample_radius(p.lam, sup, rng_.uniform());
        Vec dir;
        if (law_.model().dim == 1) {
          dir = vec1(rng_.uniform() < 0.5 ? 1.0 : -1.0);
        } else {
          const double th = rng_.uniform(0.0, 2.0 * M_PI);
          dir = vec2(std::cos(th), std::sin(th));
        }
        const Vec h = scale(dir, rho);
        const double env = J.envelope_at(rho);
        const double accept = env > 0 ? J(x_, add(x_, h)) / env : 0.0;
        if (rng_.uniform() < accept) {
          x_ = add(x_, h);
          done = true;
          break;
        }
      }
      if (!done)
        throw std::runtime_error("big-jump proposal cap exceeded; envelope too loose for kernel");
      clock_ = 0.0;
      threshold_ = rng_.exponential();
      ev.t = t_;
      ev.x = x_;
      ev.mark = StepMark::big_jump;
      return true;
    }
    ev.t = t_;
    ev.x = x_;
    ev.mark = StepMark::diffusive;
    ev.jump_origin = x_;
    return true;
  }
}

// ---- skeleton front-ends ------------------------------------------------------

namespace {
PathSkeleton run_skeleton(const ProcessLaw& law, const Vec& x0, std::uint64_t seed,
                          std::uint64_t stream) {
  RngStream rng(seed, stream);
  Walker w(law, x0, rng);
  PathSkeleton out;
  out.times.push_back(0.0);
  out.states.push_back(x0);
  out.marks.push_back(StepMark::diffusive);
  StepEvent ev;
  while (w.next(ev)) {
    out.times.push_back(ev.t);
    out.states.push_back(ev.x);
    out.marks.push_back(ev.mark);
  }
  out.terminated_by = PathSkeleton::End::horizon;
  return out;
}
}  // namespace

PathSkeleton simulate_small_jump(const ModelSpec& model, const Vec& x0, double horizon,
                                 double dt, double lam, std::uint64_t seed,
                                 std::uint64_t stream) {
  SimParams p;
  p.dt = dt;
  p.lam = lam;
  p.horizon = horizon;
  p.meyer = false;
  ProcessLaw law(model, p);
  return run_skeleton(law, x0, seed, stream);
}

PathSkeleton meyer_augment(const ModelSpec& model, const SplitReport& split, const Vec& x0,
                           double horizon, double dt, std::uint64_t seed, std::uint64_t stream) {
  SimParams p;
  p.dt = dt;
  p.lam = split.lam;
  p.horizon = horizon;
  p.meyer = true;
  ProcessLaw law(model, p);
  return run_skeleton(law, x0, seed, stream);
}

double effective_variance(const ProcessLaw& law, const Vec& x, const Vec& dir) {
  double a[3];
  law.coeff().matrix(x, a);
  const int dim = law.model().dim;
  const double comp = law.kernel().second_moment_small(x, law.delta()) / dim;
  if (dim == 1) return a[0] + comp;
  return a[0] * dir[0] * dir[0] + 2.0 * a[1] * dir[0] * dir[1] + a[2] * dir[1] * dir[1] + comp;
}

double bridge_cross_prob(double d0, double d1, double var_ds) {
  if (d0 <= 0 || d1 <= 0) return 1.0;
  if (!(var_ds > 0)) return 0.0;
  const double e = 2.0 * d0 * d1 / var_ds;
  return e > 40.0 ? 0.0 : std::exp(-e);
}

ExitResult exit_time(const ProcessLaw& law, const Ball& ball, const Vec& x0, RngStream& rng) {
  ExitResult res;
  if (!ball.contains(x0)) {
    res.tau = 0;
    res.exit_pos = x0;
    return res;
  }
  Walker w(law, x0, rng);
  const int dim = law.model().dim;
  double pt = 0.0;
  Vec px = x0;
  StepEvent ev;
  while (w.next(ev)) {
    // diffusive leg of the event: up to ev.x, or up to the origin of a jump
    const Vec leg = (ev.mark == StepMark::diffusive) ? ev.x : ev.jump_origin;
    if (!ball.contains(leg)) {
      res.tau = ev.t;
      res.exit_pos = leg;
      return res;
    }
    const double ds = ev.t - pt;
    if (ds > 0) {
      if (dim == 1) {
        const double v = effective_variance(law, px, vec1(1.0)) * ds;
        const double hi = ball.center[0] + ball.radius;
        const double lo = ball.center[0] - ball.radius;
        const double pu = bridge_cross_prob(hi - px[0], hi - leg[0], v);
        const double pl = bridge_cross_prob(px[0] - lo, leg[0] - lo, v);
        if (pu + pl > 1e-14) {
          const double u = rng.uniform();
          if (u < pu + pl) {
            res.tau = ev.t;
            res.exit_pos = vec1(u < pu ? hi : lo);
            return res;
          }
        }
      } else {
        // half-space bound through the radial direction of the deeper endpoint
        const double r0 = dist(px, ball.center), r1 = dist(leg, ball.center);
        const Vec& far = (r0 >= r1) ? px : leg;
        const double rf = std::max(r0, r1);
        if (rf > 1e-12) {
          const Vec e = scale(sub(far, ball.center), 1.0 / rf);
          const double v = effective_variance(law, px, e) * ds;
          const double d0 = ball.radius - dot(sub(px, ball.center), e);
          const double d1 = ball.radius - dot(sub(leg, ball.center), e);
          const double p = bridge_cross_prob(d0, d1, v);
          if (p > 1e-14 && rng.uniform() < p) {
            res.tau = ev.t;
            res.exit_pos = add(ball.center, scale(e, ball.radius));
            return res;
          }
        }
      }
    }
    if (!ball.contains(ev.x)) {
      res.tau = ev.t;
      res.exit_pos = ev.x;
      return res;
    }
    pt = ev.t;
    px = ev.x;
  }
  res.tau = law.params().horizon;
  res.exit_pos = w.position();
  res.censored = true;
  return res;
}

}  // namespace jumphk
