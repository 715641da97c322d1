#include "jumphk/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "jumphk/parallel.hpp"
#include "jumphk/quadrature.hpp"

namespace jumphk {

namespace {

constexpr double kTiny = 1e-300;

double rel_change(double a, double b) {
  const double ref = std::max(std::abs(a), std::abs(b));
  if (ref < kTiny) return 0.0;
  return std::abs(a - b) / ref;
}

double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  const double pos = q * (static_cast<double>(s.size()) - 1.0);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= s.size()) return s.back();
  const double w = pos - static_cast<double>(i);
  return s[i] * (1.0 - w) + s[i + 1] * w;
}

struct LogFit {
  double slope = 0, intercept = 0, slope_se = 0;
};

// weighted least squares of log y on log x, weights 1/se_log^2
LogFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::vector<double>& ses) {
  const std::size_t n = xs.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < ses.size() && ses[i] > 0 && ys[i] > 0) {
      const double sl = ses[i] / ys[i];
      w[i] = 1.0 / (sl * sl);
    }
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * std::log(xs[i]);
    sy += w[i] * std::log(ys[i]);
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (std::log(ys[i]) - my);
  }
  LogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.slope_se = std::sqrt(1.0 / sxx);
  return f;
}

struct MeanSe {
  double mean = 0, se = 0;
  std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  r.n = v.size();
  if (v.empty()) return r;
  double s = 0;
  for (double x : v) s += x;
  r.mean = s / static_cast<double>(r.n);
  double q = 0;
  for (double x : v) q += (x - r.mean) * (x - r.mean);
  if (r.n > 1) r.se = std::sqrt(q / (static_cast<double>(r.n) - 1.0) / static_cast<double>(r.n));
  return r;
}

// fraction estimate with the zero-count floor used everywhere for bin tests
double binom_se(std::int64_t count, std::int64_t n, double vol) {
  const double q = static_cast<double>(std::max<std::int64_t>(count, 1)) / static_cast<double>(n);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(n)) / vol;
}

std::vector<double> dyadic(double top, int levels) {
  std::vector<double> v(levels);
  for (int i = 0; i < levels; ++i) v[levels - 1 - i] = top / static_cast<double>(1 << i);
  return v;
}

}  // namespace

// ---- density ----------------------------------------------------------------

Vec DensityEstimate::bin_center(int flat, int dim) const {
  const double lo0 = center[0] - 0.5 * bins_per_axis * bin_width;
  if (dim == 1) return vec1(lo0 + (flat + 0.5) * bin_width);
  const double lo1 = center[1] - 0.5 * bins_per_axis * bin_width;
  const int i = flat / bins_per_axis, j = flat % bins_per_axis;
  return vec2(lo0 + (i + 0.5) * bin_width, lo1 + (j + 0.5) * bin_width);
}

std::vector<DensityEstimate> estimate_density(const ModelSpec& model, const Vec& x0,
                                              const std::vector<double>& t_grid,
                                              const McParams& mc, double half_width) {
  if (t_grid.empty()) throw std::invalid_argument("estimate_density: empty time grid");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > 0) || (k > 0 && t_grid[k] <= t_grid[k - 1]))
      throw std::invalid_argument("estimate_density: time grid must be positive and increasing");
  }
  if (!(half_width > 0)) throw std::invalid_argument("estimate_density: half_width must be positive");
  model.validate();

  const int dim = model.dim;
  const std::size_t n = static_cast<std::size_t>(mc.n_paths);
  const std::size_t T = t_grid.size();
  SimParams sp;
  sp.dt = mc.dt;
  sp.lam = mc.lam;
  sp.meyer = true;
  sp.horizon = t_grid.back();
  const ProcessLaw law(model, sp);

  std::vector<double> xs(n * T, 0.0), ys;
  if (dim == 2) ys.assign(n * T, 0.0);
  parallel_for(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i);
    Walker w(law, x0, rng, t_grid);
    StepEvent ev;
    std::size_t k = 0;
    while (k < T && w.next(ev)) {
      while (k < T && ev.t >= t_grid[k] - 1e-12) {
        xs[i * T + k] = ev.x[0];
        if (dim == 2) ys[i * T + k] = ev.x[1];
        ++k;
      }
    }
    for (; k < T; ++k) {  // horizon reached between breaks only on fp slack
      xs[i * T + k] = w.position()[0];
      if (dim == 2) ys[i * T + k] = w.position()[1];
    }
  });

  std::vector<DensityEstimate> out(T);
  for (std::size_t k = 0; k < T; ++k) {
    DensityEstimate& de = out[k];
    de.t = t_grid[k];
    de.center = x0;
    de.half_width = half_width;

    std::vector<double> slice(n);
    for (std::size_t i = 0; i < n; ++i) slice[i] = xs[i * T + k];
    std::sort(slice.begin(), slice.end());
    const double iqr = quantile_sorted(slice, 0.75) - quantile_sorted(slice, 0.25);
    const double fd = 2.0 * iqr * std::pow(static_cast<double>(n), -1.0 / 3.0);
    de.bin_width = std::max(2.0 * std::sqrt(mc.dt) / 5.0, fd);
    de.bins_per_axis = std::max(1, static_cast<int>(std::lround(2.0 * half_width / de.bin_width)));
    const int B = de.bins_per_axis;
    const int nbins = (dim == 1) ? B : B * B;
    de.counts.assign(nbins, 0);

    const double lo0 = x0[0] - 0.5 * B * de.bin_width;
    const double lo1 = x0[1] - 0.5 * B * de.bin_width;
    std::int64_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = xs[i * T + k];
      const int b0 = static_cast<int>(std::floor((u - lo0) / de.bin_width));
      if (b0 < 0 || b0 >= B) continue;
      if (dim == 1) {
        ++de.counts[b0];
        ++inside;
        continue;
      }
      const int b1 = static_cast<int>(std::floor((ys[i * T + k] - lo1) / de.bin_width));
      if (b1 < 0 || b1 >= B) continue;
      ++de.counts[b0 * B + b1];
      ++inside;
    }
    de.inside_fraction = static_cast<double>(inside) / static_cast<double>(n);
    if (inside == 0) {
      std::ostringstream os;
      os << "estimate_density: every path left the binning window at t = " << de.t;
      throw std::runtime_error(os.str());
    }
    const double vol = (dim == 1) ? de.bin_width : de.bin_width * de.bin_width;
    de.density.resize(nbins);
    de.se.resize(nbins);
    for (int b = 0; b < nbins; ++b) {
      de.density[b] = static_cast<double>(de.counts[b]) / (static_cast<double>(n) * vol);
      de.se[b] = binom_se(de.counts[b], static_cast<std::int64_t>(n), vol);
    }
  }
  return out;
}

OnDiagonalFit on_diagonal_decay(const ModelSpec& model, const Vec& x0,
                                const std::vector<double>& t_grid, const McParams& mc) {
  model.validate();
  const int dim = model.dim;
  const std::size_t n = static_cast<std::size_t>(mc.n_paths);
  const std::size_t T = t_grid.size();
  // center box side c_d sqrt(t): the relative bin-average bias is then constant
  // in t and drops out of the log-log slope
  const double cd = (dim == 1) ? 0.2 : 0.4;

  SimParams sp;
  sp.dt = mc.dt;
  sp.lam = mc.lam;
  sp.meyer = true;
  sp.horizon = t_grid.back();
  const ProcessLaw law(model, sp);

  std::vector<std::uint8_t> flags(n * T, 0);
  parallel_for(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i);
    Walker w(law, x0, rng, t_grid);
    StepEvent ev;
    std::size_t k = 0;
    while (k < T && w.next(ev)) {
      while (k < T && ev.t >= t_grid[k] - 1e-12) {
        const double half = 0.5 * cd * std::sqrt(t_grid[k]);
        bool in = std::abs(ev.x[0] - x0[0]) <= half;
        if (dim == 2) in = in && std::abs(ev.x[1] - x0[1]) <= half;
        flags[i * T + k] = in ? 1 : 0;
        ++k;
      }
    }
  });

  OnDiagonalFit fit;
  fit.t = t_grid;
  fit.p_hat.resize(T);
  fit.se.resize(T);
  std::vector<double> se_for_fit(T);
  for (std::size_t k = 0; k < T; ++k) {
    std::int64_t cnt = 0;
    for (std::size_t i = 0; i < n; ++i) cnt += flags[i * T + k];
    const double w = cd * std::sqrt(t_grid[k]);
    const double vol = (dim == 1) ? w : w * w;
    fit.p_hat[k] = static_cast<double>(cnt) / (static_cast<double>(n) * vol);
    fit.se[k] = binom_se(cnt, static_cast<std::int64_t>(n), vol);
    se_for_fit[k] = fit.se[k];
    if (cnt == 0) throw std::runtime_error("on_diagonal_decay: empty center bin");
  }
  const LogFit lf = fit_loglog(fit.t, fit.p_hat, se_for_fit);
  fit.slope = lf.slope;
  fit.slope_se = lf.slope_se;
  fit.intercept = lf.intercept;
  return fit;
}

// ---- data families -----------------------------------------------------------

BoundaryDataFamily::BoundaryDataFamily(int dim, Vec center, double R, std::uint64_t seed,
                                       bool nonneg, int escalate_from)
    : dim_(dim), center_(center), R_(R), seed_(seed), nonneg_(nonneg), escalate_(escalate_from) {}

BoundaryDataFamily::Item BoundaryDataFamily::make(int k) const {
  RngStream g(seed_, 9000 + static_cast<std::uint64_t>(k));
  Item it{};
  it.amp = nonneg_ ? 1.0 : (g.uniform() < 0.5 ? 1.0 : -1.0);
  if (k >= escalate_) {
    // one-sided slabs aligned to the unit cells of the axis, the far-field
    // geometry that separates direction-filtering kernels from isotropic ones
    it.kind = 3;
    const int v = k % 8;
    const double side = (v & 1) ? -1.0 : 1.0;
    double lo, hi;
    switch (v / 2) {
      case 0: lo = 0.55; hi = 0.95; break;   // nearer cell
      case 1: lo = 1.05; hi = 1.85; break;   // farther cell
      case 2: lo = 0.60; hi = 0.80; break;
      default: lo = 1.20; hi = 1.60; break;
    }
    if (side > 0) {
      it.a = lo;
      it.b = hi;
    } else {
      it.a = -hi;
      it.b = -lo;
    }
    return it;
  }
  const int kind = k % 4;
  const double u1 = g.uniform(), u2 = g.uniform();
  switch (kind) {
    case 0:  // indicator shell, both sides
      it.kind = 0;
      it.a = R_ * (1.05 + 1.5 * u1);
      it.b = it.a + R_ * (0.4 + 0.6 * u2);
      break;
    case 1: {  // smooth radial bump off to one side
      it.kind = 1;
      const double d0 = R_ * (1.2 + 1.8 * u1);
      double ang = 0.0;
      double side = (k / 4 % 2 == 0) ? 1.0 : -1.0;
      if (dim_ == 2) ang = 2.0 * M_PI * u2;
      it.dir = (dim_ == 1) ? vec1(side * d0) : vec2(d0 * std::cos(ang), d0 * std::sin(ang));
      it.width = R_ * (0.2 + 0.3 * g.uniform());
      break;
    }
    case 2:  // thin far shell (concentration)
      it.kind = 0;
      it.a = R_ * (1.05 + 2.0 * u1);
      it.b = it.a + 0.1 * R_;
      break;
    default:  // wide slab spanning both cell parities
      it.kind = 3;
      const double side = (k / 4 % 2 == 0) ? 1.0 : -1.0;
      const double lo = R_ + 0.1 + 0.5 * R_ * u1;
      const double hi = lo + 1.2;
      if (side > 0) {
        it.a = lo;
        it.b = hi;
      } else {
        it.a = -hi;
        it.b = -lo;
      }
      break;
  }
  return it;
}

double BoundaryDataFamily::eval(int k, const Vec& x) const {
  const Item it = make(k);
  const Vec d = sub(x, center_);
  switch (it.kind) {
    case 0: {
      const double r = norm(d);
      return (r >= it.a && r <= it.b) ? it.amp : 0.0;
    }
    case 1: {
      const Vec p = add(center_, it.dir);
      const double v = dist(x, p);
      return it.amp * std::exp(-(v / it.width) * (v / it.width));
    }
    default: {
      if (d[0] < it.a || d[0] > it.b) return 0.0;
      if (dim_ == 2 && std::abs(d[1]) > 3.0 * R_) return 0.0;
      return it.amp;
    }
  }
}

TestFunctionFamily::TestFunctionFamily(int dim, double extent, std::uint64_t seed)
    : dim_(dim), extent_(extent), seed_(seed) {}

double TestFunctionFamily::eval(int k, const Vec& x) const {
  RngStream g(seed_, 7000 + static_cast<std::uint64_t>(k));
  const double L = 2.0 * extent_;  // torus period; evaluate by minimum image
  auto wrap = [&](double u) { return u - L * std::round(u / L); };

  Vec c = vec0();
  double sig = 0.25 * extent_;
  if (k > 0) {
    c[0] = g.uniform(-0.5 * extent_, 0.5 * extent_);
    if (dim_ == 2) c[1] = g.uniform(-0.5 * extent_, 0.5 * extent_);
    sig = extent_ * g.uniform(0.08, 0.4);
  }
  double r2 = 0;
  for (int a = 0; a < dim_; ++a) {
    const double u = wrap(x[a] - c[a]);
    r2 += u * u;
  }
  double f = std::exp(-r2 / (sig * sig));

  const int hats = (k == 0) ? 0 : static_cast<int>(g.integer(4));
  for (int m = 0; m < hats; ++m) {
    Vec hc = vec0();
    hc[0] = g.uniform(-0.5 * extent_, 0.5 * extent_);
    if (dim_ == 2) hc[1] = g.uniform(-0.5 * extent_, 0.5 * extent_);
    const double hw = extent_ * g.uniform(0.05, 0.3);
    const double amp = g.uniform(-0.8, 0.8);
    double rr = 0;
    for (int a = 0; a < dim_; ++a) {
      const double u = wrap(x[a] - hc[a]);
      rr += u * u;
    }
    f += amp * std::max(0.0, 1.0 - std::sqrt(rr) / hw);
  }
  return f;
}

// ---- exit scaling -------------------------------------------------------------

ClaimCheck check_exit_scaling(const ModelSpec& model, const McParams& mc,
                              std::vector<double> radii) {
  model.validate();
  if (radii.empty()) radii = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
  const Vec x0 = vec0();
  const std::size_t n = static_cast<std::size_t>(mc.n_paths);

  ClaimCheck c;
  c.claim_id = "prop_4_1a";
  c.tolerances["slope_target"] = 2.0;
  c.tolerances["slope_tol"] = 0.1;
  c.tolerances["max_censored"] = 0.01;
  c.diagnostics.columns = {"r", "mean_tau", "se", "ratio", "censored_frac", "n"};

  std::vector<double> means, ses, ratios;
  bool censor_ok = true;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    const double dtr = std::min(mc.dt, r * r / 200.0);
    double censored_frac = 0;
    MeanSe ms;
    for (int attempt = 0; attempt < 2; ++attempt) {
      SimParams sp;
      sp.dt = dtr;
      sp.lam = mc.lam;
      sp.meyer = true;
      sp.horizon = 50.0 * r * r * (attempt == 0 ? 1.0 : 4.0);
      const ProcessLaw law(model, sp);
      const Ball ball{x0, r};
      std::vector<double> taus(n);
      std::vector<std::uint8_t> cens(n, 0);
      parallel_for(n, mc.workers, [&](std::size_t i) {
        RngStream rng(mc.seed, (static_cast<std::uint64_t>(attempt) * 100 + ri) * n + i);
        const ExitResult er = exit_time(law, ball, x0, rng);
        taus[i] = er.tau;
        cens[i] = er.censored ? 1 : 0;
      });
      std::vector<double> keep;
      keep.reserve(n);
      std::size_t nc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (cens[i])
          ++nc;
        else
          keep.push_back(taus[i]);
      }
      censored_frac = static_cast<double>(nc) / static_cast<double>(n);
      ms = mean_se(keep);
      if (censored_frac <= 0.01) break;
    }
    if (censored_frac > 0.01) {
      censor_ok = false;
      c.notes.push_back("censored fraction above 1% after enlarging the horizon");
    }
    means.push_back(ms.mean);
    ses.push_back(ms.se);
    ratios.push_back(ms.mean / (r * r));
    c.diagnostics.add({r, ms.mean, ms.se, ms.mean / (r * r), censored_frac,
                       static_cast<double>(ms.n)});
  }

  const LogFit lf = fit_loglog(radii, means, ses);
  c.fitted["slope"] = lf.slope;
  c.fitted["slope_se"] = lf.slope_se;
  c.fitted["c_hi"] = *std::max_element(ratios.begin(), ratios.end());
  c.fitted["c_lo"] = *std::min_element(ratios.begin(), ratios.end());
  c.pass = censor_ok && std::isfinite(lf.slope) &&
           std::abs(lf.slope - 2.0) <= c.tolerances["slope_tol"] && c.fitted["c_lo"] > 0;
  return c;
}

// ---- tightness ----------------------------------------------------------------

ClaimCheck check_tightness(const ModelSpec& model, const McParams& mc, std::vector<double> radii) {
  model.validate();
  if (radii.empty()) radii = {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2};
  const std::vector<double> t0s = {1.0, 0.5, 0.25, 0.125, 1.0 / 16, 1.0 / 32};
  const Vec x0 = vec0();
  const std::size_t n = static_cast<std::size_t>(mc.n_paths);

  ClaimCheck c;
  c.claim_id = "prop_3_2";
  c.tolerances["prob_cap"] = 0.5;
  c.tolerances["cv_max"] = 0.5;
  c.diagnostics.columns = {"r", "t0", "prob", "se", "selected"};

  std::vector<double> chosen;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    SimParams sp;
    sp.dt = std::min(mc.dt, r * r / 200.0);
    sp.lam = mc.lam;
    sp.meyer = true;
    sp.horizon = r * r;
    const ProcessLaw law(model, sp);
    const Ball ball{x0, r};
    std::vector<double> taus(n);
    std::vector<std::uint8_t> cens(n, 0);
    parallel_for(n, mc.workers, [&](std::size_t i) {
      RngStream rng(mc.seed, ri * n + i);
      const ExitResult er = exit_time(law, ball, x0, rng);
      taus[i] = er.tau;
      cens[i] = er.censored ? 1 : 0;
    });
    double best = 0.0;
    for (double t0 : t0s) {
      std::int64_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (!cens[i] && taus[i] <= t0 * r * r) ++cnt;
      const double p = static_cast<double>(cnt) / static_cast<double>(n);
      const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(n)) /
                                  static_cast<double>(n));
      const bool ok = p + 3.0 * se <= 0.5;
      if (ok && t0 > best) best = t0;
      c.diagnostics.add({r, t0, p, se, ok ? 1.0 : 0.0});
    }
    chosen.push_back(best);
  }
  double mean = 0;
  for (double v : chosen) mean += v;
  mean /= static_cast<double>(chosen.size());
  double var = 0;
  for (double v : chosen) var += (v - mean) * (v - mean);
  var /= static_cast<double>(chosen.size());
  const double cv = (mean > 0) ? std::sqrt(var) / mean : std::numeric_limits<double>::infinity();

  c.fitted["t0_min"] = *std::min_element(chosen.begin(), chosen.end());
  c.fitted["t0_mean"] = mean;
  c.fitted["cv"] = cv;
  c.pass = c.fitted["t0_min"] > 0 && cv < c.tolerances["cv_max"];
  return c;
}

// ---- hitting ------------------------------------------------------------------

ClaimCheck check_hitting(const ModelSpec& model, const McParams& mc) {
  model.validate();
  const int dim = model.dim;
  const double r = 0.25;
  const Vec x0 = vec0();
  const std::vector<double> vol_ratios = {0.01, 0.025, 0.06, 0.15, 0.5};
  const std::size_t K = vol_ratios.size();
  const Vec tc = (dim == 1) ? vec1(3.0 * r / 8.0) : vec2(3.0 * r / 8.0, 0.0);

  // d=1 targets are intervals [lo, hi]; d=2 targets are discs of radius rho
  std::vector<double> rho(K);
  for (std::size_t k = 0; k < K; ++k)
    rho[k] = (dim == 1) ? 0.5 * vol_ratios[k] * r : r * std::sqrt(vol_ratios[k] / M_PI);

  ClaimCheck c;
  c.claim_id = "prop_4_1b";
  c.tolerances["decay_floor"] = 0.7;
  c.diagnostics.columns = {"vol_ratio", "rho", "prob", "se", "c3"};

  SimParams sp;
  sp.dt = std::min(mc.dt, r * r / 3200.0);
  sp.lam = mc.lam;
  sp.meyer = true;
  sp.horizon = 50.0 * r * r;
  const ProcessLaw law(model, sp);
  const Ball ball{x0, r};

  std::vector<std::int64_t> hits(K, 0);
  std::size_t n = static_cast<std::size_t>(mc.n_paths);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<std::uint8_t> hitflags(n * K, 0);
    parallel_for(n, mc.workers, [&](std::size_t i) {
      RngStream rng(mc.seed, static_cast<std::uint64_t>(attempt) * 10 * n + i);
      Walker w(law, x0, rng);
      bool hit[8] = {false};
      double pt = 0;
      Vec px = x0;
      StepEvent ev;
      bool exited = false;
      while (!exited && w.next(ev)) {
        const Vec leg = (ev.mark == StepMark::diffusive) ? ev.x : ev.jump_origin;
        const double ds = ev.t - pt;
        const double u = rng.uniform();  // shared across this event's bridge tests
        double var1 = 0;
        if (ds > 0) var1 = effective_variance(law, px, vec1(1.0)) * ds;
        for (std::size_t k = 0; k < K; ++k) {
          if (hit[k]) continue;
          if (dim == 1) {
            const double lo = tc[0] - rho[k], hi = tc[0] + rho[k];
            const double a = std::min(px[0], leg[0]), b = std::max(px[0], leg[0]);
            if (b >= lo && a <= hi) {
              hit[k] = true;
              continue;
            }
            if (ds <= 0) continue;
            double p = 0;
            if (b < lo)
              p = bridge_cross_prob(lo - px[0], lo - leg[0], var1);
            else if (a > hi)
              p = bridge_cross_prob(px[0] - hi, leg[0] - hi, var1);
            if (u < p) hit[k] = true;
          } else {
            if (dist(leg, tc) <= rho[k]) {
              hit[k] = true;
              continue;
            }
            if (ds <= 0) continue;
            const double d0 = dist(px, tc) - rho[k], d1 = dist(leg, tc) - rho[k];
            if (d0 <= 0) {
              hit[k] = true;
              continue;
            }
            const Vec e = scale(sub(tc, px), 1.0 / dist(px, tc));
            const double v = effective_variance(law, px, e) * ds;
            if (u < bridge_cross_prob(d0, d1, v)) hit[k] = true;
          }
        }
        if (!ball.contains(leg)) {
          exited = true;
          break;
        }
        if (ds > 0) {
          // within-window ball exit, same bridge machinery as exit_time
          double pexit = 0;
          if (dim == 1) {
            const double hi = ball.center[0] + ball.radius, lo = ball.center[0] - ball.radius;
            pexit = bridge_cross_prob(hi - px[0], hi - leg[0], var1) +
                    bridge_cross_prob(px[0] - lo, leg[0] - lo, var1);
          } else {
            const double r0 = dist(px, ball.center), r1 = dist(leg, ball.center);
            const double rf = std::max(r0, r1);
            if (rf > 1e-12) {
              const Vec e = scale(sub((r0 >= r1) ? px : leg, ball.center), 1.0 / rf);
              const double v = effective_variance(law, px, e) * ds;
              pexit = bridge_cross_prob(ball.radius - dot(sub(px, ball.center), e),
                                        ball.radius - dot(sub(leg, ball.center), e), v);
            }
          }
          if (u < pexit) {
            exited = true;
            break;
          }
        }
        if (ev.mark != StepMark::diffusive) {
          for (std::size_t k = 0; k < K; ++k) {
            if (hit[k]) continue;
            if (dim == 1) {
              if (std::abs(ev.x[0] - tc[0]) <= rho[k]) hit[k] = true;
            } else if (dist(ev.x, tc) <= rho[k]) {
              hit[k] = true;
            }
          }
        }
        if (!ball.contains(ev.x)) {
          exited = true;
          break;
        }
        pt = ev.t;
        px = ev.x;
      }
      for (std::size_t k = 0; k < K; ++k) hitflags[i * K + k] = hit[k] ? 1 : 0;
    });
    std::fill(hits.begin(), hits.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < K; ++k) hits[k] += hitflags[i * K + k];
    const bool any_zero = std::any_of(hits.begin(), hits.end(), [](std::int64_t h) { return h == 0; });
    if (!any_zero) break;
    if (attempt == 0) {
      n *= 4;
      c.notes.push_back("zero hits for a target; path count widened once");
    }
  }

  std::vector<double> c3(K), se3(K);
  bool zero_left = false;
  for (std::size_t k = 0; k < K; ++k) {
    const double p = static_cast<double>(hits[k]) / static_cast<double>(n);
    const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(n)) /
                                static_cast<double>(n));
    c3[k] = p / vol_ratios[k];
    se3[k] = se / vol_ratios[k];
    if (hits[k] == 0) zero_left = true;
    c.diagnostics.add({vol_ratios[k], rho[k], p, se, c3[k]});
  }
  std::size_t kmin = 0;
  for (std::size_t k = 1; k < K; ++k)
    if (c3[k] < c3[kmin]) kmin = k;
  c.fitted["c3"] = c3[kmin];
  c.fitted["c3_se"] = se3[kmin];
  const double cmax = *std::max_element(c3.begin(), c3.end());
  c.fitted["smallest_over_largest"] = c3.front() / c3.back();
  const bool margin = c3[kmin] > 3.0 * se3[kmin];
  // no systematic decay toward small targets: the smallest-volume constant must
  // hold up against the best one
  const bool no_decay = c3.front() >= c.tolerances["decay_floor"] * cmax ||
                        c3.front() >= c3.back();
  c.pass = !zero_left && margin && no_decay;
  return c;
}

// ---- Levy system ----------------------------------------------------------------

ClaimCheck check_levy_system(const ModelSpec& model, const McParams& mc) {
  model.validate();
  const int dim = model.dim;
  Box A{vec1(-1.0), vec1(-0.5), dim};
  Box B{vec1(0.5), vec1(1.0), dim};
  if (dim == 2) {
    A = Box{vec2(-1.0, -1.0), vec2(-0.5, -0.5), 2};
    B = Box{vec2(0.5, 0.5), vec2(1.0, 1.0), 2};
  }
  const double t_end = 1.0;
  const Vec x0 = (dim == 1) ? vec1(-0.75) : vec2(-0.75, -0.75);

  double gap = B.lo[0] - A.hi[0];
  if (dim == 2) gap = std::sqrt(2.0) * gap;
  const double delta = mc.lam / 64.0;
  if (gap < delta)
    throw std::invalid_argument(
        "check_levy_system: box separation below the resolved-jump floor; shrink lam");

  ClaimCheck c;
  c.claim_id = "prop_5_1";
  c.tolerances["band_se_mult"] = 3.0;
  c.diagnostics.columns = {"n_paths", "lhs", "lhs_se", "rhs", "rhs_se", "diff"};

  const JumpKernel& J = JumpKernel(model.kernel, dim);
  // jump intensity into B, tabulated over A once
  const int m = (dim == 1) ? 257 : 33;
  std::vector<double> Mtab((dim == 1) ? m : m * m);
  if (!J.is_zero()) {
    for (int i = 0; i < m; ++i) {
      if (dim == 1) {
        const double x = A.lo[0] + (A.hi[0] - A.lo[0]) * i / (m - 1.0);
        Mtab[i] = integrate_interval([&](double y) { return J(vec1(x), vec1(y)); }, B.lo[0],
                                     B.hi[0])
                      .value;
      } else {
        for (int j = 0; j < m; ++j) {
          const double x = A.lo[0] + (A.hi[0] - A.lo[0]) * i / (m - 1.0);
          const double y = A.lo[1] + (A.hi[1] - A.lo[1]) * j / (m - 1.0);
          Mtab[i * m + j] =
              integrate_box(2, [&](const Vec& z) { return J(vec2(x, y), z); }, B).value;
        }
      }
    }
  }
  auto Mval = [&](const Vec& x) -> double {
    if (J.is_zero() || !A.contains(x)) return 0.0;
    const double fx = (x[0] - A.lo[0]) / (A.hi[0] - A.lo[0]) * (m - 1.0);
    const int i = std::min(m - 2, std::max(0, static_cast<int>(fx)));
    const double wi = fx - i;
    if (dim == 1) return Mtab[i] * (1.0 - wi) + Mtab[i + 1] * wi;
    const double fy = (x[1] - A.lo[1]) / (A.hi[1] - A.lo[1]) * (m - 1.0);
    const int j = std::min(m - 2, std::max(0, static_cast<int>(fy)));
    const double wj = fy - j;
    return (Mtab[i * m + j] * (1.0 - wi) + Mtab[(i + 1) * m + j] * wi) * (1.0 - wj) +
           (Mtab[i * m + j + 1] * (1.0 - wi) + Mtab[(i + 1) * m + j + 1] * wi) * wj;
  };

  SimParams sp;
  sp.dt = mc.dt;
  sp.lam = mc.lam;
  sp.meyer = true;
  sp.horizon = t_end;
  const ProcessLaw law(model, sp);

  const std::size_t n = static_cast<std::size_t>(mc.n_paths);
  std::vector<double> cnts(n, 0.0), occs(n, 0.0);
  parallel_for(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i);
    Walker w(law, x0, rng);
    double pt = 0;
    Vec px = x0;
    double gprev = Mval(px);
    double occ = 0, cnt = 0;
    StepEvent ev;
    while (w.next(ev)) {
      const Vec leg = (ev.mark == StepMark::diffusive) ? ev.x : ev.jump_origin;
      const double ds = ev.t - pt;
      const double gleg = Mval(leg);
      occ += 0.5 * ds * (gprev + gleg);
      if (ev.mark != StepMark::diffusive) {
        if (A.contains(ev.jump_origin) && B.contains(ev.x)) cnt += 1.0;
        gprev = Mval(ev.x);
      } else {
        gprev = gleg;
      }
      pt = ev.t;
      px = ev.x;
    }
    cnts[i] = cnt;
    occs[i] = occ;
  });

  const MeanSe L = mean_se(cnts), R = mean_se(occs);
  const double band = 3.0 * (L.se + R.se);
  c.fitted["lhs"] = L.mean;
  c.fitted["lhs_se"] = L.se;
  c.fitted["rhs"] = R.mean;
  c.fitted["rhs_se"] = R.se;
  c.fitted["band"] = band;
  c.diagnostics.add({static_cast<double>(n), L.mean, L.se, R.mean, R.se, L.mean - R.mean});
  c.pass = std::abs(L.mean - R.mean) <= band;
  return c;
}

// ---- heat kernel bounds ----------------------------------------------------------

namespace {

double torus_dist(const Vec& a, const Vec& b, int dim, double extent) {
  const double L = 2.0 * extent;
  double s = 0;
  for (int k = 0; k < dim; ++k) {
    double u = a[k] - b[k];
    u -= L * std::round(u / L);
    s += u * u;
  }
  return std::sqrt(s);
}

double upper_sup(const DiscreteGenerator& gen, const Vec& x0, const std::vector<double>& ts) {
  const int src = gen.nearest_node(x0);
  const double vol = gen.cell_volume();
  double best = 0;
  for (double t : ts) {
    const Eigen::VectorXd row = gen.heat_row(t, src);
    for (int j = 0; j < gen.size(); ++j) {
      const double d = torus_dist(gen.node(j), gen.node(src), gen.dim(), gen.extent());
      const double v = row[j] / vol * std::pow(t, gen.dim() / 2.0) * std::exp(d);
      if (v > best) best = v;
    }
  }
  return best;
}

}  // namespace

ClaimCheck check_upper_bound(const ModelSpec& model, const GridSpec& grid,
                             std::vector<double> t_grid) {
  model.validate();
  const double supp = JumpKernel(model.kernel, model.dim).support_radius();
  if (supp > 1.0)
    throw std::invalid_argument(
        "check_upper_bound: needs a kernel with jumps confined to unit range");
  if (t_grid.empty()) t_grid = dyadic(1.0, 7);  // 1/64 .. 1

  ClaimCheck c;
  c.claim_id = "thm_2_4";
  c.tolerances["rel_change_max"] = 0.20;
  c.diagnostics.columns = {"h", "c_obs", "t_min"};

  GridSpec fine = grid;
  fine.h = grid.h / 2.0;
  const DiscreteGenerator g1 = DiscreteGenerator::assemble(model, grid);
  const DiscreteGenerator g2 = DiscreteGenerator::assemble(model, fine);

  const Vec x0 = vec0();
  const double c1 = upper_sup(g1, x0, t_grid);
  const double c2 = upper_sup(g2, x0, t_grid);
  std::vector<double> t_ext = t_grid;
  t_ext.insert(t_ext.begin(), t_grid.front() / 4.0);
  t_ext.insert(t_ext.begin() + 1, t_grid.front() / 2.0);
  const double c1t = upper_sup(g1, x0, t_ext);

  c.diagnostics.add({grid.h, c1, t_grid.front()});
  c.diagnostics.add({fine.h, c2, t_grid.front()});
  c.diagnostics.add({grid.h, c1t, t_ext.front()});
  c.fitted["c_obs"] = c2;
  c.fitted["rel_change_h"] = rel_change(c1, c2);
  c.fitted["rel_change_t"] = rel_change(c1, c1t);
  c.pass = std::isfinite(c1) && std::isfinite(c2) &&
           c.fitted["rel_change_h"] < c.tolerances["rel_change_max"] &&
           c.fitted["rel_change_t"] < c.tolerances["rel_change_max"];
  return c;
}

ClaimCheck check_lower_bound(const ModelSpec& model, const McParams& mc,
                             std::vector<double> t_grid) {
  model.validate();
  if (t_grid.empty()) t_grid = {0.25 * mc.horizon, 0.5 * mc.horizon, mc.horizon};
  const Vec x0 = vec0();

  ClaimCheck c;
  c.claim_id = "thm_2_5";
  c.tolerances["se_mult"] = 3.0;
  c.diagnostics.columns = {"theta", "c1_margin", "feasible"};

  const auto dens = estimate_density(model, x0, t_grid, mc, 3.0);
  const std::vector<double> thetas = {4.0, 2.0, 1.0, 0.5, 0.25};
  double theta_hat = 0, c1_hat = 0, margin_hat = 0;
  for (double th : thetas) {
    double margin = std::numeric_limits<double>::infinity();
    double c1 = std::numeric_limits<double>::infinity();
    bool feasible = true;
    for (const auto& de : dens) {
      const double tfac = std::pow(de.t, model.dim / 2.0);
      const int nb = static_cast<int>(de.density.size());
      int used = 0;
      for (int b = 0; b < nb; ++b) {
        const Vec bc = de.bin_center(b, model.dim);
        if (norm2(sub(bc, x0)) > th * de.t) continue;
        ++used;
        margin = std::min(margin, (de.density[b] - 3.0 * de.se[b]) * tfac);
        c1 = std::min(c1, de.density[b] * tfac);
      }
      if (used == 0) feasible = false;
    }
    const bool ok = feasible && margin > 0;
    c.diagnostics.add({th, ok ? margin : 0.0, feasible ? 1.0 : 0.0});
    if (ok && th > theta_hat) {
      theta_hat = th;
      c1_hat = c1;
      margin_hat = margin;
    }
  }
  c.fitted["theta"] = theta_hat;
  c.fitted["c1"] = c1_hat;
  c.fitted["c1_margin"] = margin_hat;
  c.pass = theta_hat > 0 && margin_hat > 0;
  if (!c.pass) c.notes.push_back("no positive parabolic region with a 3 SE floor");
  return c;
}

// ---- harmonic-function claims -------------------------------------------------

namespace {

struct HarmonicBatch {
  std::vector<Eigen::VectorXd> solutions;
  std::vector<double> sup_norms;  // over all nodes, data included
};

HarmonicBatch solve_family(const DiscreteGenerator& gen, const std::vector<std::uint8_t>& mask,
                           const BoundaryDataFamily& fam, int n_data) {
  HarmonicSolver solver(gen, mask);
  HarmonicBatch out;
  out.solutions.reserve(n_data);
  for (int k = 0; k < n_data; ++k) {
    Eigen::VectorXd data = Eigen::VectorXd::Zero(gen.size());
    for (int i = 0; i < gen.size(); ++i)
      if (!mask[i]) data[i] = fam.eval(k, gen.node(i));
    out.solutions.push_back(solver.solve(data));
    out.sup_norms.push_back(out.solutions.back().cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace

ClaimCheck fit_hoelder(const ModelSpec& model, const GridSpec& grid, std::uint64_t seed,
                       int n_data, int n_pairs) {
  model.validate();
  const Vec z0 = vec0();
  const double R = 0.5;

  ClaimCheck c;
  c.claim_id = "thm_2_6";
  c.tolerances["rel_change_max"] = 0.20;
  c.diagnostics.columns = {"alpha", "C_coarse", "C_fine", "rel_change"};

  GridSpec fine = grid;
  fine.h = grid.h / 2.0;
  const DiscreteGenerator g1 = DiscreteGenerator::assemble(model, grid);
  const DiscreteGenerator g2 = DiscreteGenerator::assemble(model, fine);
  const BoundaryDataFamily fam(model.dim, z0, R, seed, false);

  // pair anchors drawn on the coarse half-ball nodes; both grids contain them
  std::vector<Vec> anchors;
  {
    std::vector<int> hb;
    for (int i = 0; i < g1.size(); ++i)
      if (dist(g1.node(i), z0) < R / 2.0) hb.push_back(i);
    if (hb.size() < 2) throw std::runtime_error("fit_hoelder: half ball resolves no node pairs");
    RngStream pr(seed, 31);
    for (int p = 0; p < n_pairs; ++p) {
      const int a = hb[pr.integer(hb.size())], b = hb[pr.integer(hb.size())];
      if (a == b) continue;
      anchors.push_back(g1.node(a));
      anchors.push_back(g1.node(b));
    }
  }

  const std::vector<double> alphas = [] {
    std::vector<double> v;
    for (int i = 1; i <= 20; ++i) v.push_back(0.05 * i);
    return v;
  }();

  auto profile = [&](const DiscreteGenerator& gen) -> std::vector<double> {
    const auto mask = ball_mask(gen, z0, R);
    const HarmonicBatch batch = solve_family(gen, mask, fam, n_data);
    // oscillation/distance samples: anchor pairs plus every adjacent pair in
    // the half ball (the adjacent pairs carry the refinement sensitivity)
    std::vector<int> hb;
    for (int i = 0; i < gen.size(); ++i)
      if (dist(gen.node(i), z0) < R / 2.0) hb.push_back(i);
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t p = 0; p + 1 < anchors.size(); p += 2)
      pairs.emplace_back(gen.nearest_node(anchors[p]), gen.nearest_node(anchors[p + 1]));
    for (std::size_t a = 0; a < hb.size(); ++a)
      for (std::size_t b = a + 1; b < hb.size(); ++b)
        if (dist(gen.node(hb[a]), gen.node(hb[b])) < 1.5 * gen.spacing())
          pairs.emplace_back(hb[a], hb[b]);

    std::vector<double> Cs(alphas.size(), 0.0);
    bool saw_data = false;
    for (int k = 0; k < n_data; ++k) {
      if (batch.sup_norms[k] < 1e-14) continue;
      saw_data = true;
      for (const auto& pr2 : pairs) {
        const double d = dist(gen.node(pr2.first), gen.node(pr2.second));
        if (d <= 0) continue;
        const double osc =
            std::abs(batch.solutions[k][pr2.first] - batch.solutions[k][pr2.second]) /
            batch.sup_norms[k];
        for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
          const double v = osc / std::pow(d / R, alphas[ai]);
          if (v > Cs[ai]) Cs[ai] = v;
        }
      }
    }
    if (!saw_data) throw std::runtime_error("fit_hoelder: degenerate boundary data family");
    return Cs;
  };

  const auto C1 = profile(g1), C2 = profile(g2);
  double alpha_hat = 0, C_hat = 0;
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const double rc = rel_change(C1[ai], C2[ai]);
    c.diagnostics.add({alphas[ai], C1[ai], C2[ai], rc});
    if (rc <= c.tolerances["rel_change_max"] && C2[ai] > 0 && alphas[ai] > alpha_hat) {
      alpha_hat = alphas[ai];
      C_hat = C2[ai];
    }
  }
  c.fitted["alpha"] = alpha_hat;
  c.fitted["C"] = C_hat;
  c.pass = alpha_hat > 0 && alpha_hat <= 1.0 && std::isfinite(C_hat) && C_hat > 0;
  return c;
}

ClaimCheck check_harnack(const ModelSpec& model, const GridSpec& grid, std::uint64_t seed,
                         int n_data) {
  model.validate();
  const Vec z0 = vec0();
  const double R = 0.5;

  ClaimCheck c;
  c.claim_id = "thm_2_7";
  c.tolerances["growth_max"] = 0.10;
  c.diagnostics.columns = {"k", "ratio", "min_u", "max_u"};

  const DiscreteGenerator gen = DiscreteGenerator::assemble(model, grid);
  const auto mask = ball_mask(gen, z0, R);
  // indices k >= n_data escalate to directional far-field data
  const BoundaryDataFamily fam(model.dim, z0, R, seed, true, n_data);
  const HarmonicBatch batch = solve_family(gen, mask, fam, 2 * n_data);

  std::vector<int> half;
  for (int i = 0; i < gen.size(); ++i)
    if (dist(gen.node(i), z0) < R / 2.0) half.push_back(i);
  if (half.empty()) throw std::runtime_error("check_harnack: half ball resolves no nodes");

  double Cn = 0, C2n = 0;
  bool positive = true;
  for (int k = 0; k < 2 * n_data; ++k) {
    double mn = std::numeric_limits<double>::infinity(), mx = 0;
    for (int i : half) {
      mn = std::min(mn, batch.solutions[k][i]);
      mx = std::max(mx, batch.solutions[k][i]);
    }
    if (batch.sup_norms[k] < 1e-14) continue;  // empty data on this grid
    double ratio;
    if (mn <= 0) {
      positive = false;
      ratio = std::numeric_limits<double>::infinity();
    } else {
      ratio = mx / mn;
    }
    if (k < n_data) Cn = std::max(Cn, ratio);
    C2n = std::max(C2n, ratio);
    c.diagnostics.add({static_cast<double>(k), ratio, mn, mx});
  }
  const double growth = (Cn > 0) ? C2n / Cn - 1.0 : std::numeric_limits<double>::infinity();
  c.fitted["C"] = C2n;
  c.fitted["C_first_half"] = Cn;
  c.fitted["growth"] = growth;
  if (!positive) c.notes.push_back("nonnegative data produced a nonpositive minimum");
  c.pass = positive && std::isfinite(C2n) && C2n > 0 && growth < c.tolerances["growth_max"];
  return c;
}

ClaimCheck check_harmonic_comparison(const ModelSpec& model, const GridSpec& grid,
                                     std::uint64_t seed) {
  model.validate();
  const Vec x0 = vec0();
  const double r = 0.25;
  const int n_h = 30;

  ClaimCheck c;
  c.claim_id = "prop_6_1";
  c.tolerances["rel_change_max"] = 0.20;
  c.diagnostics.columns = {"h", "c_obs", "k_r"};

  const auto comp = comparability_sweep(model, x0, {r}, 4000, seed + 77);
  if (!comp.all_finite) {
    c.notes.push_back("kernel ratio unbounded at the working radius; precondition fails");
    c.fitted["k_r"] = std::numeric_limits<double>::infinity();
    c.pass = false;
    return c;
  }
  const double k_r = comp.k_r[0];

  GridSpec fine = grid;
  fine.h = grid.h / 2.0;
  const BoundaryDataFamily fam(model.dim, x0, r, seed, true);

  bool support_bug = false;
  auto cobs = [&](const GridSpec& gs) -> double {
    const DiscreteGenerator gen = DiscreteGenerator::assemble(model, gs);
    const auto mask = ball_mask(gen, x0, r / 2.0);
    const HarmonicBatch batch = solve_family(gen, mask, fam, n_h);
    const int src = gen.nearest_node(x0);
    std::vector<int> zs;
    for (int i = 0; i < gen.size(); ++i)
      if (dist(gen.node(i), x0) < r / 4.0 && i != src) zs.push_back(i);
    double best = 0;
    for (int k = 0; k < n_h; ++k) {
      const double u0 = batch.solutions[k][src];
      const double floor = 1e-12 * std::max(batch.sup_norms[k], 1e-30);
      for (int z : zs) {
        const double uz = batch.solutions[k][z];
        if (uz <= floor) {
          if (u0 > floor) support_bug = true;
          continue;
        }
        best = std::max(best, u0 / (k_r * uz));
      }
    }
    return best;
  };

  const double c1 = cobs(grid), c2 = cobs(fine);
  c.diagnostics.add({grid.h, c1, k_r});
  c.diagnostics.add({fine.h, c2, k_r});
  c.fitted["c_obs"] = c2;
  c.fitted["k_r"] = k_r;
  c.fitted["rel_change"] = rel_change(c1, c2);
  if (support_bug)
    c.notes.push_back("a start point sees the data while a nearby one does not");
  c.pass = !support_bug && c2 > 0 && std::isfinite(c2) &&
           c.fitted["rel_change"] < c.tolerances["rel_change_max"];
  return c;
}

// ---- functional inequalities -----------------------------------------------------

ClaimCheck check_weighted_poincare(const ModelSpec& model, const GridSpec& grid,
                                   std::uint64_t seed, int n_funcs) {
  model.validate();
  const Vec x0 = vec0();
  const std::vector<double> Rs = {0.25, 0.5, 1.0};

  ClaimCheck c;
  c.claim_id = "prop_3_4";
  c.tolerances["rel_change_max"] = 0.20;
  c.diagnostics.columns = {"R", "h", "max_ratio", "n_used"};

  const TestFunctionFamily fam(model.dim, grid.extent, seed);
  const int dim = model.dim;
  const double L = 2.0 * grid.extent;

  // lattice-only computation; the jump part plays no role in this inequality
  auto max_ratio = [&](double h, double R, int* used_out) -> double {
    const int per = static_cast<int>(std::lround(L / h));
    const int n = (dim == 1) ? per : per * per;
    auto node = [&](int i) -> Vec {
      if (dim == 1) return vec1(-grid.extent + i * h);
      return vec2(-grid.extent + (i / per) * h, -grid.extent + (i % per) * h);
    };
    auto fwd = [&](int i, int axis) -> int {
      if (dim == 1) return (i + 1) % per;
      int a = i / per, b = i % per;
      if (axis == 0) a = (a + 1) % per;
      else b = (b + 1) % per;
      return a * per + b;
    };
    std::vector<double> phi(n);
    for (int i = 0; i < n; ++i) {
      const double q = std::max(0.0, 1.0 - dist(node(i), x0) / R);
      phi[i] = q * q;
    }
    double best = 0;
    int used = 0;
    for (int k = 0; k < n_funcs; ++k) {
      std::vector<double> f(n);
      for (int i = 0; i < n; ++i) f[i] = fam.eval(k, node(i));
      double sw = 0, sf = 0;
      for (int i = 0; i < n; ++i) {
        sw += phi[i];
        sf += f[i] * phi[i];
      }
      if (sw <= 0) continue;
      const double mean = sf / sw;
      double lhs = 0, rhs = 0;
      for (int i = 0; i < n; ++i) {
        if (phi[i] == 0) continue;
        lhs += (f[i] - mean) * (f[i] - mean) * phi[i];
        for (int a = 0; a < dim; ++a) {
          const double g = (f[fwd(i, a)] - f[i]) / h;
          rhs += g * g * phi[i];
        }
      }
      if (rhs < 1e-18) continue;  // flat on the weight support
      ++used;
      best = std::max(best, lhs / (R * R * rhs));
    }
    if (used_out) *used_out = used;
    return best;
  };

  bool all_ok = true;
  double overall = 0;
  for (double R : Rs) {
    double prev = -1;
    for (int lev = 0; lev < 3; ++lev) {
      const double h = grid.h / (1 << lev);
      int used = 0;
      const double v = max_ratio(h, R, &used);
      c.diagnostics.add({R, h, v, static_cast<double>(used)});
      if (used < n_funcs / 4) {
        all_ok = false;
        c.notes.push_back("too few usable test functions on the weight support");
      }
      if (prev >= 0 && rel_change(prev, v) >= c.tolerances["rel_change_max"]) all_ok = false;
      prev = v;
      if (lev == 2) {
        overall = std::max(overall, v);
        std::ostringstream key;
        key << "ratio_R_" << R;
        c.fitted[key.str()] = v;
      }
    }
  }
  c.fitted["ratio_max"] = overall;
  c.pass = all_ok && std::isfinite(overall) && overall > 0;
  return c;
}

ClaimCheck check_nash(const ModelSpec& model, const GridSpec& grid, std::uint64_t seed,
                      int n_funcs) {
  model.validate();

  ClaimCheck c;
  c.claim_id = "nash";
  c.tolerances["rel_change_max"] = 0.20;
  c.diagnostics.columns = {"h", "max_ratio", "n_used"};

  const TestFunctionFamily fam(model.dim, grid.extent, seed);
  const double pw = 2.0 * (1.0 + 2.0 / model.dim);
  const double qw = 4.0 / model.dim;

  double prev = -1;
  bool stable = true;
  double final_ratio = 0;
  for (int lev = 0; lev < 3; ++lev) {
    GridSpec gs = grid;
    gs.h = grid.h / (1 << lev);
    const DiscreteGenerator gen = DiscreteGenerator::assemble(model, gs);
    const double vol = gen.cell_volume();
    double best = 0;
    int used = 0;
    for (int k = 0; k < n_funcs; ++k) {
      Eigen::VectorXd f(gen.size());
      for (int i = 0; i < gen.size(); ++i) f[i] = fam.eval(k, gen.node(i));
      double n1 = 0, n2 = 0;
      for (int i = 0; i < gen.size(); ++i) {
        n1 += std::abs(f[i]) * vol;
        n2 += f[i] * f[i] * vol;
      }
      const double energy = gen.form_energy(f);
      if (energy < 1e-18 * std::max(n2, 1e-30)) continue;
      ++used;
      best = std::max(best, std::pow(n2, pw / 2.0) / (energy * std::pow(n1, qw)));
    }
    c.diagnostics.add({gs.h, best, static_cast<double>(used)});
    if (used < n_funcs / 4) {
      stable = false;
      c.notes.push_back("too few usable test functions");
    }
    if (prev >= 0 && rel_change(prev, best) >= c.tolerances["rel_change_max"]) stable = false;
    prev = best;
    final_ratio = best;
  }
  c.fitted["ratio_max"] = final_ratio;
  c.pass = stable && std::isfinite(final_ratio) && final_ratio > 0;
  return c;
}

// ---- registry -------------------------------------------------------------------

const std::vector<std::string>& claim_ids() {
  static const std::vector<std::string> ids = {
      "thm_2_4",  "thm_2_5",  "thm_2_6",  "thm_2_7",  "prop_3_2", "prop_3_4",
      "prop_4_1a", "prop_4_1b", "prop_5_1", "prop_6_1", "nash"};
  return ids;
}

std::string claim_description(const std::string& id) {
  if (id == "thm_2_4") return "off-diagonal envelope of the unit-range-jump oracle density";
  if (id == "thm_2_5") return "near-diagonal density floor on a calibrated parabolic region";
  if (id == "thm_2_6") return "oscillation exponent of harmonic functions under refinement";
  if (id == "thm_2_7") return "uniform sup/inf ratio for nonnegative harmonic functions";
  if (id == "prop_3_2") return "displacement tightness scale across ball radii";
  if (id == "prop_3_4") return "weighted mean-square/gradient ratio on shrinking weights";
  if (id == "prop_4_1a") return "mean exit time scaling across ball radii";
  if (id == "prop_4_1b") return "small-target hitting probability against target volume";
  if (id == "prop_5_1") return "jump-count identity against the occupation integral";
  if (id == "prop_6_1") return "harmonic-measure comparison through the kernel ratio";
  if (id == "nash") return "discrete Nash ratio stability under refinement";
  throw std::invalid_argument("unknown claim id: " + id);
}

}  // namespace jumphk
