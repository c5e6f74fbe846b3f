#include "aionfit/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "aionfit/errors.hpp"

namespace aionfit {

void LbfgsOptions::validate() const {
  if (!(step_scale > 0.0)) throw ConfigError("L-BFGS step scale must be positive");
  if (history < 1) throw ConfigError("L-BFGS history must be at least 1");
  if (!(grad_tol >= 0.0)) throw ConfigError("L-BFGS gradient tolerance must be nonnegative");
  if (max_evals_per_iter < 1) throw ConfigError("L-BFGS needs at least one evaluation per iteration");
  if (max_iterations < 0) throw ConfigError("L-BFGS iteration count must be nonnegative");
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) throw ConfigError("L-BFGS Wolfe constants need 0 < c1 < c2 < 1");
}

namespace {

struct Trial {
  double step = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

struct LineSearchOutcome {
  bool accepted = false;  // a point with f < f0 was found
  bool wolfe = false;     // and it satisfies the strong Wolfe conditions
  Trial point;
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), or the
// midpoint when the interpolant is degenerate.
double cubic_step(const Trial& a, const Trial& b) {
  const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.step - b.step);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (!(disc >= 0.0) || !std::isfinite(b.f)) return 0.5 * (a.step + b.step);
  const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
  const double denom = b.slope - a.slope + 2.0 * d2;
  if (denom == 0.0) return 0.5 * (a.step + b.step);
  return b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
}

class StrongWolfeSearch {
 public:
  StrongWolfeSearch(const ObjectiveFunction& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir, double f0,
                    double slope0, const LbfgsOptions& opts, int& evals)
      : f_(f), x_(x), dir_(dir), f0_(f0), slope0_(slope0), opts_(opts), evals_(evals) {}

  LineSearchOutcome run(double initial_step) {
    Trial prev;
    prev.step = 0.0;
    prev.f = f0_;
    prev.slope = slope0_;
    double step = initial_step;
    for (int i = 0; budget_left(); ++i) {
      Trial cur = eval(step);
      if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur);
      if (std::abs(cur.slope) <= -opts_.c2 * slope0_) return done(cur, true);
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      step *= 2.0;
    }
    return done_best();
  }

 private:
  bool budget_left() const { return used_ < opts_.max_evals_per_iter; }

  bool armijo(const Trial& t) const { return std::isfinite(t.f) && t.f <= f0_ + opts_.c1 * t.step * slope0_; }

  Trial eval(double step) {
    Trial t;
    t.step = step;
    t.x = x_ + step * dir_;
    t.g.resize(x_.size());
    t.f = f_(t.x, t.g);
    ++used_;
    ++evals_;
    if (!std::isfinite(t.f) || !t.g.allFinite()) {
      t.f = std::numeric_limits<double>::infinity();
      t.slope = std::numeric_limits<double>::quiet_NaN();
    } else {
      t.slope = t.g.dot(dir_);
    }
    if (std::isfinite(t.f) && t.f < f0_ && (!best_ || t.f < best_->f)) best_ = t;
    return t;
  }

  LineSearchOutcome zoom(Trial lo, Trial hi) {
    while (budget_left()) {
      const double width = hi.step - lo.step;
      if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.step))) break;
      double step = cubic_step(lo, hi);
      const double a = std::min(lo.step, hi.step), b = std::max(lo.step, hi.step);
      const double margin = 0.1 * (b - a);
      if (!std::isfinite(step) || step < a + margin || step > b - margin) step = 0.5 * (a + b);
      Trial cur = eval(step);
      if (!armijo(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -opts_.c2 * slope0_) return done(cur, true);
        if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return done_best();
  }

  LineSearchOutcome done(const Trial& t, bool wolfe) {
    LineSearchOutcome o;
    o.accepted = t.f < f0_;
    o.wolfe = wolfe && o.accepted;
    o.point = t;
    if (!o.accepted) return done_best();
    return o;
  }

  LineSearchOutcome done_best() {
    LineSearchOutcome o;
    if (best_) {
      o.accepted = true;
      o.point = *best_;
    }
    return o;
  }

  const ObjectiveFunction& f_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  double f0_;
  double slope0_;
  const LbfgsOptions& opts_;
  int& evals_;
  int used_ = 0;
  std::optional<Trial> best_;
};

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFunction& f, const Eigen::VectorXd& x0, const LbfgsOptions& opts) {
  opts.validate();
  LbfgsResult res;
  res.x = x0;
  Eigen::VectorXd g(x0.size());
  res.f = f(res.x, g);
  res.evaluations = 1;
  if (!std::isfinite(res.f) || !g.allFinite()) throw InputError("objective is not finite at the starting point");
  res.trace.push_back(res.f);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  bool retried_steepest = false;

  while (res.iterations < opts.max_iterations) {
    if (g.size() == 0 || g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.converged = true;
      res.message = "gradient below tolerance";
      return res;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = g;
    const std::size_t m = s_hist.size();
    std::vector<double> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      slope = g.dot(dir);
    }

    double step = opts.step_scale;
    if (s_hist.empty()) step = opts.step_scale * std::min(1.0, 1.0 / g.norm());

    StrongWolfeSearch search(f, res.x, dir, res.f, slope, opts, res.evaluations);
    LineSearchOutcome ls = search.run(step);
    if (!ls.accepted) {
      if (!s_hist.empty() && !retried_steepest) {
        // Discard curvature information and retry along the gradient.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        retried_steepest = true;
        continue;
      }
      res.line_search_failed = true;
      res.message = "line search failed to decrease the objective";
      return res;
    }
    retried_steepest = false;

    Eigen::VectorXd s = ls.point.x - res.x;
    Eigen::VectorXd y = ls.point.g - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * std::sqrt(s.squaredNorm() * y.squaredNorm()) && sy > 0.0) {
      if (static_cast<int>(s_hist.size()) == opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    res.x = std::move(ls.point.x);
    g = std::move(ls.point.g);
    res.f = ls.point.f;
    res.trace.push_back(res.f);
    ++res.iterations;
  }
  res.converged = g.lpNorm<Eigen::Infinity>() <= opts.grad_tol;
  res.message = res.converged ? "gradient below tolerance" : "iteration limit reached";
  return res;
}

}  // namespace aionfit
