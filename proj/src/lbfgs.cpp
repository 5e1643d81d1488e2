#include "maxent_tomo/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace maxent_tomo {

namespace {

using Eigen::VectorXd;

struct Point {
  double alpha;
  double f;
  double slope;  // directional derivative g.d
  VectorXd x;
  VectorXd g;
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), safeguarded
// to stay inside the central part of [a, b].
double interpolate(const Point& a, const Point& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double cand = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    if (std::isfinite(cand)) t = cand;
  }
  const double margin = 0.1 * (hi - lo);
  return std::clamp(t, lo + margin, hi - margin);
}

class LineSearch {
 public:
  LineSearch(const Objective& fn, const LbfgsOptions& opts, int& evals) : fn_(fn), opts_(opts), evals_(evals) {}

  // Returns true and fills `out` when a point satisfying the strong Wolfe
  // conditions (or, failing that, sufficient decrease) has been found.
  bool search(const Point& start, const VectorXd& dir, double alpha0, double alpha_max, Point& out) {
    start_ = &start;
    dir_ = &dir;
    Point prev = start;
    double alpha = alpha0;
    best_ = nullptr;
    for (int i = 0; i < opts_.max_line_search; ++i) {
      Point cur = eval(alpha);
      if (!std::isfinite(cur.f) || cur.f > armijo(alpha) || (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur, out, opts_.max_line_search - i);
      }
      if (std::abs(cur.slope) <= -opts_.c2 * start.slope) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out, opts_.max_line_search - i);
      remember(cur);
      if (alpha >= alpha_max) {
        out = std::move(cur);
        return true;
      }
      prev = std::move(cur);
      alpha = std::min(2.0 * alpha, alpha_max);
    }
    return fallback(out);
  }

 private:
  double armijo(double alpha) const { return start_->f + opts_.c1 * alpha * start_->slope; }

  Point eval(double alpha) {
    Point p;
    p.alpha = alpha;
    p.x = start_->x + alpha * *dir_;
    p.g.resize(p.x.size());
    p.f = fn_(p.x, p.g);
    p.slope = p.g.dot(*dir_);
    ++evals_;
    return p;
  }

  void remember(const Point& p) {
    if (std::isfinite(p.f) && p.f <= armijo(p.alpha) && (!best_ || p.f < best_->f)) {
      kept_ = p;
      best_ = &kept_;
    }
  }

  bool fallback(Point& out) {
    if (!best_) return false;
    out = *best_;
    return true;
  }

  bool zoom(Point lo, Point hi, Point& out, int budget) {
    for (int i = 0; i < budget; ++i) {
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) break;
      Point cur = eval(interpolate(lo, hi));
      if (!std::isfinite(cur.f) || cur.f > armijo(cur.alpha) || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -opts_.c2 * start_->slope) {
        out = std::move(cur);
        return true;
      }
      remember(cur);
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    if (lo.alpha > 0.0 && lo.f < start_->f) {
      out = std::move(lo);
      return true;
    }
    return fallback(out);
  }

  const Objective& fn_;
  const LbfgsOptions& opts_;
  int& evals_;
  const Point* start_ = nullptr;
  const VectorXd* dir_ = nullptr;
  Point kept_;
  const Point* best_ = nullptr;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& fn, VectorXd x0, const LbfgsOptions& opts) {
  LbfgsResult res;
  Point cur;
  cur.alpha = 0.0;
  cur.x = std::move(x0);
  cur.g.resize(cur.x.size());
  cur.f = fn(cur.x, cur.g);
  res.evaluations = 1;

  std::deque<VectorXd> s_hist;
  std::deque<VectorXd> y_hist;
  std::deque<double> rho_hist;
  LineSearch ls(fn, opts, res.evaluations);

  auto finish = [&](bool converged, std::string msg) {
    res.x = cur.x;
    res.f = cur.f;
    res.grad = cur.g;
    res.converged = converged;
    res.message = std::move(msg);
    return res;
  };

  if (!std::isfinite(cur.f)) return finish(false, "objective is not finite at the initial point");
  if (opts.on_iterate) opts.on_iterate(0, cur.f);

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    if (cur.g.lpNorm<Eigen::Infinity>() < opts.grad_tol) return finish(true, "gradient tolerance reached");
    if (cur.f < opts.f_tol) return finish(true, "objective tolerance reached");

    // Two-loop recursion.
    VectorXd q = cur.g;
    const std::size_t m = s_hist.size();
    std::vector<double> a(m);
    for (std::size_t i = m; i-- > 0;) {
      a[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= a[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(q);
      q += (a[i] - b) * s_hist[i];
    }
    VectorXd dir = -q;
    cur.slope = cur.g.dot(dir);
    if (!(cur.slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -cur.g;
      cur.slope = -cur.g.squaredNorm();
    }
    double alpha0 = m == 0 ? std::min(1.0, 1.0 / cur.g.lpNorm<Eigen::Infinity>()) : 1.0;
    double alpha_max = std::numeric_limits<double>::infinity();
    if (opts.step_norm && opts.max_step > 0.0) {
      const double len = opts.step_norm(dir);
      if (len > 0.0) alpha_max = opts.max_step / len;
      alpha0 = std::min(alpha0, alpha_max);
    }

    Point next;
    if (!ls.search(cur, dir, alpha0, alpha_max, next)) {
      if (m == 0) return finish(false, "line search failed");
      // Retry once from a steepest-descent direction.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -cur.g;
      cur.slope = -cur.g.squaredNorm();
      alpha0 = std::min(1.0, 1.0 / cur.g.lpNorm<Eigen::Infinity>());
      if (opts.step_norm && opts.max_step > 0.0) {
        const double len = opts.step_norm(dir);
        alpha_max = len > 0.0 ? opts.max_step / len : std::numeric_limits<double>::infinity();
        alpha0 = std::min(alpha0, alpha_max);
      }
      if (!ls.search(cur, dir, alpha0, alpha_max, next)) {
        return finish(false, "line search failed");
      }
    }

    VectorXd s = next.x - cur.x;
    VectorXd y = next.g - cur.g;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm() && sy > 0.0) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    next.alpha = 0.0;
    cur = std::move(next);
    if (opts.on_iterate) opts.on_iterate(res.iterations + 1, cur.f);
  }
  if (cur.g.lpNorm<Eigen::Infinity>() < opts.grad_tol || cur.f < opts.f_tol) return finish(true, "tolerance reached");
  return finish(false, "iteration limit reached");
}

}  // namespace maxent_tomo
