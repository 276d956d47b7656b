#include "choicekit/optim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace choicekit {

namespace {

constexpr double kC1 = 1e-4;  // sufficient decrease
constexpr double kC2 = 0.9;   // curvature

struct LinePoint {
  double alpha = 0.0, f = 0.0, dphi = 0.0;
};

// cubic minimizer of an interval with function/derivative info at both ends;
// falls back to bisection when the cubic is degenerate or outside the bracket
double interpolate(const LinePoint& lo, const LinePoint& hi) {
  const double d1 = lo.dphi + hi.dphi - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
  const double disc = d1 * d1 - lo.dphi * hi.dphi;
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), hi.alpha - lo.alpha);
    const double a =
        hi.alpha - (hi.alpha - lo.alpha) * (hi.dphi + d2 - d1) / (hi.dphi - lo.dphi + 2.0 * d2);
    const double amin = std::min(lo.alpha, hi.alpha), amax = std::max(lo.alpha, hi.alpha);
    const double pad = 0.1 * (amax - amin);
    if (std::isfinite(a) && a > amin + pad && a < amax - pad) return a;
  }
  return 0.5 * (lo.alpha + hi.alpha);
}

}  // namespace

OptimResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0,
                          const OptimOptions& opt) {
  const Eigen::Index p = x0.size();
  OptimResult res;
  res.x = x0;
  res.gradient.resize(p);

  Eigen::VectorXd g(p), g_new(p), x_new(p);
  double f = objective(res.x, g);
  if (!std::isfinite(f)) {
    res.message = "objective not finite at the start";
    return res;
  }

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(p, p);

  Eigen::VectorXd g_trial(p);
  auto phi = [&](double alpha, const Eigen::VectorXd& x, const Eigen::VectorXd& dir,
                 double& dphi) {
    x_new = x + alpha * dir;
    const double fv = objective(x_new, g_trial);
    dphi = std::isfinite(fv) ? g_trial.dot(dir) : std::numeric_limits<double>::quiet_NaN();
    return fv;
  };

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    res.iterations = iter;
    res.f = f;
    res.gradient = g;

    const double gnorm = g.norm();
    if (gnorm <= opt.gradient_tolerance * (1.0 + std::fabs(f))) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    if (res.x.lpNorm<Eigen::Infinity>() > opt.parameter_bound) {
      res.message = "parameter divergence (possible separation or unbounded likelihood)";
      return res;
    }

    Eigen::VectorXd dir = -(Hinv * g);
    double dphi0 = dir.dot(g);
    if (!(dphi0 < 0.0)) {  // not a descent direction: reset to steepest descent
      Hinv.setIdentity();
      dir = -g;
      dphi0 = -gnorm * gnorm;
    }

    // zoom stage of the strong-Wolfe search (Nocedal-Wright alg. 3.6)
    LinePoint chosen;
    bool found = false;
    auto zoom = [&](LinePoint lo, LinePoint hi) {
      for (int z = 0; z < 40; ++z) {
        const double a = interpolate(lo, hi);
        double dz;
        const double fz = phi(a, res.x, dir, dz);
        const LinePoint pt{a, fz, dz};
        if (!(fz <= f + kC1 * a * dphi0) || !std::isfinite(fz) || fz >= lo.f) {
          hi = pt;
        } else {
          if (std::fabs(dz) <= -kC2 * dphi0) {
            chosen = pt;
            found = true;
            return;
          }
          if (dz * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = pt;
        }
        if (std::fabs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, std::fabs(lo.alpha))) {
          if (lo.alpha > 0.0 && lo.f < f) {
            chosen = lo;
            found = true;
          }
          return;
        }
      }
      if (lo.alpha > 0.0 && lo.f < f) {
        chosen = lo;
        found = true;
      }
    };

    // bracketing stage (alg. 3.5)
    LinePoint prev{0.0, f, dphi0};
    double alpha = 1.0;
    const double alpha_max = 1e3;
    for (int ls = 0; ls < 30 && !found; ++ls) {
      double dphi;
      const double fv = phi(alpha, res.x, dir, dphi);
      const LinePoint cur{alpha, fv, dphi};
      if (!(fv <= f + kC1 * alpha * dphi0) || !std::isfinite(fv) || (ls > 0 && fv >= prev.f)) {
        zoom(prev, cur);
        break;
      }
      if (std::fabs(dphi) <= -kC2 * dphi0) {
        chosen = cur;
        found = true;
        break;
      }
      if (dphi >= 0.0) {
        zoom(cur, prev);
        break;
      }
      prev = cur;
      alpha = std::min(2.0 * alpha, alpha_max);
      if (alpha >= alpha_max) break;
    }

    if (!found) {
      // plain backtracking as a last resort
      double a = 1.0;
      for (int bt = 0; bt < 60 && !found; ++bt) {
        double dphi;
        const double fv = phi(a, res.x, dir, dphi);
        if (std::isfinite(fv) && fv <= f + kC1 * a * dphi0) {
          chosen = {a, fv, dphi};
          found = true;
        }
        a *= 0.5;
      }
      if (!found) {
        res.message = "line search failed";
        return res;
      }
    }

    // BFGS update on the inverse Hessian
    const Eigen::VectorXd step = chosen.alpha * dir;
    x_new = res.x + step;
    f = objective(x_new, g_new);  // re-evaluate so x/f/g stay consistent
    const Eigen::VectorXd yk = g_new - g;
    const double sty = step.dot(yk);
    if (sty > 1e-12 * step.norm() * yk.norm()) {
      const double rho = 1.0 / sty;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
      Hinv = (I - rho * step * yk.transpose()) * Hinv * (I - rho * yk * step.transpose()) +
             rho * step * step.transpose();
    } else {
      Hinv.setIdentity();
    }
    res.x = x_new;
    g = g_new;

    if (opt.verbose)
      std::fprintf(stderr, "iter %3d  f=%.10g  |g|=%.3e  step=%.3e\n", iter, f, g.norm(),
                   chosen.alpha);
  }

  res.f = f;
  res.gradient = g;
  res.iterations = opt.max_iterations;
  const double gnorm = g.norm();
  if (gnorm <= opt.gradient_tolerance * (1.0 + std::fabs(f))) {
    res.converged = true;
    res.message = "gradient tolerance reached";
  } else {
    res.message = "maximum iterations reached";
  }
  return res;
}

}  // namespace choicekit
