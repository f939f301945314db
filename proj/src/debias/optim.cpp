#include "debias/optim.hpp"

#include <cmath>
#include <deque>

namespace debias {

namespace {

constexpr double kC1 = 1e-4;  // Armijo
constexpr double kC2 = 0.9;   // curvature

struct Probe {
  double a;   // step length
  double f;
  double dg;  // directional derivative at the probe
};

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& fg, Vector x0, const LbfgsConfig& cfg) {
  const Index dim = x0.size();
  LbfgsResult best;
  best.x = x0;
  best.grad.resize(dim);

  Vector x = std::move(x0);
  Vector g(dim);
  double f = fg(x, g);
  int evals = 1;
  if (!std::isfinite(f)) throw NumericError("lbfgs: objective not finite at the initial point");
  best.f = f;
  best.x = x;
  best.grad = g;

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;

  Vector xn(dim), gn(dim), p(dim);
  bool converged = false;
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol * std::max(1.0, std::abs(f))) {
      converged = true;
      break;
    }

    // two-loop recursion
    p = -g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(p);
      p.noalias() -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const Vector& s = s_hist.back();
      const Vector& y = y_hist.back();
      p *= s.dot(y) / y.squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      double beta = rho_hist[i] * y_hist[i].dot(p);
      p.noalias() += (alpha[i] - beta) * s_hist[i];
    }

    double dg0 = g.dot(p);
    if (!(dg0 < 0)) {  // not a descent direction: restart from steepest descent
      p = -g;
      dg0 = g.dot(p);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // strong-Wolfe line search with bracketing + bisection/interpolation zoom
    auto probe = [&](double a) -> Probe {
      xn = x + a * p;
      double fa = fg(xn, gn);
      ++evals;
      if (std::isfinite(fa) && fa < best.f) {
        best.f = fa;
        best.x = xn;
        best.grad = gn;
      }
      return {a, fa, std::isfinite(fa) ? gn.dot(p) : 0.0};
    };

    Probe lo{0.0, f, dg0};
    double step = 1.0;
    bool found = false;
    Probe cur{};
    Probe hi{};
    bool bracketed = false;
    for (int ls = 0; ls < cfg.max_line_search; ++ls) {
      cur = probe(step);
      if (!std::isfinite(cur.f)) {  // overflow territory: shrink hard
        step *= 0.25;
        continue;
      }
      if (cur.f > f + kC1 * step * dg0 || (ls > 0 && cur.f >= lo.f && lo.a > 0.0)) {
        hi = cur;
        bracketed = true;
        break;
      }
      if (std::abs(cur.dg) <= -kC2 * dg0) {
        found = true;
        break;
      }
      if (cur.dg >= 0) {
        hi = lo;
        lo = cur;
        bracketed = true;
        break;
      }
      lo = cur;
      step *= 2.0;
    }
    if (bracketed && !found) {
      for (int z = 0; z < cfg.max_line_search; ++z) {
        double a = 0.5 * (lo.a + hi.a);
        cur = probe(a);
        if (!std::isfinite(cur.f) || cur.f > f + kC1 * a * dg0 || cur.f >= lo.f) {
          hi = cur;
        } else {
          if (std::abs(cur.dg) <= -kC2 * dg0) {
            found = true;
            break;
          }
          if (cur.dg * (hi.a - lo.a) >= 0) hi = lo;
          lo = cur;
        }
        if (std::abs(hi.a - lo.a) < 1e-14 * std::max(1.0, std::abs(lo.a))) break;
      }
      if (!found && std::isfinite(lo.f) && lo.f < f && lo.a > 0.0) {
        cur = probe(lo.a);  // re-evaluate to refresh xn/gn at the bracket low point
        found = true;
      }
    }
    if (!found) break;  // line search failed: stationary to working precision

    double fprev = f;
    Vector s = xn - x;
    Vector y = gn - g;
    x.swap(xn);
    g.swap(gn);
    f = cur.f;

    double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > cfg.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    if (std::abs(fprev - f) <= cfg.f_tol * std::max({1.0, std::abs(f), std::abs(fprev)})) {
      converged = true;
      ++iter;
      break;
    }
  }

  best.iterations = iter;
  best.evaluations = evals;
  best.converged = converged;
  return best;
}

}  // namespace debias
