#include "pgl/descent.hpp"

#include <algorithm>
#include <limits>

namespace pgl {

QuarticFunctional::QuarticFunctional(GridPtr grid, double link_weight, const LinkField2D& links, double coupling,
                                     std::vector<double> c, std::vector<double> alpha, Mask clamped)
    : grid_(std::move(grid)), w_(link_weight), c_(std::move(c)), alpha_(std::move(alpha)), clamped_(std::move(clamped)) {
  const std::size_t n = grid_->size();
  if (!links.grid().same_layout(*grid_)) throw InputError("links live on a different grid");
  if (c_.size() != n || alpha_.size() != n) throw InputError("node coefficient arrays have wrong size");
  if (clamped_.empty()) clamped_.assign(n, 0);
  if (clamped_.size() != n) throw InputError("clamp mask has wrong size");
  ex_.assign(n, cplx(0.0));
  ey_.assign(n, cplx(0.0));
  for (int j = 0; j < grid_->ny(); ++j)
    for (int i = 0; i < grid_->nx(); ++i) {
      const std::size_t k = grid_->index(i, j);
      if (grid_->has_xlink(i, j)) ex_[k] = std::polar(1.0, -coupling * links.x(i, j));
      if (grid_->has_ylink(i, j)) ey_[k] = std::polar(1.0, -coupling * links.y(i, j));
    }
}

void QuarticFunctional::project(std::vector<cplx>& u) const {
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!free_node(k)) u[k] = 0.0;
}

std::pair<double, double> QuarticFunctional::energy_parts(const std::vector<cplx>& u) const {
  const Grid2D& g = *grid_;
  const int nx = g.nx();
  std::vector<double> kin(g.size(), 0.0), pot(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside(k)) continue;
    double s = 0.0;
    if (ex_[k] != 0.0) s += std::norm(u[k + 1] * ex_[k] - u[k]);
    if (ey_[k] != 0.0) s += std::norm(u[k + nx] * ey_[k] - u[k]);
    kin[k] = w_ * s;
    const double d = alpha_[k] - std::norm(u[k]);
    pot[k] = c_[k] * d * d;
  }
  return {pairwise_sum(kin), pairwise_sum(pot)};
}

double QuarticFunctional::energy(const std::vector<cplx>& u) const {
  const auto [k, p] = energy_parts(u);
  return k + p;
}

void QuarticFunctional::gradient(const std::vector<cplx>& u, std::vector<cplx>& gr) const {
  const Grid2D& g = *grid_;
  const int nx = g.nx();
  gr.assign(g.size(), cplx(0.0));
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside(k)) continue;
    if (ex_[k] != 0.0) {
      const cplx v = u[k + 1] * ex_[k] - u[k];
      gr[k] -= 2.0 * w_ * v;
      gr[k + 1] += 2.0 * w_ * v * std::conj(ex_[k]);
    }
    if (ey_[k] != 0.0) {
      const cplx v = u[k + nx] * ey_[k] - u[k];
      gr[k] -= 2.0 * w_ * v;
      gr[k + nx] += 2.0 * w_ * v * std::conj(ey_[k]);
    }
    gr[k] -= 4.0 * c_[k] * (alpha_[k] - std::norm(u[k])) * u[k];
  }
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!free_node(k)) gr[k] = 0.0;
}

std::array<double, 5> QuarticFunctional::line_polynomial(const std::vector<cplx>& u, const std::vector<cplx>& d) const {
  const Grid2D& g = *grid_;
  const int nx = g.nx();
  const std::size_t n = g.size();
  std::array<std::vector<double>, 5> terms;
  for (auto& t : terms) t.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!g.inside(k)) continue;
    auto link = [&](std::size_t q, cplx e) {
      const cplx v0 = u[q] * e - u[k];
      const cplx dv = d[q] * e - d[k];
      terms[0][k] += w_ * std::norm(v0);
      terms[1][k] += 2.0 * w_ * std::real(std::conj(v0) * dv);
      terms[2][k] += w_ * std::norm(dv);
    };
    if (ex_[k] != 0.0) link(k + 1, ex_[k]);
    if (ey_[k] != 0.0) link(k + nx, ey_[k]);
    // (alpha - p0 - p1 t - p2 t^2)^2
    const double q0 = alpha_[k] - std::norm(u[k]);
    const double p1 = 2.0 * std::real(std::conj(u[k]) * d[k]);
    const double p2 = std::norm(d[k]);
    const double c = c_[k];
    terms[0][k] += c * q0 * q0;
    terms[1][k] += -2.0 * c * q0 * p1;
    terms[2][k] += c * (p1 * p1 - 2.0 * q0 * p2);
    terms[3][k] += 2.0 * c * p1 * p2;
    terms[4][k] += c * p2 * p2;
  }
  std::array<double, 5> p{};
  for (int i = 0; i < 5; ++i) p[i] = pairwise_sum(terms[i]);
  return p;
}

double eval_poly(const std::array<double, 5>& p, double t) {
  return (((p[4] * t + p[3]) * t + p[2]) * t + p[1]) * t + p[0];
}

double argmin_quartic(const std::array<double, 5>& p) {
  const double scale = std::max({std::abs(p[1]), std::abs(p[2]), std::abs(p[3]), std::abs(p[4])});
  if (scale == 0.0) return 0.0;
  auto dp = [&](double t) { return ((4 * p[4] * t + 3 * p[3]) * t + 2 * p[2]) * t + p[1]; };
  auto ddp = [&](double t) { return (12 * p[4] * t + 6 * p[3]) * t + 2 * p[2]; };
  std::vector<double> cand{0.0};
  if (p[2] > 0) cand.push_back(-p[1] / (2 * p[2]));
  if (p[4] > 0) {
    // Real roots of the cubic derivative via the depressed-cubic form.
    const double a = 3 * p[3] / (4 * p[4]), b = 2 * p[2] / (4 * p[4]), c = p[1] / (4 * p[4]);
    const double q = (3 * b - a * a) / 9, r = (9 * a * b - 27 * c - 2 * a * a * a) / 54;
    const double disc = q * q * q + r * r;
    if (disc > 0) {
      const double s = std::cbrt(r + std::sqrt(disc)), t = std::cbrt(r - std::sqrt(disc));
      cand.push_back(s + t - a / 3);
    } else {
      const double th = std::acos(std::clamp(r / std::sqrt(-q * q * q), -1.0, 1.0));
      const double m = 2 * std::sqrt(-q);
      for (int k = 0; k < 3; ++k) cand.push_back(m * std::cos((th + 2 * M_PI * k) / 3) - a / 3);
    }
  }
  double best_t = 0.0, best = eval_poly(p, 0.0);
  for (double t : cand) {
    if (!std::isfinite(t)) continue;
    for (int it = 0; it < 3; ++it) {
      const double h2 = ddp(t);
      if (h2 <= 0) break;
      t -= dp(t) / h2;
    }
    const double v = eval_poly(p, t);
    if (std::isfinite(v) && v < best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

double max_residual(const std::vector<cplx>& g, double scale) {
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, std::abs(v));
  return m / scale;
}

namespace {
bool stalled(const DescentResult& r, const DescentOptions& o) {
  const int w = o.stall_window;
  if (w <= 0 || static_cast<int>(r.trace.size()) <= w) return false;
  const double e1 = r.trace.back(), e0 = r.trace[r.trace.size() - 1 - w];
  return e0 - e1 <= o.stall_rtol * std::abs(e1);
}

double rdot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<double> t(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) t[k] = std::real(std::conj(a[k]) * b[k]);
  return pairwise_sum(t);
}
}  // namespace

DescentResult minimize_ncg(const QuarticFunctional& f, std::vector<cplx>& u, const DescentOptions& opt) {
  f.project(u);
  DescentResult res;
  std::vector<cplx> g, g_old, d;
  f.gradient(u, g);
  res.energy = f.energy(u);
  res.residual = max_residual(g, opt.grad_scale);
  d.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) d[k] = -g[k];
  double gg_old = rdot(g, g);
  int since_restart = 0;
  for (int it = 1; it <= opt.max_iter && res.residual > opt.tol; ++it) {
    if (rdot(g, d) >= 0) {
      for (std::size_t k = 0; k < g.size(); ++k) d[k] = -g[k];
      since_restart = 0;
    }
    const auto p = f.line_polynomial(u, d);
    const double t = argmin_quartic(p);
    const double e_new = eval_poly(p, t);
    if (!(t != 0.0) || !(e_new <= res.energy + 1e-14 * std::abs(res.energy))) {
      if (since_restart == 0) break;  // steepest descent made no progress
      for (std::size_t k = 0; k < g.size(); ++k) d[k] = -g[k];
      since_restart = 0;
      continue;
    }
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += t * d[k];
    g_old.swap(g);
    f.gradient(u, g);
    res.energy = e_new;
    if (it % 50 == 0) res.energy = f.energy(u);  // resynchronise against drift
    res.residual = max_residual(g, opt.grad_scale);
    res.iterations = it;
    res.trace.push_back(res.energy);
    if (stalled(res, opt)) {
      res.stalled = true;
      break;
    }
    std::vector<cplx> y(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) y[k] = g[k] - g_old[k];
    const double gg = rdot(g, g);
    const double beta = std::max(0.0, rdot(g, y) / gg_old);
    gg_old = gg;
    ++since_restart;
    if (since_restart > 200) {
      since_restart = 0;
      for (std::size_t k = 0; k < g.size(); ++k) d[k] = -g[k];
    } else {
      for (std::size_t k = 0; k < g.size(); ++k) d[k] = -g[k] + beta * d[k];
    }
  }
  res.energy = f.energy(u);
  res.converged = res.residual <= opt.tol;
  return res;
}

DescentResult minimize_bb(const QuarticFunctional& f, std::vector<cplx>& u, const DescentOptions& opt) {
  f.project(u);
  DescentResult res;
  std::vector<cplx> g, g_old(u.size()), u_old(u.size()), d(u.size());
  f.gradient(u, g);
  res.energy = f.energy(u);
  res.residual = max_residual(g, opt.grad_scale);
  double step = -1.0;
  for (int it = 1; it <= opt.max_iter && res.residual > opt.tol; ++it) {
    for (std::size_t k = 0; k < g.size(); ++k) d[k] = -g[k];
    const auto p = f.line_polynomial(u, d);
    const double gg = -p[1];  // |g|^2
    if (!(gg > 0)) break;
    if (step <= 0) step = std::max(argmin_quartic(p), 1e-12);
    // Monotone Armijo backtracking on the exact line polynomial.
    double t = step;
    int back = 0;
    while (eval_poly(p, t) > res.energy - 1e-4 * t * gg && back < 60) {
      t *= 0.5;
      ++back;
    }
    if (back == 60) break;
    u_old = u;
    g_old = g;
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += t * d[k];
    res.energy = eval_poly(p, t);
    f.gradient(u, g);
    double ss = 0, sy = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const cplx s = u[k] - u_old[k], y = g[k] - g_old[k];
      ss += std::norm(s);
      sy += std::real(std::conj(s) * y);
    }
    step = sy > 0 ? ss / sy : 2.0 * t;
    if (it % 50 == 0) res.energy = f.energy(u);
    res.residual = max_residual(g, opt.grad_scale);
    res.iterations = it;
    res.trace.push_back(res.energy);
    if (stalled(res, opt)) {
      res.stalled = true;
      break;
    }
  }
  res.energy = f.energy(u);
  res.converged = res.residual <= opt.tol;
  return res;
}

}  // namespace pgl
