#include "pgl/criticalfields.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

namespace pgl {

std::pair<ScalarField2D, ScalarField2D> nodal_gradient(const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  ScalarField2D gx(f.grid_ptr()), gy(f.grid_ptr());
  const double h = g.h();
  auto diff = [&](int i, int j, int di, int dj) {
    const bool fwd = g.inside(i + di, j + dj), bwd = g.inside(i - di, j - dj);
    if (fwd && bwd) return (f(i + di, j + dj) - f(i - di, j - dj)) / (2.0 * h);
    if (fwd) return (f(i + di, j + dj) - f(i, j)) / h;
    if (bwd) return (f(i, j) - f(i - di, j - dj)) / h;
    return 0.0;
  };
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.inside(i, j)) continue;
      gx(i, j) = diff(i, j, 1, 0);
      gy(i, j) = diff(i, j, 0, 1);
    }
  return {gx, gy};
}

GammaData gamma_extract(const ScalarField2D& B0) {
  const Grid2D& g = B0.grid();
  auto [gx, gy] = nodal_gradient(B0);
  GammaData out;

  double max_grad = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) max_grad = std::max(max_grad, std::hypot(gx[k], gy[k]));
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside(k)) continue;
    if (std::abs(B0[k]) + std::hypot(gx[k], gy[k]) <= 2.0 * g.h() * max_grad) out.violation = true;
  }

  std::vector<int> slot(g.size(), -1);
  for (std::size_t s = 0; s < g.boundary().size(); ++s) slot[g.boundary()[s].index] = static_cast<int>(s);

  auto make_point = [&](std::size_t i, std::size_t j, double t) {
    GammaPoint p;
    p.i = i;
    p.j = j;
    p.t = t;
    const Point a = g.node(i), b = g.node(j);
    p.x = {(1 - t) * a.x + t * b.x, (1 - t) * a.y + t * b.y};
    p.grad = {(1 - t) * gx[i] + t * gx[j], (1 - t) * gy[i] + t * gy[j]};
    p.grad_norm = std::hypot(p.grad.x, p.grad.y);
    p.B_near = t <= 0.5 ? B0[i] : B0[j];
    return p;
  };
  auto add_crossing = [&](const GammaPoint& p) {
    const int si = slot[p.i], sj = slot[p.j];
    if (si < 0 || sj < 0) return;
    const BoundaryNode& bi = g.boundary()[si];
    const BoundaryNode& bj = g.boundary()[sj];
    if (bi.corner || bj.corner || !(p.grad_norm > 0.0)) return;
    Point n{(1 - p.t) * bi.normal.x + p.t * bj.normal.x, (1 - p.t) * bi.normal.y + p.t * bj.normal.y};
    const double len = std::hypot(n.x, n.y);
    if (!(len > 0.0)) return;
    n = {n.x / len, n.y / len};
    GammaCrossing c;
    c.point = p;
    c.normal = n;
    c.theta = std::acos(std::clamp(-(p.grad.x * n.x + p.grad.y * n.y) / p.grad_norm, -1.0, 1.0));
    out.crossings.push_back(c);
  };

  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.inside(i, j)) continue;
      const std::size_t k = g.index(i, j);
      if (B0[k] == 0.0) {
        GammaPoint p = make_point(k, k, 0.0);
        out.points.push_back(p);
        if (slot[k] >= 0 && !g.boundary()[slot[k]].corner && p.grad_norm > 0.0) add_crossing(p);
        continue;
      }
      const std::pair<int, int> nb[2] = {{i + 1, j}, {i, j + 1}};
      for (auto [ii, jj] : nb) {
        if (!g.inside(ii, jj)) continue;
        const std::size_t m = g.index(ii, jj);
        if (B0[k] * B0[m] >= 0.0) continue;
        GammaPoint p = make_point(k, m, B0[k] / (B0[k] - B0[m]));
        out.points.push_back(p);
        add_crossing(p);
      }
    }
  return out;
}

SpectralConstants spectral_constants(const std::string& cache_csv) {
  SpectralConstants sc;
  sc.theta0 = theta0().value;
  sc.lambda0 = lambda0().value;
  if (!cache_csv.empty() && std::filesystem::exists(cache_csv)) {
    sc.halfplane = read_halfplane_csv(cache_csv);
    sc.halfplane.lambda0 = sc.lambda0;
    sc.source = cache_csv;
    return sc;
  }
  sc.halfplane = build_halfplane_table(12.0, 10, sc.lambda0);
  sc.source = "computed";
  if (!cache_csv.empty()) write_halfplane_csv(sc.halfplane, cache_csv);
  return sc;
}

namespace {

const BoundaryNode* boundary_slot(const Grid2D& g, std::size_t k, const std::vector<int>& slot) {
  return slot[k] >= 0 ? &g.boundary()[slot[k]] : nullptr;
}

std::vector<int> boundary_slots(const Grid2D& g) {
  std::vector<int> slot(g.size(), -1);
  for (std::size_t s = 0; s < g.boundary().size(); ++s) slot[g.boundary()[s].index] = static_cast<int>(s);
  return slot;
}

void require_same_grid(const ScalarField2D& a, const ScalarField2D& b) {
  if (!a.grid().same_layout(b.grid())) throw InputError("fields live on different grids");
}

}  // namespace

double lambda1(const ScalarField2D& B0, const ScalarField2D& a, double sigma, double theta0) {
  require_same_grid(B0, a);
  if (!gamma_extract(B0).empty()) throw InputError("lambda1 needs a field without zeros");
  const Grid2D& g = B0.grid();
  const auto slot = boundary_slots(g);
  double inner = std::numeric_limits<double>::infinity(), outer = inner;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside(k)) continue;
    const double b = std::abs(B0[k]);
    inner = std::min(inner, sigma * b - a[k]);
    const BoundaryNode* bn = boundary_slot(g, k, slot);
    if (bn && !bn->corner) outer = std::min(outer, theta0 * sigma * b - a[k]);
  }
  return std::min(inner, outer);
}

double lambda1_hat(const GammaData& gamma, const ScalarField2D& a, double sigma_hat, const SpectralConstants& sc) {
  if (gamma.empty()) throw InputError("lambda1_hat needs a nonempty zero set");
  if (sigma_hat < 0.0) throw InputError("sigma_hat must be nonnegative");
  double best = std::numeric_limits<double>::infinity();
  for (const GammaPoint& p : gamma.points)
    best = std::min(best, sc.lambda0 * std::cbrt(std::pow(sigma_hat * p.grad_norm, 2)) - p.sample(a));
  for (const GammaCrossing& c : gamma.crossings)
    best = std::min(best, sc.halfplane.eval(c.theta) * std::cbrt(std::pow(sigma_hat * c.point.grad_norm, 2)) -
                              c.point.sample(a));
  return best;
}

double alpha1(const GammaData& gamma, const SpectralConstants& sc) {
  if (gamma.empty()) throw InputError("alpha1 needs a nonempty zero set");
  double inner = std::numeric_limits<double>::infinity(), outer = inner;
  for (const GammaPoint& p : gamma.points) inner = std::min(inner, p.grad_norm);
  for (const GammaCrossing& c : gamma.crossings)
    outer = std::min(outer, std::pow(sc.halfplane.eval(c.theta), 1.5) * c.point.grad_norm);
  return std::min(std::pow(sc.lambda0, 1.5) * inner, outer);
}

HC3Formula hc3_formula(const ScalarField2D& a, const ScalarField2D& B0, double kappa, const GammaData* gamma,
                       const SpectralConstants& sc) {
  require_same_grid(a, B0);
  const Grid2D& g = a.grid();
  HC3Formula out;
  bool any_pos = false;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k) && a[k] > 0.0) any_pos = true;
  if (!any_pos) {
    out.no_superconductivity = true;
    return out;
  }

  double inner = 0.0, outer = 0.0;
  Point at_inner, at_outer;
  if (gamma && !gamma->empty()) {
    out.field_case = FieldCase::Vanishing;
    out.error_scale = std::pow(kappa, 1.75);
    for (const GammaPoint& p : gamma->points) {
      const double ap = std::max(p.sample(a), 0.0);
      if (!(p.grad_norm > 0.0)) continue;
      const double v = std::pow(ap / sc.lambda0, 1.5) / p.grad_norm;
      if (v > inner) inner = v, at_inner = p.x;
    }
    for (const GammaCrossing& c : gamma->crossings) {
      const double ap = std::max(c.point.sample(a), 0.0);
      const double v = std::pow(ap / sc.halfplane.eval(c.theta), 1.5) / c.point.grad_norm;
      if (v > outer) outer = v, at_outer = c.point.x;
    }
    out.value = kappa * kappa * std::max(inner, outer);
  } else {
    out.field_case = FieldCase::NonVanishing;
    out.error_scale = std::sqrt(kappa);
    const auto slot = boundary_slots(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!g.inside(k) || !(a[k] > 0.0)) continue;
      const double b = std::abs(B0[k]);
      if (!(b > 0.0)) throw InputError("hc3_formula: B0 vanishes but no zero set was given");
      if (a[k] / b > inner) inner = a[k] / b, at_inner = g.node(k);
      const BoundaryNode* bn = boundary_slot(g, k, slot);
      if (bn && !bn->corner && a[k] / (sc.theta0 * b) > outer) outer = a[k] / (sc.theta0 * b), at_outer = g.node(k);
    }
    out.value = kappa * std::max(inner, outer);
  }
  out.boundary_attains = outer >= inner;
  out.argmax = out.boundary_attains ? at_outer : at_inner;
  return out;
}

HC3Bracket hc3_empirical_local(double kappa, const ScalarField2D& a, const LinkField2D& F, double H_lo, double H_hi,
                               double tol) {
  if (!(H_lo >= 0.0 && H_hi > H_lo)) throw InputError("hc3 bracket needs 0 <= H_lo < H_hi");
  if (!(tol > 0.0)) throw InputError("hc3 bracket tolerance must be positive");
  HC3Bracket b;
  auto mu = [&](double H) {
    SpectralResult r = mu1(kappa, H, a, F);
    ++b.eigensolves;
    if (r.flagged) throw NumericalError("mu1 did not converge at H = " + std::to_string(H));
    return r.value;
  };
  b.lo = H_lo;
  b.hi = H_hi;
  b.mu_lo = mu(b.lo);
  b.mu_hi = mu(b.hi);
  if (!(b.mu_lo < 0.0 && b.mu_hi > 0.0)) {
    b.expanded = true;
    if (b.mu_lo >= 0.0) {
      b.lo *= 0.5;
      b.mu_lo = mu(b.lo);
    }
    if (b.mu_hi <= 0.0) {
      b.hi *= 2.0;
      b.mu_hi = mu(b.hi);
    }
    if (!(b.mu_lo < 0.0 && b.mu_hi > 0.0))
      throw InputError("mu1 has the same sign at both ends of the expanded bracket");
  }
  while (b.hi - b.lo > tol * kappa) {
    const double m = b.mid();
    const double v = mu(m);
    if (v < 0.0) {
      b.lo = m;
      b.mu_lo = v;
    } else {
      b.hi = m;
      b.mu_hi = v;
    }
  }
  return b;
}

BreakdownScan breakdown_scan(const GLData& d, double kappa, const std::vector<double>& H_grid, double tol,
                             const SolverOptions& opt) {
  if (H_grid.empty()) throw InputError("breakdown scan needs a nonempty H grid");
  for (std::size_t k = 1; k < H_grid.size(); ++k)
    if (!(H_grid[k] > H_grid[k - 1])) throw InputError("breakdown H grid must increase");
  BreakdownScan out;
  for (double H : H_grid) {
    GLState s = minimize_frozen(d, kappa, H, nullptr, opt);
    BreakdownPoint p{H, l2_norm(s.psi), s.converged};
    out.points.push_back(p);
    if (p.psi_l2 <= tol) {
      out.H_break = H;
      out.found = true;
      return out;
    }
  }
  out.H_break = H_grid.back();
  return out;
}

}  // namespace pgl
