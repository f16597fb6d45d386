#include "pgl/gauge.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pgl {

namespace {

// Apply S S^T on the dual grid.
void apply_dual_laplacian(const Grid2D& d, const std::vector<double>& u, std::vector<double>& out) {
  const int nx = d.nx(), ny = d.ny();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = d.index(i, j);
      if (!d.inside(k)) {
        out[k] = 0.0;
        continue;
      }
      double s = 4.0 * u[k];
      if (d.inside(i + 1, j)) s -= u[k + 1];
      if (d.inside(i - 1, j)) s -= u[k - 1];
      if (d.inside(i, j + 1)) s -= u[k + nx];
      if (d.inside(i, j - 1)) s -= u[k - nx];
      out[k] = s;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> t(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) t[k] = a[k] * b[k];
  return pairwise_sum(t);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

PoissonReport solve_plaquette_laplacian(const Grid2D& grid, const std::vector<double>& rhs, std::vector<double>& u,
                                        double tol, int max_iter) {
  if (!(tol > 0.0)) throw InputError("Poisson tolerance must be positive");
  const Grid2D d = grid.dual();
  const std::size_t n = d.size();
  if (rhs.size() != n) throw InputError("Poisson right-hand side has wrong size");
  if (u.size() != n) u.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    if (!d.inside(k)) u[k] = 0.0;
  if (max_iter <= 0) max_iter = static_cast<int>(10 * d.inside_count() + 100);
  const double h2 = grid.h() * grid.h();

  std::vector<double> r(n), z(n), p(n), q(n);
  apply_dual_laplacian(d, u, q);
  for (std::size_t k = 0; k < n; ++k) r[k] = d.inside(k) ? rhs[k] - q[k] : 0.0;
  PoissonReport rep;
  rep.residual = max_abs(r) / h2;
  if (rep.residual <= tol) {
    rep.converged = true;
    return rep;
  }
  // Jacobi preconditioner: the diagonal of S S^T is 4 at every plaquette.
  for (std::size_t k = 0; k < n; ++k) z[k] = 0.25 * r[k];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply_dual_laplacian(d, p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    for (std::size_t k = 0; k < n; ++k) {
      u[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    rep.iterations = it;
    rep.residual = max_abs(r) / h2;
    if (rep.residual <= tol) {
      rep.converged = true;
      break;
    }
    for (std::size_t k = 0; k < n; ++k) z[k] = 0.25 * r[k];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  if (!rep.converged) {
    // Recompute the true residual so the report is not a recurrence artefact.
    apply_dual_laplacian(d, u, q);
    for (std::size_t k = 0; k < n; ++k) r[k] = d.inside(k) ? rhs[k] - q[k] : 0.0;
    rep.residual = max_abs(r) / h2;
    rep.converged = rep.residual <= tol;
  }
  return rep;
}

LinkField2D links_from_stream(GridPtr grid, const std::vector<double>& u) {
  const Grid2D& g = *grid;
  const int dx = g.nx() - 1;
  if (u.size() != static_cast<std::size_t>(dx) * (g.ny() - 1)) throw InputError("stream has wrong size");
  auto U = [&](int i, int j) -> double {
    if (i < 0 || j < 0 || i >= dx || j >= g.ny() - 1) return 0.0;
    return g.has_plaquette(i, j) ? u[static_cast<std::size_t>(j) * dx + i] : 0.0;
  };
  LinkField2D out(grid);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (g.has_xlink(i, j)) out.x(i, j) = U(i, j) - U(i, j - 1);
      if (g.has_ylink(i, j)) out.y(i, j) = U(i - 1, j) - U(i, j);
    }
  return out;
}

std::vector<double> plaquette_sums(const LinkField2D& A) {
  const Grid2D& g = A.grid();
  const int dx = g.nx() - 1, dy = g.ny() - 1;
  std::vector<double> s(static_cast<std::size_t>(dx) * dy, 0.0);
  for (int j = 0; j < dy; ++j)
    for (int i = 0; i < dx; ++i)
      if (g.has_plaquette(i, j))
        s[static_cast<std::size_t>(j) * dx + i] = A.x(i, j) + A.y(i + 1, j) - A.x(i, j + 1) - A.y(i, j);
  return s;
}

ScalarField2D curl(const LinkField2D& A) {
  auto dual = share(A.grid().dual());
  auto s = plaquette_sums(A);
  const double ih2 = 1.0 / (A.grid().h() * A.grid().h());
  for (auto& v : s) v *= ih2;
  return ScalarField2D(dual, std::move(s));
}

ScalarField2D divergence(const LinkField2D& A) {
  const Grid2D& g = A.grid();
  ScalarField2D out(A.grid_ptr());
  const double ih2 = 1.0 / (g.h() * g.h());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.inside(i, j)) continue;
      double s = 0.0;
      if (g.has_xlink(i, j)) s += A.x(i, j);
      if (g.has_xlink(i - 1, j)) s -= A.x(i - 1, j);
      if (g.has_ylink(i, j)) s += A.y(i, j);
      if (g.has_ylink(i, j - 1)) s -= A.y(i, j - 1);
      out(i, j) = s * ih2;
    }
  return out;
}

ScalarField2D plaquette_average(const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  auto dual = share(g.dual());
  ScalarField2D out(dual);
  for (int j = 0; j < dual->ny(); ++j)
    for (int i = 0; i < dual->nx(); ++i)
      if (dual->inside(i, j)) out(i, j) = 0.25 * (f(i, j) + f(i + 1, j) + f(i, j + 1) + f(i + 1, j + 1));
  return out;
}

PotentialBundle vector_potential_from_field(const ScalarField2D& B0, GridPtr grid, double tol) {
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  if (!B0.grid().same_layout(*grid)) throw InputError("B0 lives on a different grid");
  B0.check_finite();
  const double h2 = grid->h() * grid->h();
  ScalarField2D Bp = plaquette_average(B0);
  std::vector<double> rhs = Bp.values();
  for (auto& v : rhs) v *= h2;
  std::vector<double> u(rhs.size(), 0.0);
  const PoissonReport rep = solve_plaquette_laplacian(*grid, rhs, u, tol);
  PotentialBundle out;
  out.F = links_from_stream(grid, u);
  out.iterations = rep.iterations;
  const ScalarField2D c = curl(out.F);
  double res = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c.grid().inside(k)) res = std::max(res, std::abs(c[k] - Bp[k]));
  out.residual_curl = res;
  out.converged = res <= tol * (1.0 + 1e-6) + 1e-14;
  for (auto& v : u) v = -v;
  out.stream = ScalarField2D(Bp.grid_ptr(), std::move(u));
  if (!out.converged)
  {
    std::ostringstream msg;
    msg << "vector potential solve did not converge: residual " << res << " above " << tol;
    throw NumericalError(msg.str());
  }
  return out;
}

LinkField2D potential_A0(GridPtr grid, Point c) {
  // A0 is linear, so the Gauss rule integrates it exactly.
  return LinkField2D::from_potential(grid, [c](Point p) { return Point{-0.5 * (p.y - c.y), 0.5 * (p.x - c.x)}; });
}

double interpolate(const ScalarField2D& f, Point p) {
  const Grid2D& g = f.grid();
  const double h = g.h();
  const double s = (p.x - g.origin().x) / h - 0.5, t = (p.y - g.origin().y) / h - 0.5;
  const int i = static_cast<int>(std::floor(s)), j = static_cast<int>(std::floor(t));
  if (g.has_plaquette(i, j)) {
    const double fx = s - i, fy = t - j;
    return (1 - fx) * (1 - fy) * f(i, j) + fx * (1 - fy) * f(i + 1, j) + (1 - fx) * fy * f(i, j + 1) +
           fx * fy * f(i + 1, j + 1);
  }
  return f[g.nearest(p)];
}

GaugePhase local_gauge_phase(const LinkField2D& F, Point x0, double b, double ell) {
  const Grid2D& g = F.grid();
  const double h = g.h();
  if (!(ell > 0.0)) throw InputError("square side must be positive");
  const double x_lo = g.origin().x, y_lo = g.origin().y;
  if (x0.x - 0.5 * ell < x_lo || x0.y - 0.5 * ell < y_lo || x0.x + 0.5 * ell > x_lo + g.nx() * h ||
      x0.y + 0.5 * ell > y_lo + g.ny() * h)
    throw InputError("square is not contained in the domain");
  const int i0 = std::max(0, static_cast<int>(std::ceil((x0.x - 0.5 * ell - x_lo) / h - 0.5 - 1e-9)));
  const int i1 = std::min(g.nx() - 1, static_cast<int>(std::floor((x0.x + 0.5 * ell - x_lo) / h - 0.5 + 1e-9)));
  const int j0 = std::max(0, static_cast<int>(std::ceil((x0.y - 0.5 * ell - y_lo) / h - 0.5 - 1e-9)));
  const int j1 = std::min(g.ny() - 1, static_cast<int>(std::floor((x0.y + 0.5 * ell - y_lo) / h - 0.5 + 1e-9)));
  if (i1 - i0 < 1 || j1 - j0 < 1) throw InputError("square holds fewer than two nodes per side");
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i)
      if (!g.inside(i, j)) throw InputError("square is not contained in the domain");

  // Residual links rho = F - b A0(. - x0).
  auto a0x = [&](int i, int j) {
    const Point p = g.node(i, j);
    return -0.5 * b * (p.y - x0.y) * h;
  };
  auto a0y = [&](int i, int j) {
    const Point p = g.node(i, j);
    return 0.5 * b * (p.x - x0.x) * h;
  };
  auto rx = [&](int i, int j) { return F.x(i, j) - a0x(i, j); };
  auto ry = [&](int i, int j) { return F.y(i, j) - a0y(i, j); };

  const std::size_t kc = g.nearest(x0);
  const int ic = std::clamp(g.col(kc), i0, i1), jc = std::clamp(g.row(kc), j0, j1);
  GaugePhase out{ScalarField2D(F.grid_ptr()), 0.0};
  ScalarField2D& phi = out.phi;
  phi(ic, jc) = 0.0;
  for (int i = ic + 1; i <= i1; ++i) phi(i, jc) = phi(i - 1, jc) + rx(i - 1, jc);
  for (int i = ic - 1; i >= i0; --i) phi(i, jc) = phi(i + 1, jc) - rx(i, jc);
  for (int i = i0; i <= i1; ++i) {
    for (int j = jc + 1; j <= j1; ++j) phi(i, j) = phi(i, j - 1) + ry(i, j - 1);
    for (int j = jc - 1; j >= j0; --j) phi(i, j) = phi(i, j + 1) - ry(i, j);
  }
  double defect = 0.0;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      if (i < i1) defect = std::max(defect, std::abs(rx(i, j) - (phi(i + 1, j) - phi(i, j))));
      if (j < j1) defect = std::max(defect, std::abs(ry(i, j) - (phi(i, j + 1) - phi(i, j))));
    }
  out.defect = defect / h;
  return out;
}

GaugePhase local_gauge_phase(const LinkField2D& F, const ScalarField2D& B0, Point x0, Point xt0, double ell) {
  if (std::abs(xt0.x - x0.x) > 0.5 * ell * (1 + 1e-12) || std::abs(xt0.y - x0.y) > 0.5 * ell * (1 + 1e-12))
    throw InputError("reference point must lie in the closed square");
  return local_gauge_phase(F, x0, interpolate(B0, xt0), ell);
}

void write_binary(const PotentialBundle& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path);
  write_binary(p.F, os);
  write_binary(p.stream, os);
}

}  // namespace pgl
