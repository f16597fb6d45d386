#include "pgl/glsolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

namespace pgl {

namespace {

// curl(A) - B_P on the dual grid.
ScalarField2D curl_excess(const LinkField2D& A, const GLData& d) {
  ScalarField2D r = curl(A);
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r.grid().inside(k)) r[k] -= d.B0_plaquette[k];
  return r;
}

void check_params(double kappa, double H) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InputError("kappa must be positive");
  if (!(H >= 0.0) || !std::isfinite(H)) throw InputError("H must be nonnegative");
}

DescentResult descend(const QuarticFunctional& f, std::vector<cplx>& u, double tol, int max_iter,
                      DescentMethod method) {
  DescentOptions o;
  o.tol = tol;
  o.grad_scale = 2.0 * f.grid().h() * f.grid().h();
  o.max_iter = max_iter;
  return method == DescentMethod::BB ? minimize_bb(f, u, o) : minimize_ncg(f, u, o);
}

}  // namespace

GLData make_gl_data(ScalarField2D a, ScalarField2D B0, double poisson_tol) {
  if (!a.grid().same_layout(B0.grid())) throw InputError("a and B0 live on different grids");
  a.check_finite();
  B0.check_finite();
  if (poisson_tol <= 0.0) {
    // Rounding in S S^T u grows like the plaquette count; stay clear of it.
    double bmax = 1.0;
    for (std::size_t k = 0; k < B0.size(); ++k) bmax = std::max(bmax, std::abs(B0[k]));
    const double n = static_cast<double>(B0.grid().nx()) * B0.grid().ny();
    poisson_tol = std::max(1e-11, 64.0 * 2.2e-16 * n) * bmax;
  }
  GLData d;
  d.potential = vector_potential_from_field(B0, B0.grid_ptr(), poisson_tol);
  d.B0_plaquette = plaquette_average(B0);
  d.a = std::move(a);
  d.B0 = std::move(B0);
  return d;
}

EnergyParts energy_parts(const ComplexField2D& psi, const LinkField2D& A, double kappa, double H, const GLData& d) {
  check_params(kappa, H);
  const Grid2D& g = psi.grid();
  if (!g.same_layout(d.a.grid()) || !g.same_layout(A.grid())) throw InputError("fields live on different grids");
  const double h2 = g.h() * g.h();
  EnergyParts e;
  e.kinetic = integrate(covariant_energy_density(psi, A, kappa * H));
  std::vector<double> pot;
  pot.reserve(g.inside_count());
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) {
      const double t = d.a[k] - std::norm(psi[k]);
      pot.push_back(t * t);
    }
  e.potential = 0.5 * kappa * kappa * h2 * pairwise_sum(pot);
  if (H > 0.0) {
    const ScalarField2D r = curl_excess(A, d);
    std::vector<double> m;
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r.grid().inside(k)) m.push_back(r[k] * r[k]);
    e.magnetic = kappa * kappa * H * H * h2 * pairwise_sum(m);
  }
  return e;
}

double full_energy(const ComplexField2D& psi, const LinkField2D& A, double kappa, double H, const GLData& d) {
  return energy_parts(psi, A, kappa, H, d).total();
}

double full_energy(const GLState& s, const GLData& d) { return full_energy(s.psi, s.A, s.kappa, s.H, d); }

QuarticFunctional frozen_functional(const GLData& d, double kappa, double H, const LinkField2D& A) {
  check_params(kappa, H);
  const double h2 = d.grid()->h() * d.grid()->h();
  return QuarticFunctional(d.grid(), 1.0, A, kappa * H, std::vector<double>(d.grid()->size(), 0.5 * h2 * kappa * kappa),
                           d.a.values());
}

LinkField2D supercurrent(const ComplexField2D& psi, const LinkField2D& A, double coupling) {
  const Grid2D& g = psi.grid();
  LinkField2D J(psi.grid_ptr());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (g.has_xlink(i, j))
        J.x(i, j) =
            2.0 * coupling * std::imag(std::conj(psi(i, j)) * psi(i + 1, j) * std::polar(1.0, -coupling * A.x(i, j)));
      if (g.has_ylink(i, j))
        J.y(i, j) =
            2.0 * coupling * std::imag(std::conj(psi(i, j)) * psi(i, j + 1) * std::polar(1.0, -coupling * A.y(i, j)));
    }
  return J;
}

GLResiduals residuals(const GLState& s, const GLData& d) {
  const Grid2D& g = s.psi.grid();
  const double h = g.h(), h2 = h * h;
  GLResiduals r;
  const QuarticFunctional f = frozen_functional(d, s.kappa, s.H, s.A);
  std::vector<cplx> grad;
  f.gradient(s.psi.values(), grad);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside(k)) continue;
    const double v = std::abs(grad[k]) / (2.0 * h2);
    r.psi_eq = std::max(r.psi_eq, v);
    if (g.is_boundary(k)) r.neumann = std::max(r.neumann, h * v);
  }
  const ScalarField2D exc = curl_excess(s.A, d);
  // Plaquettes with a corner on the boundary carry the discrete field condition.
  const Grid2D& dg = exc.grid();
  for (int j = 0; j < dg.ny(); ++j)
    for (int i = 0; i < dg.nx(); ++i) {
      if (!dg.inside(i, j)) continue;
      const bool edge = g.is_boundary(g.index(i, j)) || g.is_boundary(g.index(i + 1, j)) ||
                        g.is_boundary(g.index(i, j + 1)) || g.is_boundary(g.index(i + 1, j + 1));
      if (edge) r.field_bc = std::max(r.field_bc, std::abs(exc(i, j)));
    }
  const double c = s.kappa * s.H;
  if (c > 0.0) {
    const LinkField2D J = supercurrent(s.psi, s.A, c);
    const LinkField2D St = links_from_stream(s.psi.grid_ptr(), exc.values());
    const double scale = 1.0 / (2.0 * c * c);
    for (std::size_t k = 0; k < g.size(); ++k) {
      r.current_eq = std::max(r.current_eq, std::abs(St.xs()[k] - scale * J.xs()[k]) / h);
      r.current_eq = std::max(r.current_eq, std::abs(St.ys()[k] - scale * J.ys()[k]) / h);
    }
  }
  return r;
}

ComplexField2D default_initial_state(const GLData& d, std::uint64_t seed, double phase_noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  ComplexField2D psi(d.grid());
  for (std::size_t k = 0; k < psi.size(); ++k)
    if (d.grid()->inside(k)) psi[k] = std::polar(std::sqrt(std::max(d.a[k], 0.0)), phase_noise * N(rng));
  return psi;
}

GLState minimize_frozen(const GLData& d, double kappa, double H, const ComplexField2D* init, const SolverOptions& opt) {
  check_params(kappa, H);
  const double tol = opt.tol > 0.0 ? opt.tol : 1e-6 * kappa * kappa;
  GLState s;
  s.kappa = kappa;
  s.H = H;
  s.seed = opt.seed;
  s.A = d.F();
  if (init) {
    if (!init->grid().same_layout(*d.grid())) throw InputError("initial state lives on a different grid");
    s.psi = *init;
  } else {
    s.psi = default_initial_state(d, opt.seed);
  }
  const QuarticFunctional f = frozen_functional(d, kappa, H, s.A);
  DescentResult r = descend(f, s.psi.values(), tol, opt.max_iter, opt.method);
  s.iterations = r.iterations;
  s.converged = r.converged;
  s.flagged = !r.converged;
  s.trace = std::move(r.trace);
  s.energy = full_energy(s, d);
  s.residuals = residuals(s, d);
  return s;
}

GLState minimize_coupled(const GLData& d, double kappa, double H, const GLState* init, const SolverOptions& opt) {
  check_params(kappa, H);
  const double c = kappa * H;
  if (c == 0.0) return minimize_frozen(d, kappa, H, init ? &init->psi : nullptr, opt);
  const double tol = opt.tol > 0.0 ? opt.tol : 1e-6 * kappa * kappa;
  const GridPtr& grid = d.grid();
  const double h2 = grid->h() * grid->h();
  const Grid2D dual = grid->dual();

  GLState s;
  s.kappa = kappa;
  s.H = H;
  s.seed = opt.seed;
  s.psi = init ? init->psi : default_initial_state(d, opt.seed);
  // A = F + S^T u; u is recovered from the initial A by one Poisson solve.
  std::vector<double> u(dual.size(), 0.0), r(dual.size(), 0.0);
  const ScalarField2D r0 = curl_excess(d.F(), d);
  if (init) {
    const ScalarField2D e = curl_excess(init->A, d);
    std::vector<double> rhs(dual.size(), 0.0);
    for (std::size_t k = 0; k < rhs.size(); ++k)
      if (dual.inside(k)) rhs[k] = h2 * (e[k] - r0[k]);
    solve_plaquette_laplacian(*grid, rhs, u, 1e-12);
  }
  auto make_A = [&](const std::vector<double>& uu) { return d.F() + links_from_stream(grid, uu); };
  s.A = make_A(u);

  auto poisson = [&](const std::vector<double>& rhs, std::vector<double>& x) {
    double scale = 0.0;
    for (double v : rhs) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) {
      std::fill(x.begin(), x.end(), 0.0);
      return;
    }
    const PoissonReport rep = solve_plaquette_laplacian(*grid, rhs, x, 1e-10 * scale / h2);
    if (!rep.converged) throw NumericalError("stream-function update did not converge");
  };

  bool psi_converged = false;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    const QuarticFunctional f = frozen_functional(d, kappa, H, s.A);
    DescentResult dr = descend(f, s.psi.values(), tol, opt.max_iter, opt.method);
    s.iterations += dr.iterations;
    // the frozen functional omits the magnetic term, constant while A is fixed
    const double magnetic = full_energy(s.psi, s.A, kappa, H, d) - f.energy(s.psi.values());
    for (double e : dr.trace) s.trace.push_back(e + magnetic);
    psi_converged = dr.converged;

    // Least-squares solve of S^T r = J / (2 c^2) for the curl excess, then S S^T u = h^2 (r - r0).
    const LinkField2D J = supercurrent(s.psi, s.A, c);
    std::vector<double> rhs = plaquette_sums(J);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = dual.inside(k) ? rhs[k] / (2.0 * c * c) : 0.0;
    poisson(rhs, r);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = dual.inside(k) ? h2 * (r[k] - r0[k]) : 0.0;
    std::vector<double> u_new = u;
    poisson(rhs, u_new);

    const double e_old = full_energy(s.psi, s.A, kappa, H, d);
    double omega = 1.0;
    std::vector<double> u_try(u.size());
    LinkField2D A_try;
    for (int damp = 0; damp < 6; ++damp, omega *= 0.5) {
      for (std::size_t k = 0; k < u.size(); ++k) u_try[k] = u[k] + omega * (u_new[k] - u[k]);
      A_try = make_A(u_try);
      if (full_energy(s.psi, A_try, kappa, H, d) <= e_old + 1e-13 * std::abs(e_old)) break;
    }
    double change = 0.0;
    for (std::size_t k = 0; k < grid->size(); ++k) {
      change = std::max(change, std::abs(A_try.xs()[k] - s.A.xs()[k]));
      change = std::max(change, std::abs(A_try.ys()[k] - s.A.ys()[k]));
    }
    change *= c;
    if (full_energy(s.psi, A_try, kappa, H, d) <= e_old) {
      u = u_try;
      s.A = std::move(A_try);
    }
    s.trace.push_back(full_energy(s.psi, s.A, kappa, H, d));
    if (psi_converged && change <= opt.field_tol) {
      s.converged = true;
      break;
    }
  }
  s.flagged = !s.converged;
  s.energy = full_energy(s, d);
  s.residuals = residuals(s, d);
  return s;
}

Diagnostics diagnostics(const GLState& s, const GLData& d) {
  Diagnostics out;
  const Grid2D& g = s.psi.grid();
  out.sup_a = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) {
      out.sup_psi2 = std::max(out.sup_psi2, std::norm(s.psi[k]));
      out.sup_a = std::max(out.sup_a, d.a[k]);
    }
  out.sup_bound_ok = out.sup_psi2 <= std::max(out.sup_a, 0.0) + 1e-6;
  const double n2 = l2_norm(s.psi);
  const ScalarField2D dc = curl(s.A - d.F());
  double acc = 0.0;
  for (std::size_t k = 0; k < dc.size(); ++k)
    if (dc.grid().inside(k)) acc += dc[k] * dc[k];
  out.curl_norm = std::sqrt(acc * g.h() * g.h());
  if (n2 <= 1e-10) {
    out.normal = true;
    return out;
  }
  const double c = s.kappa * s.H;
  out.kinetic_ratio = std::sqrt(integrate(covariant_energy_density(s.psi, s.A, c))) / (s.kappa * n2);
  out.kinetic_F_ratio = std::sqrt(integrate(covariant_energy_density(s.psi, d.F(), c))) / (s.kappa * n2);
  const double n4 = std::pow(lp_norm_pow(s.psi, 4.0), 0.25);
  out.curl_ratio = s.H * out.curl_norm / (n2 * n4);
  return out;
}

bool diagnostics_growth(const std::vector<Diagnostics>& sweep, double slack) {
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    const Diagnostics &p = sweep[i - 1], &q = sweep[i];
    if (p.normal || q.normal) continue;
    if (q.kinetic_ratio > (1 + slack) * p.kinetic_ratio) return true;
    if (q.kinetic_F_ratio > (1 + slack) * p.kinetic_F_ratio) return true;
    if (q.curl_ratio > (1 + slack) * p.curl_ratio + 1e-12) return true;
  }
  return false;
}

void TestConfigParams::resolve(double kappa) {
  if (ell <= 0.0) ell = std::pow(kappa, -7.0 / 12.0);
  if (rho <= 0.0) rho = std::pow(kappa, -17.0 / 24.0);
  if (delta <= 0.0) delta = std::pow(kappa, -1.0 / 12.0);
}

namespace {

double round_sig(double v, int digits) {
  if (v == 0.0) return 0.0;
  const double e = std::floor(std::log10(std::abs(v))) - (digits - 1);
  const double s = std::pow(10.0, e);
  return std::round(v / s) * s;
}

}  // namespace

const CellMinimum& CellCache::get(double b, double R) {
  const std::pair<double, double> key{round_sig(b, 4), round_sig(R, 4)};
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  CellProblem p;
  p.b = key.first;
  p.R = key.second;
  p.alpha = 1.0;
  p.zeta = 1;
  p.bc = BoundaryCondition::Dirichlet;
  p.resolution = default_resolution(p.b, p.R);
  return cache_.emplace(key, minimize_cell(p, opt_)).first->second;
}

TestConfiguration build_test_configuration(const GLData& d, double kappa, double H, TestConfigParams params,
                                           CellCache& cells, const FhatTable& fhat) {
  check_params(kappa, H);
  params.resolve(kappa);
  TestConfiguration out;
  out.params = params;
  GLState& s = out.state;
  s.kappa = kappa;
  s.H = H;
  s.A = d.F();
  s.psi = ComplexField2D(d.grid());
  s.converged = true;
  if (!params.admissible(kappa, H)) throw InputError("test configuration needs ell^2 kappa H rho > 1");

  const Grid2D& g = *d.grid();
  const double h = g.h(), ell = params.ell, sigma = H / kappa;
  const double X0 = g.origin().x, Y0 = g.origin().y, X1 = X0 + g.nx() * h, Y1 = Y0 + g.ny() * h;
  auto node_range = [&](double lo, double origin, int n, int& a, int& b) {
    a = static_cast<int>(std::ceil((lo - origin) / h - 0.5 - 1e-9));
    b = static_cast<int>(std::floor((lo + ell - origin) / h - 0.5 + 1e-9));
    a = std::max(a, 0);
    b = std::min(b, n - 1);
  };
  auto cost = [&](Point p) {
    const double av = interpolate(d.a, p), bv = std::abs(interpolate(d.B0, p));
    if (av <= 0.0) return av * av;
    return av * av * fhat_eval(fhat, sigma * bv / av);
  };

  const long k0 = static_cast<long>(std::ceil(X0 / ell)), k1 = static_cast<long>(std::floor(X1 / ell));
  const long m0 = static_cast<long>(std::ceil(Y0 / ell)), m1 = static_cast<long>(std::floor(Y1 / ell));
  for (long m = m0; m <= m1; ++m)
    for (long k = k0; k <= k1; ++k) {
      const Point c{k * ell, m * ell};
      if (c.x - 0.5 * ell <= X0 || c.y - 0.5 * ell <= Y0 || c.x + 0.5 * ell >= X1 || c.y + 0.5 * ell >= Y1) continue;
      int i0, i1, j0, j1;
      node_range(c.x - 0.5 * ell, X0, g.nx(), i0, i1);
      node_range(c.y - 0.5 * ell, Y0, g.ny(), j0, j1);
      if (i1 - i0 < 1 || j1 - j0 < 1) continue;
      // The closed square must lie inside: test the node ring just outside it too.
      bool inside = true, pos = true, nonpos = true, strong = true;
      for (int j = j0 - 1; j <= j1 + 1 && inside; ++j)
        for (int i = i0 - 1; i <= i1 + 1; ++i)
          if (!g.inside(i, j)) {
            inside = false;
            break;
          }
      if (!inside) continue;
      const Point corners[4] = {{c.x - 0.5 * ell, c.y - 0.5 * ell},
                                {c.x + 0.5 * ell, c.y - 0.5 * ell},
                                {c.x - 0.5 * ell, c.y + 0.5 * ell},
                                {c.x + 0.5 * ell, c.y + 0.5 * ell}};
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
          const std::size_t q = g.index(i, j);
          if (d.a[q] > 0.0)
            nonpos = false;
          else
            pos = false;
          if (std::abs(d.B0[q]) <= params.rho) strong = false;
        }
      for (const Point& p : corners) {
        if (interpolate(d.a, p) > 0.0)
          nonpos = false;
        else
          pos = false;
        if (std::abs(interpolate(d.B0, p)) <= params.rho) strong = false;
      }
      if (!strong || (!pos && !nonpos)) continue;
      if (nonpos) {
        ++out.squares_nonpos;
        continue;
      }
      ++out.squares_pos;
      Point xt = c;
      double best = cost(c);
      for (const Point& p : corners)
        if (const double v = cost(p); v < best) {
          best = v;
          xt = p;
        }
      const double at = interpolate(d.a, xt), Bt = interpolate(d.B0, xt);
      const double R = ell * std::sqrt(kappa * H * std::abs(Bt));
      const double b = H * std::abs(Bt) / kappa;
      const CellMinimum& cell = cells.get(b / at, R);
      const GaugePhase gp = local_gauge_phase(d.F(), c, Bt, ell);
      const double amp = std::sqrt(at), scale = R / ell;
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
          const Point p = g.node(i, j);
          cplx v = sample_cell_state(cell.u, Point{scale * (p.x - c.x), scale * (p.y - c.y)}, 1);
          if (Bt < 0.0) v = std::conj(v);
          s.psi(i, j) = amp * std::polar(1.0, kappa * H * gp.phi(i, j)) * v;
        }
    }
  if (out.squares_pos + out.squares_nonpos == 0) out.warning = "no admissible squares; normal state returned";
  s.energy = full_energy(s, d);
  s.residuals = residuals(s, d);
  return out;
}

void write_checkpoint(const GLState& s, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open " + path);
  nlohmann::json meta = {{"kappa", s.kappa},
                         {"H", s.H},
                         {"seed", s.seed},
                         {"energy", s.energy},
                         {"converged", s.converged},
                         {"iterations", s.iterations},
                         {"residuals",
                          {{"psi_eq", s.residuals.psi_eq},
                           {"current_eq", s.residuals.current_eq},
                           {"neumann", s.residuals.neumann},
                           {"field_bc", s.residuals.field_bc}}}};
  os << "PGLCHK " << meta.dump() << '\n';
  write_binary(s.psi, os);
  write_binary(s.A, os);
  if (!os) throw NumericalError("failed writing " + path);
}

GLState read_checkpoint(GridPtr grid, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path);
  std::string tag;
  is >> tag;
  if (tag != "PGLCHK") throw InputError(path + " is not a checkpoint");
  std::string line;
  std::getline(is, line);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad checkpoint header: ") + e.what());
  }
  GLState s;
  s.kappa = meta.at("kappa").get<double>();
  s.H = meta.at("H").get<double>();
  s.seed = meta.at("seed").get<std::uint64_t>();
  s.energy = meta.at("energy").get<double>();
  s.converged = meta.at("converged").get<bool>();
  s.iterations = meta.at("iterations").get<int>();
  const auto& r = meta.at("residuals");
  s.residuals = {r.at("psi_eq").get<double>(), r.at("current_eq").get<double>(), r.at("neumann").get<double>(),
                 r.at("field_bc").get<double>()};
  s.psi = read_complex_binary(grid, is);
  s.A = read_link_binary(grid, is);
  return s;
}

}  // namespace pgl
