#include "pgl/cellproblem.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "pgl/gauge.hpp"

namespace pgl {

void CellProblem::validate() const {
  if (!(R > 0.0) || !std::isfinite(R)) throw InputError("cell side R must be positive");
  if (resolution < 32) throw InputError("cell resolution must be at least 32 nodes per side");
  if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("reduced field b must be nonnegative");
  if (zeta != 1 && zeta != -1) throw InputError("zeta must be +1 or -1");
  if (!std::isfinite(alpha)) throw InputError("alpha must be finite");
}

GridPtr CellProblem::grid() const {
  validate();
  return share(Grid2D::square(resolution, R, {-0.5 * R, -0.5 * R}));
}

int default_resolution(double b, double R) {
  const double h = 0.35 * std::sqrt(std::min(std::max(b, 1e-4), 1.0));
  return std::max(32, static_cast<int>(std::ceil(R / h)));
}

Mask dirichlet_ring(const Grid2D& g) {
  Mask m(g.size(), 0);
  for (const auto& bn : g.boundary()) m[bn.index] = 1;
  return m;
}

QuarticFunctional cell_functional(const CellProblem& p, const GridPtr& grid) {
  const double h2 = grid->h() * grid->h();
  Mask clamp = p.bc == BoundaryCondition::Dirichlet ? dirichlet_ring(*grid) : Mask(grid->size(), 0);
  return QuarticFunctional(grid, p.b, potential_A0(grid), static_cast<double>(p.zeta),
                           std::vector<double>(grid->size(), 0.5 * h2), std::vector<double>(grid->size(), p.alpha),
                           std::move(clamp));
}

double cell_energy(const ComplexField2D& u, const CellProblem& p) {
  p.validate();
  const Grid2D& g = u.grid();
  if (g.nx() != p.resolution || g.ny() != p.resolution || std::abs(g.h() * p.resolution - p.R) > 1e-12 * p.R)
    throw InputError("field does not live on the cell grid");
  u.check_finite();
  if (p.bc == BoundaryCondition::Dirichlet)
    for (const auto& bn : g.boundary())
      if (std::abs(u[bn.index]) > 1e-12) throw InputError("Dirichlet cell state must vanish on the boundary");
  return cell_functional(p, u.grid_ptr()).energy(u.values());
}

namespace {

std::vector<cplx> random_start(const Grid2D& g, double amp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<cplx> u(g.size());
  for (auto& v : u) {
    const double r = amp * (0.5 + 0.5 * U(rng));
    v = std::polar(r, 2.0 * M_PI * U(rng));
  }
  return u;
}

}  // namespace

cplx sample_cell_state(const ComplexField2D& u, Point p, int zeta) {
  const Grid2D& cg = u.grid();
  const double h = cg.h();
  const double s = (p.x - cg.origin().x) / h - 0.5, t = (p.y - cg.origin().y) / h - 0.5;
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, cg.nx() - 2);
  const int j = std::clamp(static_cast<int>(std::floor(t)), 0, cg.ny() - 2);
  const double fx = std::clamp(s - i, 0.0, 1.0), fy = std::clamp(t - j, 0.0, 1.0);
  cplx v = 0.0;
  const int di[4] = {0, 1, 0, 1}, dj[4] = {0, 0, 1, 1};
  for (int c = 0; c < 4; ++c) {
    const Point q = cg.node(i + di[c], j + dj[c]);
    const double w = (di[c] ? fx : 1 - fx) * (dj[c] ? fy : 1 - fy);
    // Parallel transport along the straight segment q -> p in the symmetric gauge.
    const double line = 0.5 * (q.x * p.y - q.y * p.x);
    v += w * u(i + di[c], j + dj[c]) * std::polar(1.0, zeta * line);
  }
  return v;
}

ComplexField2D prolong_cell_state(const ComplexField2D& coarse, const GridPtr& fine, int zeta) {
  ComplexField2D out(fine);
  for (std::size_t k = 0; k < fine->size(); ++k)
    if (fine->inside(k)) out[k] = sample_cell_state(coarse, fine->node(k), zeta);
  return out;
}

CellMinimum minimize_cell(const CellProblem& p, const CellOptions& opt) {
  p.validate();
  if (opt.seeds < 1) throw InputError("minimize_cell needs at least one seed");
  auto grid = p.grid();
  const double h2 = grid->h() * grid->h();
  DescentOptions dopt;
  dopt.tol = opt.tol;
  dopt.grad_scale = 2.0 * h2;
  dopt.max_iter = opt.max_iter;
  dopt.stall_window = opt.stall_window;
  dopt.stall_rtol = opt.stall_rtol;
  std::mt19937_64 rng(opt.rng_seed);

  // Coarse levels relax the vortex arrangement cheaply before the fine solve.
  std::vector<CellProblem> levels{p};
  while (opt.multilevel && levels.back().resolution / 2 >= 32 && levels.size() < 4) {
    CellProblem c = levels.back();
    c.resolution /= 2;
    levels.push_back(c);
  }
  const CellProblem& coarsest = levels.back();
  auto cgrid = coarsest.grid();

  const double amp = std::sqrt(std::max(p.alpha, 0.0));
  std::vector<std::vector<cplx>> starts;  // on the coarsest grid
  starts.emplace_back(cgrid->size(), cplx(amp));
  for (int s = 0; s < opt.seeds; ++s) starts.push_back(random_start(*cgrid, amp > 0 ? amp : 0.5, rng));

  auto descend = [&](std::vector<cplx> u, std::size_t from_level) {
    ComplexField2D cur(levels[from_level].grid(), std::move(u));
    for (std::size_t l = from_level + 1; l-- > 0;) {
      const CellProblem& lp = levels[l];
      auto lg = lp.grid();
      if (!cur.grid().same_layout(*lg)) cur = prolong_cell_state(cur, lg, p.zeta);
      const QuarticFunctional lf = cell_functional(lp, lg);
      DescentOptions lo = dopt;
      lo.grad_scale = 2.0 * lg->h() * lg->h();
      auto vals = cur.values();
      DescentResult r = minimize_ncg(lf, vals, lo);
      cur = ComplexField2D(lg, std::move(vals));
      if (l == 0) return std::make_pair(r, cur);
    }
    throw NumericalError("unreachable");
  };

  CellMinimum best;
  best.energy = std::numeric_limits<double>::infinity();
  auto consider = [&](const DescentResult& r, ComplexField2D u) {
    if (!std::isfinite(r.energy)) throw NumericalError("cell descent diverged");
    if (r.energy < best.energy) {
      best.energy = r.energy;
      best.residual = r.residual;
      best.converged = r.converged;
      best.stalled = r.stalled;
      best.iterations = r.iterations;
      best.u = std::move(u);
    }
  };
  for (auto& u : starts) {
    auto [r, field] = descend(std::move(u), levels.size() - 1);
    consider(r, std::move(field));
  }
  if (opt.extra_start) {
    if (!opt.extra_start->grid().same_layout(*grid)) throw InputError("extra start lives on a different grid");
    auto [r, field] = descend(opt.extra_start->values(), 0);
    consider(r, std::move(field));
  }
  return best;
}

FhatEstimate fhat_from_radii(double b, const std::vector<double>& radii, const FhatOptions& opt) {
  if (!(b > 0.0)) throw InputError("fhat needs b > 0");
  if (radii.empty()) throw InputError("no radii given");
  FhatEstimate est;
  for (double R : radii) {
    CellProblem p;
    p.b = b;
    p.R = R;
    p.resolution = default_resolution(b, R);
    CellOptions co;
    co.seeds = opt.seeds;
    co.tol = opt.descent_tol;
    co.rng_seed = opt.rng_seed;
    const CellMinimum m = minimize_cell(p, co);
    est.history.emplace_back(R, m.energy / (R * R));
  }
  const auto [R2, e2] = est.history.back();
  est.R_used = R2;
  if (est.history.size() >= 2) {
    const auto [R1, e1] = est.history[est.history.size() - 2];
    const double ex = (R2 * e2 - R1 * e1) / (R2 - R1);
    est.value = std::clamp(ex, 0.0, 0.5);
    est.bound = std::abs(e2 - est.value);
  } else {
    est.value = e2;
    est.bound = std::sqrt(b) / R2;
  }
  return est;
}

FhatEstimate fhat_estimate(double b, double tol, const FhatOptions& opt) {
  if (!(b > 0.0)) throw InputError("fhat needs b > 0");
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  if (b >= 1.0) {
    FhatEstimate e;
    e.value = 0.5;
    return e;
  }
  std::vector<double> radii;
  double R = opt.R_min;
  while (true) {
    radii.push_back(R);
    if (std::sqrt(b) / R <= tol && radii.size() >= 2) break;
    if (R * opt.growth > opt.R_max * (1 + 1e-12)) break;
    R *= opt.growth;
  }
  if (radii.size() < 2) radii.insert(radii.begin(), radii.front() / opt.growth);
  FhatEstimate est = fhat_from_radii(b, radii, opt);
  est.capped = std::sqrt(b) / radii.back() > tol;
  return est;
}

std::pair<double, double> scaling_check(double b, double R, double alpha, const CellOptions& opt) {
  if (!(alpha > 0.0)) throw InputError("scaling check needs alpha > 0");
  CellProblem p;
  p.b = b;
  p.alpha = alpha;
  p.R = R;
  p.resolution = default_resolution(std::min(b, b / alpha), R);
  CellProblem q = p;
  q.b = b / alpha;
  q.alpha = 1.0;
  const double lhs = minimize_cell(p, opt).energy;
  const double rhs = alpha * alpha * minimize_cell(q, opt).energy;
  return {lhs, rhs};
}

std::vector<double> default_b_grid(int n, double lo, double hi) {
  if (n < 2 || !(lo > 0) || !(hi > lo)) throw InputError("bad b grid");
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  g.back() = hi;
  return g;
}

double fhat_small_b(double b) { return b <= 0.0 ? 0.0 : 0.5 * b * std::log(1.0 / b); }

double fhat_eval(const FhatTable& t, double b) {
  if (!(b >= 0.0)) throw InputError("fhat argument must be nonnegative");
  if (b == 0.0) return 0.0;
  if (b >= 1.0) return 0.5;
  if (t.b.empty() || b < t.b.front()) return std::min(0.5, fhat_small_b(b));
  if (b >= t.b.back()) {
    // Linear bridge from the last node to the saturation point b = 1.
    const double b0 = t.b.back(), v0 = t.value.back();
    if (b0 >= 1.0) return 0.5;
    return v0 + (0.5 - v0) * (b - b0) / (1.0 - b0);
  }
  const auto it = std::upper_bound(t.b.begin(), t.b.end(), b);
  const std::size_t k = static_cast<std::size_t>(it - t.b.begin());
  const double w = (b - t.b[k - 1]) / (t.b[k] - t.b[k - 1]);
  return (1 - w) * t.value[k - 1] + w * t.value[k];
}

namespace {

CellMinimum table_point(double b, double R, const TableOptions& opt, const ComplexField2D* prev, int resolution) {
  CellProblem p;
  p.b = b;
  p.R = R;
  p.resolution = resolution;
  CellOptions co;
  co.seeds = opt.seeds;
  co.tol = opt.descent_tol;
  co.rng_seed = opt.rng_seed;
  if (prev && prev->grid().nx() == resolution) co.extra_start = prev;
  return minimize_cell(p, co);
}

// Resolutions are drawn from a coarse ladder so neighbouring b values share a grid.
int ladder_resolution(double b, double R) {
  const int need = default_resolution(b, R);
  int n = 32;
  while (n < need) n = static_cast<int>(std::ceil(n * 1.25));
  return n;
}

}  // namespace

FhatTable build_fhat_table(const std::vector<double>& b_grid, const TableOptions& opt) {
  for (std::size_t k = 1; k < b_grid.size(); ++k)
    if (!(b_grid[k] > b_grid[k - 1])) throw InputError("b grid must be increasing");
  if (b_grid.empty() || !(b_grid.front() > 0.0) || b_grid.back() > 1.0) throw InputError("b grid must lie in (0,1]");
  const std::size_t n = b_grid.size();
  FhatTable t;
  t.b = b_grid;
  t.value.assign(n, 0.5);
  t.R_used.assign(n, 0.0);
  t.bound.assign(n, 0.0);
  const std::vector<double> radii = opt.extrapolate ? std::vector<double>{opt.R, 1.5 * opt.R} : std::vector<double>{opt.R};
  std::vector<std::vector<double>> dens(radii.size(), std::vector<double>(n, 0.5));
  for (std::size_t r = 0; r < radii.size(); ++r) {
    const double R = radii[r];
    ComplexField2D prev;
    bool have_prev = false;
    // Sweep downward in b: a minimiser at b' is a trial state at b < b' with lower energy.
    for (std::size_t k = n; k-- > 0;) {
      const double b = b_grid[k];
      if (b >= 1.0) {
        dens[r][k] = 0.5;
        continue;
      }
      const int res = ladder_resolution(b, R);
      const CellMinimum m = table_point(b, R, opt, (opt.monotone_seeding && have_prev) ? &prev : nullptr, res);
      dens[r][k] = std::min(0.5, m.energy / (R * R));
      prev = m.u;
      have_prev = true;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (b_grid[k] >= 1.0) continue;
    const double R2 = radii.back();
    t.R_used[k] = R2;
    if (radii.size() >= 2) {
      const double R1 = radii[radii.size() - 2];
      const double e1 = dens[radii.size() - 2][k], e2 = dens.back()[k];
      t.value[k] = std::clamp((R2 * e2 - R1 * e1) / (R2 - R1), 0.0, 0.5);
      t.bound[k] = std::abs(e2 - t.value[k]);
    } else {
      t.value[k] = dens[0][k];
      t.bound[k] = std::sqrt(b_grid[k]) / R2;
    }
  }
  return t;
}

void validate_table(const FhatTable& t) {
  const std::size_t n = t.b.size();
  if (t.value.size() != n || t.R_used.size() != n || t.bound.size() != n) throw InputError("fhat table columns differ");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(t.b[k] > 0.0) || t.b[k] > 1.0) throw InputError("fhat table b outside (0,1]");
    if (k > 0 && !(t.b[k] > t.b[k - 1])) throw InputError("fhat table b not increasing");
    if (!(t.value[k] >= 0.0 && t.value[k] <= 0.5)) throw InputError("fhat table value outside [0,1/2]");
  }
}

void write_fhat_csv(const FhatTable& t, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path);
  os.precision(17);
  os << "b,fhat,R_used,bound\n";
  for (std::size_t k = 0; k < t.b.size(); ++k)
    os << t.b[k] << ',' << t.value[k] << ',' << t.R_used[k] << ',' << t.bound[k] << '\n';
}

FhatTable read_fhat_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open fhat table: " + path);
  FhatTable t;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double b, v, r, e;
    if (!(ss >> b >> v >> r >> e)) throw InputError("malformed fhat table row");
    t.b.push_back(b);
    t.value.push_back(v);
    t.R_used.push_back(r);
    t.bound.push_back(e);
  }
  validate_table(t);
  return t;
}

}  // namespace pgl
