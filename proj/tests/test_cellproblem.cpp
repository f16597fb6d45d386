#include <doctest.h>

#include <cstdio>
#include <random>

#include "pgl/cellproblem.hpp"
#include "pgl/gauge.hpp"

using namespace pgl;

namespace {

CellProblem cell(double b, double R, double alpha, int n, BoundaryCondition bc = BoundaryCondition::Dirichlet) {
  CellProblem p;
  p.b = b;
  p.R = R;
  p.alpha = alpha;
  p.resolution = n;
  p.bc = bc;
  return p;
}

CellOptions quick() {
  CellOptions o;
  o.seeds = 2;
  return o;
}

}  // namespace

TEST_CASE("quartic line search") {
  // (t - 1)^2 (t + 2)^2 + t has its global minimum on the left well
  const std::array<double, 5> p{4.0, -4.0 + 1.0, -3.0, 2.0, 1.0};
  const double t = argmin_quartic(p);
  double best = 1e300, tb = 0.0;
  for (double s = -4.0; s <= 4.0; s += 1e-4)
    if (eval_poly(p, s) < best) best = eval_poly(p, s), tb = s;
  CHECK(t == doctest::Approx(tb).epsilon(1e-3));
  CHECK(argmin_quartic({1.0, -2.0, 1.0, 0.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("functional gradient matches finite differences") {
  const CellProblem p = cell(0.4, 4.0, 1.0, 32);
  const GridPtr g = p.grid();
  const QuarticFunctional f = cell_functional(p, g);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  std::vector<cplx> u(g->size());
  for (auto& z : u) z = {N(rng), N(rng)};
  f.project(u);
  std::vector<cplx> grad;
  f.gradient(u, grad);
  const double eps = 1e-6;
  for (std::size_t k = 0; k < u.size(); k += 7) {
    if (!f.free_node(k)) continue;
    auto up = u, um = u;
    up[k] += eps, um[k] -= eps;
    const double dre = (f.energy(up) - f.energy(um)) / (2 * eps);
    up = u, um = u;
    up[k] += cplx(0, eps), um[k] -= cplx(0, eps);
    const double dim = (f.energy(up) - f.energy(um)) / (2 * eps);
    CHECK(grad[k].real() == doctest::Approx(dre).epsilon(1e-5));
    CHECK(grad[k].imag() == doctest::Approx(dim).epsilon(1e-5));
  }
  // line polynomial reproduces the energy along a ray
  std::vector<cplx> d(u.size());
  for (auto& z : d) z = {N(rng), N(rng)};
  f.project(d);
  const auto poly = f.line_polynomial(u, d);
  for (double t : {-0.7, 0.3, 1.1}) {
    auto w = u;
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += t * d[k];
    CHECK(eval_poly(poly, t) == doctest::Approx(f.energy(w)).epsilon(1e-10));
  }
}

TEST_CASE("descent energies never increase") {
  const CellProblem p = cell(0.5, 6.0, 1.0, 32);
  const QuarticFunctional f = cell_functional(p, p.grid());
  for (int method = 0; method < 2; ++method) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N;
    std::vector<cplx> u(p.grid()->size());
    for (auto& z : u) z = {N(rng), N(rng)};
    f.project(u);
    DescentOptions o;
    o.max_iter = 400;
    const DescentResult r = method == 0 ? minimize_ncg(f, u, o) : minimize_bb(f, u, o);
    REQUIRE(r.trace.size() > 2);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] + 1e-12 * std::abs(r.trace[0]));
  }
}

TEST_CASE("cell energy at the zero state and under conjugation") {
  for (double alpha : {1.0, -1.0}) {
    const CellProblem p = cell(0.3, 8.0, alpha, 32);
    const ComplexField2D zero(p.grid());
    CHECK(cell_energy(zero, p) == doctest::Approx(p.R * p.R / 2).epsilon(1e-12));
  }
  CellProblem plus = cell(0.6, 5.0, 1.0, 32), minus = plus;
  minus.zeta = -1;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N;
  ComplexField2D u(plus.grid());
  const Mask ring = dirichlet_ring(u.grid());
  for (std::size_t k = 0; k < u.size(); ++k)
    if (u.grid().inside(k) && !ring[k]) u[k] = {N(rng), N(rng)};
  ComplexField2D uc = u;
  for (std::size_t k = 0; k < uc.size(); ++k) uc[k] = std::conj(uc[k]);
  CHECK(cell_energy(u, plus) == doctest::Approx(cell_energy(uc, minus)).epsilon(1e-14));
}

TEST_CASE("nonpositive alpha: the zero state is the minimiser") {
  for (double alpha : {-1.0, -0.5, 0.0}) {
    const CellProblem p = cell(0.7, 6.0, alpha, 32);
    const CellMinimum m = minimize_cell(p, quick());
    CHECK(m.energy / (p.R * p.R) == doctest::Approx(alpha * alpha / 2).epsilon(1e-10));
    CHECK(l2_norm(m.u) <= 1e-6);
  }
}

TEST_CASE("minimisers obey the modulus bound") {
  for (double alpha : {1.0, 2.0}) {
    const CellProblem p = cell(0.5, 6.0, alpha, 36);
    const CellMinimum m = minimize_cell(p, quick());
    CHECK(m.converged);
    double sup = 0.0;
    for (std::size_t k = 0; k < m.u.size(); ++k) sup = std::max(sup, std::abs(m.u[k]));
    CHECK(sup <= std::sqrt(alpha) + 1e-6);
  }
}

TEST_CASE("zero field: energy per area falls like 1/R") {
  const CellMinimum m1 = minimize_cell(cell(0.0, 8.0, 1.0, 32), quick());
  const CellMinimum m2 = minimize_cell(cell(0.0, 16.0, 1.0, 64), quick());
  const double e1 = m1.energy / 64.0, e2 = m2.energy / 256.0;
  CHECK(e2 < e1);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("Neumann minimum lies below the Dirichlet minimum") {
  for (double b : {0.3, 0.8}) {
    const CellMinimum d = minimize_cell(cell(b, 6.0, 1.0, 32), quick());
    const CellMinimum n = minimize_cell(cell(b, 6.0, 1.0, 32, BoundaryCondition::Neumann), quick());
    CHECK(n.energy <= d.energy + 1e-8);
  }
}

TEST_CASE("scaling identity on fixed examples") {
  CellOptions o = quick();
  o.tol = 1e-7;
  for (auto [b, R, alpha] : {std::tuple{0.5, 10.0, 2.0}, std::tuple{0.2, 15.0, 0.5}, std::tuple{0.4, 6.0, 1.0}}) {
    const auto [lhs, rhs] = scaling_check(b, R, alpha, o);
    CHECK(std::abs(lhs - rhs) <= 2e-6 * std::abs(rhs) + 1e-9);
  }
}

TEST_CASE("table evaluation") {
  FhatTable t;
  t.b = {0.1, 0.5, 1.0};
  t.value = {0.1, 0.3, 0.5};
  t.R_used = {10, 10, 10};
  t.bound = {0, 0, 0};
  validate_table(t);
  CHECK(fhat_eval(t, 5.0) == 0.5);
  CHECK(fhat_eval(t, 1.0) == 0.5);
  CHECK(fhat_eval(t, 0.0) == 0.0);
  CHECK(fhat_eval(t, 0.3) == doctest::Approx(0.2));
  const double lo = fhat_eval(t, 0.1), hi = fhat_eval(t, 0.5);
  const double mid = fhat_eval(t, 0.37);
  CHECK(mid >= lo);
  CHECK(mid <= hi);

  const std::string path = "test_cellproblem_table.csv";
  write_fhat_csv(t, path);
  const FhatTable back = read_fhat_csv(path);
  std::remove(path.c_str());
  CHECK(back.b == t.b);
  CHECK(back.value == t.value);

  FhatTable bad = t;
  bad.b[1] = 0.05;
  CHECK_THROWS_AS(validate_table(bad), InputError);
  bad = t;
  bad.value[2] = 0.6;
  CHECK_THROWS_AS(validate_table(bad), InputError);

  CHECK(fhat_small_b(0.01) == doctest::Approx(0.005 * std::log(100.0)));
  const auto grid = default_b_grid();
  CHECK(grid.size() == 40);
  CHECK(grid.front() == doctest::Approx(0.02));
  CHECK(grid.back() == doctest::Approx(1.0));
}

TEST_CASE("small tables are monotone and in range") {
  TableOptions o;
  o.R = 8.0;
  o.seeds = 1;
  o.extrapolate = false;
  const FhatTable t = build_fhat_table({0.2, 0.4, 0.6, 0.8, 1.0}, o);
  for (std::size_t i = 0; i < t.value.size(); ++i) {
    CHECK(t.value[i] >= 0.0);
    CHECK(t.value[i] <= 0.5);
    if (i > 0) CHECK(t.value[i] >= t.value[i - 1] - 2e-5);
  }
}

TEST_CASE("invalid cell problems are rejected") {
  CHECK_THROWS_AS(cell(0.5, -1.0, 1.0, 32).validate(), InputError);
  CHECK_THROWS_AS(cell(0.5, 10.0, 1.0, 16).validate(), InputError);
  CHECK_THROWS_AS(cell(-0.1, 10.0, 1.0, 32).validate(), InputError);
}
