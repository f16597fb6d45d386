#include <doctest.h>

#include <cstdio>
#include <random>

#include "pgl/gauge.hpp"
#include "pgl/glsolver.hpp"

using namespace pgl;

namespace {

GLData uniform(int n, double a, double B) {
  const GridPtr g = share(Grid2D::square(n));
  return make_gl_data(ScalarField2D(g, a), ScalarField2D(g, B));
}

FhatTable linear_table() {
  FhatTable t;
  for (int k = 1; k <= 10; ++k) {
    t.b.push_back(0.1 * k);
    t.value.push_back(0.05 * k);
    t.R_used.push_back(10);
    t.bound.push_back(0);
  }
  return t;
}

SolverOptions ncg() {
  SolverOptions o;
  o.method = DescentMethod::NCG;
  return o;
}

}  // namespace

TEST_CASE("energy of the normal state") {
  const GridPtr g = share(Grid2D::square(24));
  const auto a = ScalarField2D::sample(g, [](Point p) { return p.x - 0.3; });
  const GLData d = make_gl_data(a, ScalarField2D(g, 1.0));
  const double kappa = 5.0, H = 2.0;
  ScalarField2D a2 = a;
  for (std::size_t k = 0; k < a2.size(); ++k) a2[k] *= a2[k];
  const ComplexField2D zero(g);
  CHECK(full_energy(zero, d.F(), kappa, H, d) == doctest::Approx(0.5 * kappa * kappa * integrate(a2)).epsilon(1e-12));

  LinkField2D A = d.F();
  A += 0.01 * potential_A0(g, {0.5, 0.5});
  CHECK(full_energy(zero, A, kappa, H, d) > full_energy(zero, d.F(), kappa, H, d));
}

TEST_CASE("full energy is gauge invariant") {
  const GLData d = uniform(20, 1.0, 1.0);
  const GridPtr g = d.grid();
  const double kappa = 4.0, H = 3.0;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 3; ++trial) {
    ComplexField2D psi(g);
    ScalarField2D chi(g);
    for (std::size_t k = 0; k < g->size(); ++k) psi[k] = {N(rng), N(rng)}, chi[k] = N(rng);
    LinkField2D A = d.F();
    A += 0.05 * potential_A0(g, {0.2, 0.7});
    ComplexField2D psi2 = psi;
    for (std::size_t k = 0; k < g->size(); ++k) psi2[k] *= std::polar(1.0, kappa * H * chi[k]);
    LinkField2D A2 = A;
    A2 += LinkField2D::gradient(chi);
    const double e1 = full_energy(psi, A, kappa, H, d), e2 = full_energy(psi2, A2, kappa, H, d);
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-11));
  }
}

TEST_CASE("negative pinning gives the normal state") {
  const GLData d = uniform(24, -1.0, 1.0);
  const double kappa = 6.0;
  const GLState s = minimize_frozen(d, kappa, 3.0, nullptr, ncg());
  CHECK(l2_norm(s.psi) <= 1e-8);
  CHECK(s.energy == doctest::Approx(0.5 * kappa * kappa).epsilon(1e-10));
  CHECK(diagnostics(s, d).normal);
}

TEST_CASE("large field destroys superconductivity") {
  const double kappa = 6.0;
  const GLData d = uniform(40, 1.0, 1.0);
  const GLState s = minimize_frozen(d, kappa, 4.0 * kappa, nullptr, ncg());
  CHECK(l2_norm(s.psi) <= 1e-3);
}

TEST_CASE("the zero state is a fixed point of the coupled solve") {
  const GLData d = uniform(20, 1.0, 1.0);
  GLState init;
  init.psi = ComplexField2D(d.grid());
  init.A = d.F();
  const GLState s = minimize_coupled(d, 5.0, 2.0, &init, ncg());
  CHECK(l2_norm(s.psi) == 0.0);
  double dA = 0.0;
  for (std::size_t k = 0; k < d.F().xs().size(); ++k) dA = std::max(dA, std::abs(s.A.xs()[k] - d.F().xs()[k]));
  CHECK(dA <= 1e-12);
}

TEST_CASE("converged minimisers: residuals, maximum principle and cached energy") {
  const double kappa = 8.0, H = 4.0;
  const GridPtr g = share(Grid2D::square(40));
  const auto a = ScalarField2D::sample(g, [](Point p) { return 1.0 - 2.0 * p.x * p.y; });
  const GLData d = make_gl_data(a, ScalarField2D::sample(g, [](Point p) { return 1.0 + 0.5 * p.y; }));
  const GLState frozen = minimize_frozen(d, kappa, H, nullptr, ncg());
  const GLState coupled = minimize_coupled(d, kappa, H, nullptr, ncg());
  for (const GLState* s : {&frozen, &coupled}) {
    CHECK(s->converged);
    CHECK(s->residuals.psi_eq <= 1e-6 * kappa * kappa);
    CHECK(s->energy == doctest::Approx(full_energy(*s, d)).epsilon(1e-12));
    const Diagnostics dg = diagnostics(*s, d);
    CHECK(dg.sup_bound_ok);
    CHECK(dg.sup_psi2 <= dg.sup_a + 1e-6);
    CHECK_FALSE(dg.normal);
    for (std::size_t i = 1; i < s->trace.size(); ++i) CHECK(s->trace[i] <= s->trace[i - 1] + 1e-9 * std::abs(s->trace[0]));
  }
  CHECK(coupled.energy <= frozen.energy + 1e-6 * kappa * kappa);
}

TEST_CASE("residuals at the normal state and at a random state") {
  const GLData d = uniform(20, 1.0, 1.0);
  GLState s;
  s.psi = ComplexField2D(d.grid());
  s.A = d.F();
  s.kappa = 5.0;
  s.H = 2.0;
  const GLResiduals r0 = residuals(s, d);
  CHECK(r0.psi_eq == 0.0);
  CHECK(r0.current_eq <= 1e-8);
  CHECK(r0.field_bc <= 1e-8);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (std::size_t k = 0; k < s.psi.size(); ++k) s.psi[k] = {N(rng), N(rng)};
  const GLResiduals r = residuals(s, d);
  CHECK(r.psi_eq > 0.0);
  CHECK(r.current_eq > 0.0);
  CHECK(r.neumann > 0.0);
}

TEST_CASE("initial state and checkpoints are deterministic") {
  const GridPtr g = share(Grid2D::square(16));
  const GLData d = make_gl_data(ScalarField2D::sample(g, [](Point p) { return p.x - 0.4; }), ScalarField2D(g, 1.0));
  const ComplexField2D u1 = default_initial_state(d, 42), u2 = default_initial_state(d, 42);
  for (std::size_t k = 0; k < u1.size(); ++k) {
    CHECK(u1[k] == u2[k]);
    CHECK(std::abs(u1[k]) == doctest::Approx(std::sqrt(std::max(d.a[k], 0.0))));
  }

  GLState s = minimize_frozen(d, 4.0, 2.0, nullptr, ncg());
  const std::string path = "test_glsolver.chk";
  write_checkpoint(s, path);
  const GLState back = read_checkpoint(g, path);
  std::remove(path.c_str());
  CHECK(back.kappa == s.kappa);
  CHECK(back.H == s.H);
  CHECK(back.seed == s.seed);
  for (std::size_t k = 0; k < s.psi.size(); ++k) CHECK(back.psi[k] == s.psi[k]);
  CHECK(back.A.xs() == s.A.xs());
}

TEST_CASE("the magnetic term falls as H grows") {
  const double kappa = 10.0;
  const GridPtr g = share(Grid2D::square(48));
  const GLData d = make_gl_data(ScalarField2D(g, 1.0), ScalarField2D::sample(g, [](Point p) { return p.x - 0.5; }));
  double prev = 1e300;
  for (double H : {kappa, 2 * kappa}) {
    const GLState s = minimize_coupled(d, kappa, H, nullptr, ncg());
    const double v = H * diagnostics(s, d).curl_norm;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("test configuration parameters") {
  TestConfigParams p;
  p.resolve(64.0);
  CHECK(p.ell == doctest::Approx(std::pow(64.0, -7.0 / 12)));
  CHECK(p.rho == doctest::Approx(std::pow(64.0, -17.0 / 24)));
  CHECK(p.delta == doctest::Approx(std::pow(64.0, -1.0 / 12)));
  CHECK(p.admissible(64.0, 32.0) == (p.ell * p.ell * 64.0 * 32.0 * p.rho > 1.0));
}

TEST_CASE("test configurations") {
  const FhatTable t = linear_table();
  CellCache cells;
  {
    const GLData d = uniform(40, -1.0, 1.0);
    const TestConfiguration c = build_test_configuration(d, 10.0, 10.0, {}, cells, t);
    CHECK(l2_norm(c.state.psi) == 0.0);
  }
  const double kappa = 12.0, H = 6.0;
  const GLData d = uniform(60, 1.0, 1.0);
  TestConfigParams p;
  p.ell = 0.25;
  p.rho = 0.5;
  const TestConfiguration c = build_test_configuration(d, kappa, H, p, cells, t);
  CHECK(c.squares_pos > 0);
  const GLState m = minimize_frozen(d, kappa, H, nullptr, ncg());
  CHECK(full_energy(c.state.psi, d.F(), kappa, H, d) >= m.energy);
}
