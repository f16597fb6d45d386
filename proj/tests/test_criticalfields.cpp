#include <doctest.h>

#include "pgl/criticalfields.hpp"

using namespace pgl;

namespace {

// Real 1D constants with a flat stand-in table for the half-plane values.
SpectralConstants constants() {
  static const SpectralConstants sc = [] {
    SpectralConstants s;
    s.theta0 = theta0().value;
    s.lambda0 = lambda0().value;
    s.halfplane.lambda0 = s.lambda0;
    for (int k = 1; k <= 11; ++k) {
      s.halfplane.theta.push_back(k * M_PI / 12);
      s.halfplane.value.push_back(0.55);
    }
    s.source = "test";
    return s;
  }();
  return sc;
}

GridPtr centred_square(int n, double side) { return share(Grid2D::square(n, side, {-side / 2, -side / 2})); }

}  // namespace

TEST_CASE("zero set of a linear field") {
  const GridPtr g = centred_square(41, 2.0);
  const GammaData gd = gamma_extract(ScalarField2D::sample(g, [](Point p) { return p.x + 1e-3; }));
  REQUIRE_FALSE(gd.empty());
  CHECK_FALSE(gd.violation);
  for (const auto& p : gd.points) {
    CHECK(std::abs(p.x.x + 1e-3) <= 1e-12);
    CHECK(p.grad_norm == doctest::Approx(1.0).epsilon(1e-9));
  }
  REQUIRE(gd.crossings.size() == 2);
  for (const auto& c : gd.crossings) CHECK(c.theta == doctest::Approx(M_PI / 2).epsilon(1e-9));

  CHECK(gamma_extract(ScalarField2D(g, 1.0)).empty());
}

TEST_CASE("zero set of a ring") {
  for (int n : {60, 120}) {
    const GridPtr g = centred_square(n, 2.0);
    const GammaData gd = gamma_extract(ScalarField2D::sample(g, [](Point p) { return p.x * p.x + p.y * p.y - 0.25; }));
    CHECK(gd.crossings.empty());
    for (const auto& p : gd.points) {
      CHECK(std::abs(std::hypot(p.x.x, p.x.y) - 0.5) <= g->h());
      CHECK(std::abs(p.grad_norm - 1.0) <= 2 * g->h());
      CHECK(std::abs(p.B_near) <= g->h() * 1.0 + g->h() * g->h());
    }
  }
}

TEST_CASE("degenerate zeros are reported") {
  const GridPtr g = centred_square(40, 2.0);
  CHECK(gamma_extract(ScalarField2D::sample(g, [](Point p) { return p.x * p.x * p.x; })).violation);
}

TEST_CASE("nonvanishing-field eigenvalue lower bound") {
  const SpectralConstants sc = constants();
  const GridPtr g = share(Grid2D::square(32));
  const ScalarField2D one(g, 1.0);
  CHECK(lambda1(one, one, 2.0, sc.theta0) == doctest::Approx(2.0 * sc.theta0 - 1.0));
  const auto B = ScalarField2D::sample(g, [](Point p) { return 1.0 + p.x; });
  double inf_bdy = 1e300;
  for (const auto& b : g->boundary())
    if (!b.corner) inf_bdy = std::min(inf_bdy, B[b.index]);
  double inf_all = 1e300;
  for (std::size_t k = 0; k < g->size(); ++k) inf_all = std::min(inf_all, B[k]);
  CHECK(lambda1(B, ScalarField2D(g, 0.0), 3.0, sc.theta0) ==
        doctest::Approx(3.0 * std::min(inf_all, sc.theta0 * inf_bdy)));
  const auto a = ScalarField2D::sample(g, [](Point p) { return p.y; });
  double sup_a = -1e300;
  for (std::size_t k = 0; k < g->size(); ++k) sup_a = std::max(sup_a, a[k]);
  CHECK(lambda1(B, a, 0.0, sc.theta0) == doctest::Approx(-sup_a));
  CHECK_THROWS_AS(lambda1(ScalarField2D::sample(g, [](Point p) { return p.x - 0.5; }), a, 1.0, sc.theta0), InputError);
}

TEST_CASE("vanishing-field eigenvalue lower bound and alpha1") {
  const SpectralConstants sc = constants();
  const GridPtr g = centred_square(41, 1.0);
  const ScalarField2D one(g, 1.0);
  const ScalarField2D B = ScalarField2D::sample(g, [](Point p) { return p.x + 1e-3; });
  const GammaData gd = gamma_extract(B);
  const double s = 0.7;
  const double interior = sc.lambda0 * std::pow(s, 2.0 / 3) - 1.0;
  const double boundary = sc.halfplane.eval(M_PI / 2) * std::pow(s, 2.0 / 3) - 1.0;
  CHECK(boundary < interior);
  CHECK(lambda1_hat(gd, one, s, sc) == doctest::Approx(std::min(interior, boundary)).epsilon(1e-8));
  CHECK(lambda1_hat(gd, ScalarField2D::sample(g, [](Point p) { return 1.0 - p.y * p.y; }), 0.0, sc) ==
        doctest::Approx(-1.0).epsilon(1e-3));

  const double a1 = alpha1(gd, sc);
  CHECK(a1 == doctest::Approx(std::pow(0.55, 1.5)).epsilon(1e-8));
  ScalarField2D B3 = B;
  for (std::size_t k = 0; k < B3.size(); ++k) B3[k] *= 3.0;
  CHECK(alpha1(gamma_extract(B3), sc) == doctest::Approx(3.0 * a1).epsilon(1e-9));

  // a cone has |grad B0| = 1 on its zero circle and no boundary crossing
  const GridPtr fine = centred_square(200, 1.0);
  const GammaData cone = gamma_extract(ScalarField2D::sample(fine, [](Point p) { return std::hypot(p.x, p.y) - 0.25; }));
  CHECK(cone.crossings.empty());
  CHECK(alpha1(cone, sc) == doctest::Approx(std::pow(sc.lambda0, 1.5)).epsilon(0.02));
  CHECK_THROWS_AS(alpha1(GammaData{}, sc), InputError);
}

TEST_CASE("critical field formulas") {
  const SpectralConstants sc = constants();
  const double kappa = 10.0;
  const GridPtr g = share(Grid2D::square(32));
  const ScalarField2D one(g, 1.0), two(g, 2.0);
  const HC3Formula f = hc3_formula(one, one, kappa, nullptr, sc);
  CHECK(f.value == doctest::Approx(kappa / sc.theta0));
  CHECK(f.field_case == FieldCase::NonVanishing);
  CHECK(f.boundary_attains);
  CHECK(f.error_scale == doctest::Approx(std::sqrt(kappa)));
  CHECK(hc3_formula(two, one, kappa, nullptr, sc).value == doctest::Approx(2.0 * f.value));

  const HC3Formula none = hc3_formula(ScalarField2D(g, -1.0), one, kappa, nullptr, sc);
  CHECK(none.no_superconductivity);
  CHECK(none.value == 0.0);

  const GridPtr fine = centred_square(200, 1.0);
  const ScalarField2D cone = ScalarField2D::sample(fine, [](Point p) { return std::hypot(p.x, p.y) - 0.25; });
  const GammaData gd = gamma_extract(cone);
  const ScalarField2D a1(fine, 1.0), a2(fine, 2.0);
  const HC3Formula v = hc3_formula(a1, cone, kappa, &gd, sc);
  CHECK(v.field_case == FieldCase::Vanishing);
  CHECK(v.value == doctest::Approx(kappa * kappa / std::pow(sc.lambda0, 1.5)).epsilon(0.02));
  CHECK(v.error_scale == doctest::Approx(std::pow(kappa, 1.75)));
  CHECK(hc3_formula(a2, cone, kappa, &gd, sc).value == doctest::Approx(std::pow(2.0, 1.5) * v.value).epsilon(1e-12));
}

TEST_CASE("eigenvalue bisection") {
  const double kappa = 6.0;
  const GridPtr g = share(Grid2D::square(36));
  const GLData d = make_gl_data(ScalarField2D(g, 1.0), ScalarField2D(g, 1.0));
  const HC3Bracket b = hc3_empirical_local(kappa, d.a, d.F(), 0.5 * kappa, 3.0 * kappa, 1e-2);
  CHECK(b.lo < b.hi);
  CHECK(b.hi - b.lo <= 1e-2 * kappa + 1e-12);
  CHECK(b.mu_lo < 0.0);
  CHECK(b.mu_hi > 0.0);
  CHECK(mu1(kappa, b.lo, d.a, d.F()).value < 0.0);
  CHECK(mu1(kappa, b.hi, d.a, d.F()).value > 0.0);
  // both ends below the critical field: one expansion upward recovers the bracket
  const HC3Bracket e = hc3_empirical_local(kappa, d.a, d.F(), 0.5 * b.lo, b.lo, 1e-2);
  CHECK(e.expanded);
  CHECK(e.mu_lo < 0.0);
  CHECK(e.mu_hi > 0.0);
  CHECK_THROWS_AS(hc3_empirical_local(kappa, d.a, d.F(), 0.01, 0.02, 1e-2), InputError);
}

TEST_CASE("negative eigenvalue implies a nontrivial minimiser") {
  const double kappa = 6.0;
  const GridPtr g = share(Grid2D::square(36));
  const auto a = ScalarField2D::sample(g, [](Point p) { return 1.0 - 1.5 * p.x; });
  const GLData d = make_gl_data(a, ScalarField2D::sample(g, [](Point p) { return 1.0 + 0.3 * p.y; }));
  SolverOptions o;
  o.method = DescentMethod::NCG;
  ScalarField2D a2 = a;
  for (std::size_t k = 0; k < a2.size(); ++k) a2[k] *= a2[k];
  const double normal = 0.5 * kappa * kappa * integrate(a2);
  for (double H : {2.0, 5.0, 8.0, 12.0, 20.0}) {
    if (mu1(kappa, H, d.a, d.F()).value >= 0.0) continue;
    const GLState s = minimize_frozen(d, kappa, H, nullptr, o);
    CHECK(s.energy < normal);
  }
}

TEST_CASE("breakdown scans") {
  const GridPtr g = share(Grid2D::square(30));
  SolverOptions o;
  o.method = DescentMethod::NCG;
  const GLData neg = make_gl_data(ScalarField2D(g, -1.0), ScalarField2D(g, 1.0));
  const BreakdownScan s = breakdown_scan(neg, 6.0, {1.0, 2.0, 4.0}, 1e-3, o);
  CHECK(s.found);
  CHECK(s.H_break == 1.0);
  for (const auto& p : s.points) CHECK(p.psi_l2 <= 1e-3);

  const GLData pos = make_gl_data(ScalarField2D(g, 1.0), ScalarField2D(g, 1.0));
  const BreakdownScan t = breakdown_scan(pos, 6.0, {1.0, 2.0}, 1e-3, o);
  CHECK_FALSE(t.found);
  CHECK(t.H_break == 2.0);
  CHECK_THROWS_AS(breakdown_scan(pos, 6.0, {2.0, 1.0}, 1e-3, o), InputError);
}
