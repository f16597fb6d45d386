#include <doctest.h>

#include "pgl/asymptotics.hpp"

using namespace pgl;

namespace {

// An increasing stand-in for the bulk energy table; the identities below hold for any table.
FhatTable sqrt_table() {
  FhatTable t;
  for (int k = 1; k <= 20; ++k) {
    const double b = 0.05 * k;
    t.b.push_back(b);
    t.value.push_back(0.5 * std::sqrt(b));
    t.R_used.push_back(10);
    t.bound.push_back(0);
  }
  return t;
}

GridPtr unit_square(int n) { return share(Grid2D::square(n)); }

}  // namespace

TEST_CASE("pointwise leading density") {
  const FhatTable t = sqrt_table();
  CHECK(leading_density(-2.0, 1.0, 0.5, t) == doctest::Approx(2.0));
  CHECK(leading_density(2.0, 1.0, 0.5, t) == doctest::Approx(4.0 * fhat_eval(t, 0.25)));
  CHECK(leading_density(1.0, 3.0, 1.0, t) == doctest::Approx(0.5));
  CHECK(leading_density(5e-9, 1.0, 0.5, t) == doctest::Approx(0.5 * 25e-18));
}

TEST_CASE("leading energy special cases") {
  const FhatTable t = sqrt_table();
  const GridPtr g = unit_square(40);
  const double kappa = 10.0;
  const ScalarField2D one(g, 1.0), minus(g, -1.0);
  const double area = integrate(one);

  CHECK(leading_energy(minus, one, kappa, 5.0, t).leading == doctest::Approx(0.5 * kappa * kappa * area));
  CHECK(leading_energy(one, one, kappa, 10.0, t).leading == doctest::Approx(0.5 * kappa * kappa * area));
  CHECK(leading_energy(one, one, kappa, 5.0, t).leading == doctest::Approx(kappa * kappa * area * fhat_eval(t, 0.5)));

  const auto a = ScalarField2D::sample(g, [](Point p) { return std::sin(6 * p.x) * std::cos(4 * p.y); });
  const auto B = ScalarField2D::sample(g, [](Point p) { return 0.3 + p.x * p.y; });
  const LeadingEnergyReport r = leading_energy(a, B, kappa, 7.0, t);
  CHECK(r.leading == doctest::Approx(r.bulk_pos + r.bulk_nonpos));
  CHECK(r.bulk_pos >= 0.0);
  CHECK(r.bulk_nonpos >= 0.0);
  ScalarField2D a2 = a;
  for (std::size_t k = 0; k < a2.size(); ++k) a2[k] *= a2[k];
  CHECK(r.leading <= 0.5 * kappa * kappa * integrate(a2) + 1e-12);
}

TEST_CASE("local leading energy") {
  const FhatTable t = sqrt_table();
  const GridPtr g = unit_square(40);
  const ScalarField2D one(g, 1.0);
  const auto a = ScalarField2D::sample(g, [](Point p) { return p.x - 0.2; });
  const Mask all = full_mask(*g), none(g->size(), 0);
  CHECK(local_leading_energy(all, a, one, 8.0, 3.0, t) == doctest::Approx(leading_energy(a, one, 8.0, 3.0, t).leading));
  CHECK(local_leading_energy(none, a, one, 8.0, 3.0, t) == 0.0);

  Mask left(g->size(), 0);
  for (std::size_t k = 0; k < g->size(); ++k) left[k] = g->node(k).x < 0.5;
  const double half = local_leading_energy(left, one, one, 8.0, 3.0, t);
  const double whole = leading_energy(one, one, 8.0, 3.0, t).leading;
  CHECK(std::abs(half - 0.5 * whole) <= g->h() * whole);
}

TEST_CASE("interior density prediction") {
  const FhatTable t = sqrt_table();
  const GridPtr g = unit_square(32);
  const Mask all = full_mask(*g);
  const ScalarField2D one(g, 1.0);
  const auto a = ScalarField2D::sample(g, [](Point p) { return 0.5 + p.x; });
  CHECK(psi4_prediction(all, a, one, 10.0, 5.0, t) >= 0.0);
  // sup a / |B0| = 1.5, so sigma >= 1.5 saturates
  CHECK(psi4_prediction(all, a, one, 10.0, 15.0, t) == 0.0);
  CHECK(psi4_prediction(all, ScalarField2D(g, -1.0), one, 10.0, 5.0, t) == 0.0);
  CHECK(psi4_prediction(all, one, one, 10.0, 5.0, t) ==
        doctest::Approx(-(2 * fhat_eval(t, 0.5) - 1) * integrate(one)));
}

TEST_CASE("energy comparison for the normal state") {
  const FhatTable t = sqrt_table();
  auto setup = [](double kappa) {
    const GridPtr g = unit_square(static_cast<int>(2 * kappa));
    return make_gl_data(ScalarField2D(g, -1.0), ScalarField2D(g, 1.0));
  };
  SolverOptions o;
  o.method = DescentMethod::NCG;
  const EnergyComparison c = compare_energy(setup, {10.0, 20.0}, 0.5, t, o);
  REQUIRE(c.rows.size() == 2);
  for (const auto& r : c.rows) {
    CHECK(r.rel_dev <= 1e-10);
    CHECK(r.H == doctest::Approx(0.5 * r.kappa));
  }
  CHECK(c.nonincreasing);
}

TEST_CASE("periodic averages") {
  CHECK(periodic_average([](double, double) { return 2.5; }, 1.0, 1.0) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(periodic_average([](double t1, double) { return std::pow(std::sin(2 * M_PI * t1 / 3.0), 2); }, 3.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
  const GridPtr g = unit_square(8);
  const ScalarField2D f = periodic_average_field(
      [](double t1, double, Point x) { return x.x + std::cos(2 * M_PI * t1); }, g, 1.0, 1.0);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(f[k] == doctest::Approx(g->node(k).x).epsilon(1e-12));
}

TEST_CASE("averaging rate is first order") {
  const PeriodicFunction phi = [](double t1, double) { return 1.0 + 0.5 * std::sin(2 * M_PI * t1); };
  const Box D{{0.0, 0.0}, {1.0 / 3.0, 1.0}};
  const HomogenizationRate r = homogenization_rate(phi, 1.0, 1.0, D, {8, 16, 32, 64});
  CHECK(r.slope >= -1.3);
  CHECK(r.slope <= -0.7);
  // closed form of the error: |1 - cos(2 pi M/3)| / (4 pi M)
  for (std::size_t k = 0; k < r.M.size(); ++k)
    CHECK(r.error[k] == doctest::Approx(std::abs(1 - std::cos(2 * M_PI * r.M[k] / 3)) / (4 * M_PI * r.M[k])).epsilon(1e-8));
}

TEST_CASE("homogenized leading term") {
  const FhatTable t = sqrt_table();
  const GridPtr g = unit_square(64);
  HomogenizedCase c;
  c.kind = HomogenizedCase::Kind::Oscillating;
  c.alpha = [](double, double) { return 0.8; };
  c.B0 = [](Point) { return 1.0; };
  c.sigma = 0.5;
  const double hom = homogenized_leading(c, g, 100.0, t), dir = direct_leading(c, g, 100.0, t);
  CHECK(hom == doctest::Approx(dir).epsilon(1e-12));
  CHECK(dir == doctest::Approx(leading_energy(ScalarField2D(g, 0.8), ScalarField2D(g, 1.0), 100.0, 50.0, t).leading));

  c.alpha = [](double t1, double) { return 1.0 + 0.5 * std::sin(2 * M_PI * t1); };
  const GridPtr fine = unit_square(400);
  const double h2 = homogenized_leading(c, fine, 400.0, t), d2 = direct_leading(c, fine, 400.0, t);
  CHECK(std::abs(h2 - d2) / d2 <= 0.05);
}

TEST_CASE("lower bound for a kappa-independent pinning") {
  const FhatTable t = sqrt_table();
  const GridPtr g = unit_square(64);
  const auto a = ScalarField2D::sample(g, [](Point p) { return 1.0 - 4.0 * std::hypot(p.x - 0.5, p.y - 0.5); });
  const ScalarField2D B(g, 1.0);
  const DiskBound b = kappa_independent_bound(a, B, 1.0, t);
  CHECK(b.r0 > 0.0);
  CHECK(b.constant > 0.0);
  CHECK(1.0 - 4.0 * (std::hypot(b.center.x - 0.5, b.center.y - 0.5) + b.r0) >= b.a0 - 2 * g->h() * 4.0);
}
