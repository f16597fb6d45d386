#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <random>

#include "pgl/gauge.hpp"
#include "pgl/spectral.hpp"

using namespace pgl;

namespace {

double dense_lowest(const Tridiagonal& t) {
  const int n = static_cast<int>(t.diag.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) M(i, i) = t.diag[i];
  for (int i = 0; i + 1 < n; ++i) M(i, i + 1) = M(i + 1, i) = t.off[i];
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

struct Setup {
  GridPtr g;
  ScalarField2D a;
  LinkField2D F;
};

Setup uniform(int n, double a_value = 1.0) {
  Setup s;
  s.g = share(Grid2D::square(n));
  s.a = ScalarField2D(s.g, a_value);
  s.F = vector_potential_from_field(ScalarField2D(s.g, 1.0), s.g, 1e-9).F;
  return s;
}

}  // namespace

TEST_CASE("tridiagonal eigensolver against a dense solver") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    Tridiagonal t;
    for (int i = 0; i < 60; ++i) t.diag.push_back(2 + U(rng));
    for (int i = 0; i < 59; ++i) t.off.push_back(U(rng));
    const TridiagEigen e = tridiag_lowest(t);
    CHECK(e.value == doctest::Approx(dense_lowest(t)).epsilon(1e-12));
    CHECK(e.residual <= 1e-8);
  }
}

TEST_CASE("golden section") {
  const auto [x, fx] = golden_min([](double t) { return (t - 0.3) * (t - 0.3) + 2.0; }, -1.0, 1.0, 1e-9);
  CHECK(x == doctest::Approx(0.3).epsilon(1e-7));
  CHECK(fx == doctest::Approx(2.0));
}

TEST_CASE("de Gennes operator") {
  // xi = 0: even extension of the harmonic oscillator ground state
  CHECK(std::abs(degennes_mu(0.0, 10.0, 2000) - 1.0) <= 1e-4);
  // potential floor xi^2 for xi > 0
  for (double xi : {1.0, 2.0, 4.0}) CHECK(degennes_mu(xi) >= xi * xi);

  const SpectralResult t = theta0();
  CHECK(t.residual <= 1e-8);
  CHECK(t.value > 0.0);
  CHECK(t.value < 1.0);
  CHECK(std::abs(t.value - t.minimizer_param * t.minimizer_param) <= 1e-5);
  CHECK(std::abs(t.value - 0.5901) <= 1e-3);
  CHECK(t.refinement_history.size() >= 2);
  // strictly convex at the minimiser
  const double x0 = t.minimizer_param, d = 0.05;
  CHECK(degennes_mu(x0 - d) + degennes_mu(x0 + d) - 2 * degennes_mu(x0) > 0.0);
}

TEST_CASE("Montgomery operator") {
  for (double tau : {-2.0, -0.5, 0.0, 1.0}) CHECK(montgomery_ground_nodes(tau) == 0);
  CHECK(montgomery_lambda(4.0) > montgomery_lambda(2.0));
  CHECK(montgomery_lambda(2.0) > montgomery_lambda(0.0));
  // tau = 0 is the quartic oscillator -d^2 + t^4/4, whose ground energy is 4^(-1/3) times that of
  // -d^2 + t^4 (1.0603620905)
  CHECK(montgomery_lambda(0.0, 8.0, 2000) == doctest::Approx(1.0603620905 * std::cbrt(0.25)).epsilon(1e-5));

  const SpectralResult l = lambda0();
  CHECK(l.value <= montgomery_lambda(0.0));
  CHECK(std::abs(l.value - 0.57) <= 0.01);
  CHECK(l.minimizer_param < 0.0);
  CHECK(l.residual <= 1e-8);
}

TEST_CASE("magnetic operators are Hermitian and the sparse solver agrees with the dense one") {
  const Setup s = uniform(16);
  for (double H : {0.0, 5.0, 30.0}) {
    const SpMat M = mu1_operator(4.0, H, s.a, s.F);
    const SpMat D = M - SpMat(M.adjoint());
    CHECK(D.norm() <= 1e-12 * M.norm());
    const double dense = dense_eigenvalues(M)(0);
    const SpectralResult r = mu1(4.0, H, s.a, s.F);
    CHECK(r.value == doctest::Approx(dense).epsilon(1e-8));
    CHECK(r.residual <= 1e-8);
    CHECK_FALSE(r.flagged);
  }
}

TEST_CASE("mu1 special cases") {
  // no field: the constant state, -kappa^2
  const Setup s = uniform(24);
  CHECK(mu1(6.0, 0.0, s.a, s.F).value == doctest::Approx(-36.0).epsilon(1e-8));

  // strong field above the surface critical field is positive, weak field negative
  const Setup f = uniform(64);
  CHECK(mu1(12.0, 36.0, f.a, f.F).value > 0.0);
  CHECK(mu1(12.0, 3.0, f.a, f.F).value < 0.0);

  // increasing in H on a sample
  const Setup m = uniform(32);
  double prev = -1e300;
  for (double H : {4.0, 8.0, 12.0, 16.0, 24.0}) {
    const double v = mu1(8.0, H, m.a, m.F).value;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("half-plane ground energy at a right angle") {
  const double l0 = lambda0().value;
  const SpectralResult r = halfplane_lambda(M_PI / 2, 8.0, 8);
  CHECK(r.value > 0.0);
  CHECK(r.value < l0);
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("half-plane table evaluation and persistence") {
  HalfplaneTable t;
  t.lambda0 = 0.57;
  for (int k = 1; k <= 11; ++k) {
    t.theta.push_back(k * M_PI / 12);
    t.value.push_back(0.55 - 0.1 * std::abs(k - 6) / 5.0);
  }
  CHECK(t.eval(0.0) == 0.57);
  CHECK(t.eval(M_PI) == 0.57);
  CHECK(t.eval(M_PI / 2) == doctest::Approx(0.55));
  CHECK(t.eval(0.3) == doctest::Approx(t.eval(M_PI - 0.3)).epsilon(1e-12));
  // monotone interpolation between nodes
  for (double th = M_PI / 12; th < M_PI / 2; th += 0.01) CHECK(t.eval(th + 0.01) >= t.eval(th) - 1e-12);

  const std::string path = "test_spectral_halfplane.csv";
  write_halfplane_csv(t, path);
  const HalfplaneTable back = read_halfplane_csv(path);
  std::remove(path.c_str());
  CHECK(back.lambda0 == doctest::Approx(0.57));
  REQUIRE(back.theta.size() == t.theta.size());
  for (std::size_t k = 0; k < t.theta.size(); ++k) CHECK(back.value[k] == doctest::Approx(t.value[k]).epsilon(1e-14));
}
