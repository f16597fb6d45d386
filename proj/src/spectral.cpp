#include "pgl/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

namespace pgl {

// One-dimensional -------------------------------------------------------------

namespace {

int sturm_count(const Tridiagonal& t, double x) {
  int neg = 0;
  double d = 1.0;
  const std::size_t n = t.diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double b2 = i > 0 ? t.off[i - 1] * t.off[i - 1] : 0.0;
    d = t.diag[i] - x - (i > 0 ? b2 / d : 0.0);
    if (d == 0.0) d = -1e-300;
    if (d < 0) ++neg;
  }
  return neg;
}

// Solve (T - s I) x = rhs by the Thomas algorithm.
std::vector<double> thomas(const Tridiagonal& t, double s, const std::vector<double>& rhs) {
  const std::size_t n = t.diag.size();
  std::vector<double> c(n, 0.0), d(n, 0.0), x(n, 0.0);
  double m = t.diag[0] - s;
  if (m == 0.0) m = 1e-300;
  c[0] = n > 1 ? t.off[0] / m : 0.0;
  d[0] = rhs[0] / m;
  for (std::size_t i = 1; i < n; ++i) {
    m = t.diag[i] - s - t.off[i - 1] * c[i - 1];
    if (m == 0.0) m = 1e-300;
    c[i] = i + 1 < n ? t.off[i] / m : 0.0;
    d[i] = (rhs[i] - t.off[i - 1] * d[i - 1]) / m;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TridiagEigen tridiag_lowest(const Tridiagonal& t) {
  const std::size_t n = t.diag.size();
  if (n < 2 || t.off.size() + 1 != n) throw InputError("bad tridiagonal matrix");
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(std::abs(lo), std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(t, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  TridiagEigen out;
  out.value = 0.5 * (lo + hi);
  std::vector<double> v(n, 1.0);
  const double shift = out.value - 1e-10 * std::max(1.0, std::abs(out.value));
  for (int it = 0; it < 4; ++it) {
    v = thomas(t, shift, v);
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
  }
  if (v[n / 2] < 0 || (v[0] < 0 && std::abs(v[0]) > std::abs(v[n / 2])))
    for (double& x : v) x = -x;
  std::vector<double> r(n);
  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double tv = t.diag[i] * v[i];
    if (i > 0) tv += t.off[i - 1] * v[i - 1];
    if (i + 1 < n) tv += t.off[i] * v[i + 1];
    r[i] = tv;
    num += v[i] * tv;
  }
  out.value = num;  // Rayleigh quotient of the polished vector
  for (std::size_t i = 0; i < n; ++i) r[i] -= out.value * v[i];
  out.residual = norm2(r);
  out.vector = std::move(v);
  return out;
}

Tridiagonal degennes_matrix(double xi, double T, int n) {
  if (!(T > 0) || n < 3) throw InputError("bad de Gennes discretization");
  const double dt = T / n, i2 = 1.0 / (dt * dt);
  Tridiagonal m;
  m.diag.resize(n);
  m.off.assign(n - 1, -i2);
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * dt;
    m.diag[i] = 2.0 * i2 + (t + xi) * (t + xi);
  }
  m.diag[0] -= i2;      // ghost u(-1) = u(0): Neumann at t = 0
  m.diag[n - 1] += i2;  // ghost u(n) = -u(n-1): Dirichlet at t = T
  return m;
}

double degennes_mu(double xi, double T, int n) {
  if (T < 10.0 || n < 200) throw InputError("de Gennes operator needs T >= 10 and n >= 200");
  return tridiag_lowest(degennes_matrix(xi, T, n)).value;
}

Tridiagonal montgomery_matrix(double tau, double T, int n) {
  if (!(T > 0) || n < 3) throw InputError("bad Montgomery discretization");
  const double dt = 2.0 * T / (n + 1), i2 = 1.0 / (dt * dt);
  Tridiagonal m;
  m.diag.resize(n);
  m.off.assign(n - 1, -i2);
  for (int i = 0; i < n; ++i) {
    const double t = -T + (i + 1) * dt;
    const double q = t * t + 2.0 * tau;
    m.diag[i] = 2.0 * i2 + 0.25 * q * q;
  }
  return m;
}

double montgomery_lambda(double tau, double T, int n) {
  if (T < 8.0 || n < 400) throw InputError("Montgomery operator needs T >= 8 and n >= 400");
  return tridiag_lowest(montgomery_matrix(tau, T, n)).value;
}

int montgomery_ground_nodes(double tau, double T, int n) {
  const auto e = tridiag_lowest(montgomery_matrix(tau, T, n));
  double vmax = 0.0;
  for (double x : e.vector) vmax = std::max(vmax, std::abs(x));
  int changes = 0, last = 0;
  for (double x : e.vector) {
    if (std::abs(x) < 1e-8 * vmax) continue;
    const int s = x > 0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

std::pair<double, double> golden_min(const std::function<double(double)>& f, double lo, double hi, double xtol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

namespace {

// Minimise a 1D ground energy over a parameter on grids n0, 2 n0, 4 n0; Richardson on the last two.
SpectralResult refine_min(const std::function<Tridiagonal(double, int)>& op, double lo, double hi, double tol, int n0,
                          double T, double h_of_n(double, int)) {
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  SpectralResult out;
  out.truncation = T;
  std::vector<double> vals, params;
  int n = n0;
  double resid = 0.0;
  for (int level = 0; level < 3; ++level, n *= 2) {
    auto f = [&](double p) { return tridiag_lowest(op(p, n)).value; };
    const auto [p, v] = golden_min(f, lo, hi, std::max(1e-9, 0.1 * tol));
    resid = tridiag_lowest(op(p, n)).residual;
    vals.push_back(v);
    params.push_back(p);
    out.refinement_history.emplace_back(h_of_n(T, n), v);
  }
  out.grid = n / 2;
  // Second-order scheme: (4 v_fine - v_coarse) / 3.
  out.value = (4.0 * vals[2] - vals[1]) / 3.0;
  out.minimizer_param = (4.0 * params[2] - params[1]) / 3.0;
  out.residual = resid;
  const double d1 = std::abs(vals[1] - vals[0]), d2 = std::abs(vals[2] - vals[1]);
  if (!(d2 <= d1 * 0.5 + 1e-12)) {
    out.flagged = true;
    out.note = "refinement not in the asymptotic regime";
  }
  return out;
}

double h_degennes(double T, int n) { return T / n; }
double h_montgomery(double T, int n) { return 2.0 * T / (n + 1); }

}  // namespace

SpectralResult theta0(double tol, int n0) {
  // Potential at T exceeds 50 times the eigenvalue (which is below 1).
  const double T = std::max(10.0, 1.0 + std::sqrt(50.0));
  auto op = [T](double xi, int n) { return degennes_matrix(xi, T, n); };
  return refine_min(op, -2.0, 0.0, tol, n0, T, h_degennes);
}

SpectralResult lambda0(double tol, int n0, double T) {
  if (T < 8.0) throw InputError("Montgomery truncation must be at least 8");
  auto op = [T](double tau, int n) { return montgomery_matrix(tau, T, n); };
  return refine_min(op, -2.0, 1.0, tol, n0, T, h_montgomery);
}

// Two-dimensional -------------------------------------------------------------

SpMat assemble_magnetic(const Grid2D& g, const LinkField2D& links, double coupling, const std::vector<double>& V,
                        const std::vector<double>& extra) {
  if (!links.grid().same_layout(g)) throw InputError("links live on a different grid");
  if (V.size() != g.size() || (!extra.empty() && extra.size() != g.size()))
    throw InputError("potential has wrong size");
  std::vector<int> id(g.size(), -1);
  int n = 0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) id[k] = n++;
  const double ih2 = 1.0 / (g.h() * g.h());
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(5 * static_cast<std::size_t>(n));
  std::vector<double> diag(n, 0.0);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (!g.inside(k)) continue;
      diag[id[k]] += V[k] + (extra.empty() ? 0.0 : extra[k] * ih2);
      auto link = [&](std::size_t q, double theta) {
        const cplx e = std::polar(1.0, -coupling * theta);
        diag[id[k]] += ih2;
        diag[id[q]] += ih2;
        trip.emplace_back(id[k], id[q], -e * ih2);
        trip.emplace_back(id[q], id[k], -std::conj(e) * ih2);
      };
      if (g.has_xlink(i, j)) link(g.index(i + 1, j), links.x(i, j));
      if (g.has_ylink(i, j)) link(g.index(i, j + 1), links.y(i, j));
    }
  for (int r = 0; r < n; ++r) trip.emplace_back(r, r, cplx(diag[r], 0.0));
  SpMat M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

namespace {

using Solver = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

SpMat shifted(const SpMat& M, double s) {
  SpMat I(M.rows(), M.cols());
  I.setIdentity();
  return M - cplx(s, 0.0) * I;
}

bool positive_definite(const Solver& f) {
  const auto d = f.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d[i].real() > 0.0)) return false;
  return true;
}

}  // namespace

EigenPair lowest_eigenpair(const SpMat& M, const EigenOptions& opt) {
  const Eigen::Index n = M.rows();
  EigenPair out;
  if (n == 0) throw InputError("empty operator");
  Solver solver;
  solver.compute(shifted(M, opt.shift));
  if (solver.info() != Eigen::Success || !positive_definite(solver))
    throw NumericalError("shift is not below the spectrum");

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> N(0.0, 1.0);
  const int m_cap = static_cast<int>(std::min<Eigen::Index>(opt.max_lanczos, std::max<Eigen::Index>(2, n)));
  Eigen::VectorXcd ritz;
  double theta_max = 0.0;
  for (int attempt = 0; attempt < 2 && ritz.size() == 0; ++attempt) {
    Eigen::MatrixXcd Q(n, m_cap);
    std::vector<double> alpha, beta;
    Eigen::VectorXcd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q[i] = cplx(N(rng), N(rng));
    q.normalize();
    Q.col(0) = q;
    int m = 0;
    Eigen::VectorXd s_best;
    for (int k = 0; k < m_cap; ++k) {
      Eigen::VectorXcd w = solver.solve(Q.col(k));
      const double a = Q.col(k).dot(w).real();
      alpha.push_back(a);
      // Full reorthogonalisation, applied twice.
      for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).adjoint() * w);
      const double b = w.norm();
      m = k + 1;
      bool done = b < 1e-14 * std::abs(a) || k + 1 == m_cap;
      if ((k + 1) % 5 == 0 || done) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
          T(i, i) = alpha[i];
          if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        theta_max = es.eigenvalues()[m - 1];
        s_best = es.eigenvectors().col(m - 1);
        const double est = std::abs(b * s_best[m - 1]);
        // Relative Ritz convergence for the inverse; the polish below certifies the residual.
        if (est < 1e-10 * theta_max) done = true;
      }
      if (done) break;
      beta.push_back(b);
      Q.col(k + 1) = w / b;
    }
    if (theta_max > 0.0) ritz = Q.leftCols(m) * s_best.head(m).cast<cplx>();
    ++out.restarts;
  }
  if (ritz.size() == 0) throw NumericalError("Lanczos stagnated");
  Eigen::VectorXcd v = ritz.normalized();

  // Polish with shifts just below the Rayleigh quotient.
  double lam = (v.adjoint() * (M * v))(0).real();
  Eigen::VectorXcd r = M * v - lam * v;
  double res = r.norm();
  double scale = 1.0 + std::abs(lam);
  for (int re = 0; re < 6 && res > opt.residual_tol; ++re) {
    const double sig = lam - std::max(2.0 * res, 1e-9 * scale);
    Solver f;
    f.compute(shifted(M, sig));
    if (f.info() != Eigen::Success) break;
    if (!positive_definite(f)) {
      out.converged = false;
      break;
    }
    for (int it = 0; it < 4 && res > opt.residual_tol; ++it) {
      v = f.solve(v).normalized();
      lam = (v.adjoint() * (M * v))(0).real();
      r = M * v - lam * v;
      res = r.norm();
    }
  }
  out.value = lam;
  out.vector = v;
  out.residual = res;
  out.converged = res <= opt.residual_tol;
  return out;
}

Eigen::VectorXd dense_eigenvalues(const SpMat& M) {
  const Eigen::MatrixXcd D = Eigen::MatrixXcd(M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double halfplane_lambda_at(double theta, double L, int n_per_unit, double* residual) {
  const int n1 = static_cast<int>(std::lround(2 * L * n_per_unit)), n2 = static_cast<int>(std::lround(L * n_per_unit));
  const double h = 1.0 / n_per_unit;
  auto g = share(Grid2D::box(n1, n2, h, {-L, 0.0}));
  const double c = std::cos(theta), s = std::sin(theta);
  const LinkField2D A = LinkField2D::from_potential(
      g, [c, s](Point p) { return Point{-0.5 * p.y * p.y * c, -0.5 * p.x * p.x * s}; });
  std::vector<double> extra(g->size(), 0.0);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      double e = 0.0;
      if (i == 0) e += 1.0;
      if (i == n1 - 1) e += 1.0;
      if (j == n2 - 1) e += 1.0;  // x2 = 0 keeps the natural Neumann condition
      extra[g->index(i, j)] = e;
    }
  const SpMat M = assemble_magnetic(*g, A, 1.0, std::vector<double>(g->size(), 0.0), extra);
  EigenOptions eo;
  eo.shift = -1.0;
  const EigenPair ep = lowest_eigenpair(M, eo);
  if (residual) *residual = ep.residual;
  return ep.value;
}

SpectralResult halfplane_lambda(double theta, double L, int n_per_unit) {
  if (!(theta >= 0.0 && theta <= M_PI)) throw InputError("angle must lie in [0, pi]");
  if (L < 8.0) throw InputError("half-plane truncation must be at least 8");
  SpectralResult out;
  out.truncation = L;
  double r1 = 0, r2 = 0;
  const double v1 = halfplane_lambda_at(theta, L, n_per_unit, &r1);
  const double v2 = halfplane_lambda_at(theta, L, 2 * n_per_unit, &r2);
  out.refinement_history = {{1.0 / n_per_unit, v1}, {0.5 / n_per_unit, v2}};
  out.value = (4.0 * v2 - v1) / 3.0;
  out.grid = 2 * n_per_unit;
  out.residual = r2;
  // Truncation sensitivity at the coarse resolution.
  const double vL = halfplane_lambda_at(theta, 1.5 * L, n_per_unit);
  if (std::abs(vL - v1) > 0.01 * std::abs(v1)) {
    out.flagged = true;
    out.note = "value moves by more than 1% under L -> 1.5 L";
  }
  return out;
}

double HalfplaneTable::eval(double th) const {
  if (theta.empty()) throw InputError("empty half-plane table");
  // lambda0 holds only at exactly 0 and pi: the limit theta -> 0+ differs, so the
  // tabulated end values are held constant outside the table nodes.
  if (th <= 0.0 || th >= M_PI) return lambda0;
  if (th <= theta.front()) return value.front();
  if (th >= theta.back()) return value.back();
  if (theta.size() == 1) return value.front();
  const std::vector<double>& x = theta;
  const std::vector<double>& y = value;
  const std::size_t n = x.size();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), th) - x.begin());
  k = std::clamp<std::size_t>(k, 1, n - 1);
  // Monotone cubic (Fritsch-Carlson) slopes.
  std::vector<double> d(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) m[i] = (d[i - 1] * d[i] <= 0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      m[i] = m[i + 1] = 0.0;
      continue;
    }
    const double a = m[i] / d[i], b = m[i + 1] / d[i], s = a * a + b * b;
    if (s > 9.0) {
      const double t = 3.0 / std::sqrt(s);
      m[i] = t * a * d[i];
      m[i + 1] = t * b * d[i];
    }
  }
  const double hseg = x[k] - x[k - 1], t = (th - x[k - 1]) / hseg;
  const double h00 = (2 * t - 3) * t * t + 1, h10 = ((t - 2) * t + 1) * t, h01 = (3 - 2 * t) * t * t,
               h11 = (t - 1) * t * t;
  return h00 * y[k - 1] + h10 * hseg * m[k - 1] + h01 * y[k] + h11 * hseg * m[k];
}

HalfplaneTable build_halfplane_table(double L, int n_per_unit, double lambda0_value) {
  HalfplaneTable t;
  t.lambda0 = lambda0_value > 0 ? lambda0_value : lambda0().value;
  for (int k = 1; k <= 11; ++k) {
    const double th = k * M_PI / 12.0;
    // lambda(pi - theta) = lambda(theta) by reflection x1 -> -x1.
    if (k > 6) {
      t.theta.push_back(th);
      t.value.push_back(t.value[12 - k - 1]);
      continue;
    }
    t.theta.push_back(th);
    t.value.push_back(halfplane_lambda(th, L, n_per_unit).value);
  }
  return t;
}

void write_halfplane_csv(const HalfplaneTable& t, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open " + path);
  os.precision(15);
  os << "theta,value\n0," << t.lambda0 << '\n';
  for (std::size_t k = 0; k < t.theta.size(); ++k) os << t.theta[k] << ',' << t.value[k] << '\n';
}

HalfplaneTable read_halfplane_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path);
  std::string line;
  std::getline(is, line);
  HalfplaneTable t;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double th = 0, v = 0;
    char comma = 0;
    std::istringstream ss(line);
    if (!(ss >> th >> comma >> v) || comma != ',') throw InputError("bad row in " + path + ": " + line);
    if (first) {
      t.lambda0 = v;
      first = false;
    } else {
      t.theta.push_back(th);
      t.value.push_back(v);
    }
  }
  if (t.theta.empty()) throw InputError(path + " holds no table rows");
  for (std::size_t k = 1; k < t.theta.size(); ++k)
    if (!(t.theta[k] > t.theta[k - 1])) throw InputError(path + ": angles must increase");
  return t;
}

SpMat mu1_operator(double kappa, double H, const ScalarField2D& a, const LinkField2D& F) {
  if (!a.grid().same_layout(F.grid())) throw InputError("a and F live on different grids");
  std::vector<double> V(a.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) V[k] = -kappa * kappa * a[k];
  return assemble_magnetic(F.grid(), F, kappa * H, V);
}

SpectralResult mu1(double kappa, double H, const ScalarField2D& a, const LinkField2D& F, double tol,
                   Eigen::VectorXcd* eigvec) {
  if (!(kappa > 0.0) || !(H >= 0.0)) throw InputError("mu1 needs kappa > 0 and H >= 0");
  const SpMat M = mu1_operator(kappa, H, a, F);
  double sup_a = -1e300;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.grid().inside(k)) sup_a = std::max(sup_a, a[k]);
  EigenOptions eo;
  eo.shift = -kappa * kappa * sup_a - 1.0;
  eo.residual_tol = tol;
  EigenPair ep = lowest_eigenpair(M, eo);
  if (!ep.converged) {
    eo.seed += 101;
    EigenPair retry = lowest_eigenpair(M, eo);
    if (retry.residual < ep.residual) ep = retry;
  }
  SpectralResult out;
  out.value = ep.value;
  out.residual = ep.residual;
  out.grid = a.grid().nx();
  out.refinement_history = {{a.grid().h(), ep.value}};
  if (!ep.converged) {
    out.flagged = true;
    out.note = "eigen residual above tolerance";
  }
  if (eigvec) *eigvec = ep.vector;
  return out;
}

}  // namespace pgl
