#include "pgl/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace pgl {

namespace {

constexpr double kSmallA = 1e-8;

void check_same(const ScalarField2D& a, const ScalarField2D& B0) {
  if (!a.grid().same_layout(B0.grid())) throw InputError("a and B0 live on different grids");
}

void check_kh(double kappa, double H) {
  if (!(kappa > 0.0) || !(H > 0.0)) throw InputError("kappa and H must be positive");
}

// Simpson weights on n intervals (n even), normalised to sum to 1.
std::vector<double> simpson_weights(int n) {
  if (n < 2 || n % 2) throw InputError("Simpson rule needs an even number of intervals");
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  for (auto& v : w) v /= 3.0 * n;
  return w;
}

}  // namespace

double leading_density(double a, double B0, double sigma, const FhatTable& fhat) {
  if (a <= 0.0) return 0.5 * a * a;
  if (a < kSmallA) return 0.5 * a * a;  // continuous limit of the f-hat saturation
  const double arg = sigma * std::abs(B0) / a;
  return a * a * (arg >= 1.0 ? 0.5 : fhat_eval(fhat, arg));
}

LeadingEnergyReport leading_energy(const ScalarField2D& a, const ScalarField2D& B0, double kappa, double H,
                                   const FhatTable& fhat) {
  check_same(a, B0);
  check_kh(kappa, H);
  LeadingEnergyReport r;
  r.sigma = H / kappa;
  SublevelMasks m = sublevel_masks(a);
  ScalarField2D dens(a.grid_ptr());
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.grid().inside(k)) dens[k] = leading_density(a[k], B0[k], r.sigma, fhat);
  const double k2 = kappa * kappa;
  r.bulk_pos = k2 * integrate(dens, m.pos);
  r.bulk_nonpos = k2 * integrate(dens, m.nonpos);
  r.leading = r.bulk_pos + r.bulk_nonpos;
  r.pos = std::move(m.pos);
  r.nonpos = std::move(m.nonpos);
  return r;
}

double local_leading_energy(const Mask& D, const ScalarField2D& a, const ScalarField2D& B0, double kappa, double H,
                            const FhatTable& fhat) {
  check_same(a, B0);
  check_kh(kappa, H);
  if (D.size() != a.size()) throw InputError("mask has wrong size");
  ScalarField2D dens(a.grid_ptr());
  const double sigma = H / kappa;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.grid().inside(k) && D[k]) dens[k] = leading_density(a[k], B0[k], sigma, fhat);
  return kappa * kappa * integrate(dens, D);
}

double psi4_prediction(const Mask& D, const ScalarField2D& a, const ScalarField2D& B0, double kappa, double H,
                       const FhatTable& fhat) {
  check_same(a, B0);
  check_kh(kappa, H);
  if (D.size() != a.size()) throw InputError("mask has wrong size");
  ScalarField2D dens(a.grid_ptr());
  Mask m(a.size(), 0);
  const double sigma = H / kappa;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.grid().inside(k) && D[k] && a[k] > 0.0) {
      m[k] = 1;
      // 2 fhat - 1 = 0 in the saturated regime; f-hat <= 1/2 makes every term nonnegative.
      const double fh = leading_density(a[k], B0[k], sigma, fhat) / (a[k] * a[k]);
      dens[k] = a[k] * a[k] * std::max(0.0, 1.0 - 2.0 * fh);
    }
  return integrate(dens, m);
}

EnergyComparison compare_energy(const std::function<GLData(double)>& setup, const std::vector<double>& kappa_list,
                                double sigma, const FhatTable& fhat, const SolverOptions& opt, double noise) {
  if (kappa_list.empty()) throw InputError("kappa list is empty");
  for (std::size_t i = 1; i < kappa_list.size(); ++i)
    if (!(kappa_list[i] > kappa_list[i - 1])) throw InputError("kappa list must be increasing");
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
  EnergyComparison out;
  for (double kappa : kappa_list) {
    const GLData d = setup(kappa);
    const double H = sigma * kappa;
    const GLState s = minimize_frozen(d, kappa, H, nullptr, opt);
    EnergyComparisonRow row;
    row.kappa = kappa;
    row.H = H;
    row.E_min = s.energy;
    row.E_leading = leading_energy(d.a, d.B0, kappa, H, fhat).leading;
    row.rel_dev = std::abs(row.E_min - row.E_leading) / (kappa * kappa);
    row.converged = s.converged;
    if (!out.rows.empty() && row.rel_dev > out.rows.back().rel_dev + noise) out.nonincreasing = false;
    out.rows.push_back(row);
  }
  return out;
}

void write_comparison_csv(const EnergyComparison& c, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open " + path);
  os.precision(12);
  os << "kappa,H,E_min,E_leading,rel_dev\n";
  for (const auto& r : c.rows) os << r.kappa << ',' << r.H << ',' << r.E_min << ',' << r.E_leading << ',' << r.rel_dev << '\n';
}

double periodic_average(const PeriodicFunction& phi, double T1, double T2, int n) {
  if (!(T1 > 0.0) || !(T2 > 0.0)) throw InputError("periods must be positive");
  const std::vector<double> w = simpson_weights(n);
  std::vector<double> terms;
  terms.reserve(w.size() * w.size());
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) terms.push_back(w[i] * w[j] * phi(T1 * i / n, T2 * j / n));
  return pairwise_sum(terms);
}

ScalarField2D periodic_average_field(const std::function<double(double, double, Point)>& phi, GridPtr grid, double T1,
                                     double T2, int n) {
  ScalarField2D out(grid);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (!grid->inside(k)) continue;
    const Point x = grid->node(k);
    out[k] = periodic_average([&](double t1, double t2) { return phi(t1, t2, x); }, T1, T2, n);
  }
  return out;
}

double oscillating_integral(const PeriodicFunction& phi, double T1, double T2, const Box& D, double M) {
  if (!(M > 0.0)) throw InputError("oscillation scale must be positive");
  if (!(D.hi.x > D.lo.x) || !(D.hi.y > D.lo.y)) throw InputError("empty integration box");
  // 4-point Gauss-Legendre on panels of at most a quarter period (in x) each.
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  const int px = std::max(4, static_cast<int>(std::ceil((D.hi.x - D.lo.x) * M / T1 * 8.0)));
  const int py = std::max(4, static_cast<int>(std::ceil((D.hi.y - D.lo.y) * M / T2 * 8.0)));
  const double hx = (D.hi.x - D.lo.x) / px, hy = (D.hi.y - D.lo.y) / py;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(px) * py * 16);
  for (int j = 0; j < py; ++j)
    for (int i = 0; i < px; ++i)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) {
          const double x = D.lo.x + hx * (i + 0.5 + 0.5 * gx[c]);
          const double y = D.lo.y + hy * (j + 0.5 + 0.5 * gx[b]);
          terms.push_back(0.25 * hx * hy * gw[b] * gw[c] * phi(M * x, M * y));
        }
  return pairwise_sum(terms);
}

HomogenizationRate homogenization_rate(const PeriodicFunction& phi, double T1, double T2, const Box& D,
                                       const std::vector<double>& Ms) {
  if (Ms.size() < 2) throw InputError("need at least two oscillation scales");
  HomogenizationRate r;
  const double mean = periodic_average(phi, T1, T2);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double M : Ms) {
    const double e = std::abs(oscillating_integral(phi, T1, T2, D, M) - D.area() * mean);
    r.M.push_back(M);
    r.error.push_back(e);
    const double lx = std::log(M), ly = std::log(std::max(e, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(Ms.size());
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return r;
}

double HomogenizedCase::pinning(Point x, double kappa) const {
  const double s = std::sqrt(kappa);
  switch (kind) {
    case Kind::KappaIndependent:
      return a(x);
    case Kind::Oscillating:
      return alpha(s * x.x, s * x.y);
    case Kind::ShiftedPeriodic:
      return a(x) + alpha(s * x.x, s * x.y);
  }
  return 0.0;
}

namespace {

// The cell average at x depends on x only through (a(x), B0(x)); repeated pairs reuse it.
ScalarField2D averaged_by_value(const ScalarField2D& a, const ScalarField2D& B,
                                const std::function<double(double, double)>& average) {
  std::map<std::pair<double, double>, double> memo;
  ScalarField2D out(a.grid_ptr());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!a.grid().inside(k)) continue;
    const auto key = std::make_pair(a[k], B[k]);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, average(a[k], B[k])).first;
    out[k] = it->second;
  }
  return out;
}

}  // namespace

double homogenized_leading(const HomogenizedCase& c, GridPtr grid, double kappa, const FhatTable& fhat, int n) {
  if (!(kappa > 0.0)) throw InputError("kappa must be positive");
  if (!c.B0) throw InputError("homogenized case needs B0");
  const double k2 = kappa * kappa;
  switch (c.kind) {
    case HomogenizedCase::Kind::KappaIndependent: {
      const ScalarField2D a = ScalarField2D::sample(grid, c.a);
      const ScalarField2D B = ScalarField2D::sample(grid, c.B0);
      return leading_energy(a, B, kappa, c.sigma * kappa, fhat).leading;
    }
    case HomogenizedCase::Kind::Oscillating: {
      if (!c.alpha) throw InputError("oscillating case needs alpha");
      const ScalarField2D B = ScalarField2D::sample(grid, c.B0);
      const ScalarField2D phi_pos = averaged_by_value(ScalarField2D(grid, 0.0), B, [&](double, double b) {
        return periodic_average(
            [&](double t1, double t2) {
              const double al = c.alpha(t1, t2);
              return al > 0.0 ? leading_density(al, b, c.sigma, fhat) : 0.0;
            },
            c.T1, c.T2, n);
      });
      const double phi_neg = periodic_average(
          [&](double t1, double t2) {
            const double al = c.alpha(t1, t2);
            return al < 0.0 ? al * al : 0.0;
          },
          c.T1, c.T2, n);
      const double area = integrate(ScalarField2D(grid, 1.0));
      return k2 * integrate(phi_pos) + 0.5 * k2 * area * phi_neg;
    }
    case HomogenizedCase::Kind::ShiftedPeriodic: {
      if (!c.alpha || !c.a) throw InputError("shifted-periodic case needs a and alpha");
      const ScalarField2D a = ScalarField2D::sample(grid, c.a);
      const ScalarField2D B = ScalarField2D::sample(grid, c.B0);
      const ScalarField2D phi = averaged_by_value(a, B, [&](double av, double b) {
        return periodic_average(
            [&](double t1, double t2) { return leading_density(av + c.alpha(t1, t2), b, c.sigma, fhat); }, c.T1, c.T2, n);
      });
      return k2 * integrate(phi);
    }
  }
  return 0.0;
}

double direct_leading(const HomogenizedCase& c, GridPtr grid, double kappa, const FhatTable& fhat) {
  const ScalarField2D a = ScalarField2D::sample(grid, [&](Point x) { return c.pinning(x, kappa); });
  const ScalarField2D B = ScalarField2D::sample(grid, c.B0);
  return leading_energy(a, B, kappa, c.sigma * kappa, fhat).leading;
}

DiskBound kappa_independent_bound(const ScalarField2D& a, const ScalarField2D& B0, double lambda_min,
                                  const FhatTable& fhat) {
  check_same(a, B0);
  const Grid2D& g = a.grid();
  double abar = -std::numeric_limits<double>::infinity(), bsup = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) {
      abar = std::max(abar, a[k]);
      bsup = std::max(bsup, std::abs(B0[k]));
    }
  if (!(abar > 0.0) || !(bsup > 0.0)) throw InputError("need {a > 0} and B0 not identically zero");
  DiskBound out;
  out.a0 = 0.5 * abar;
  out.rho0 = 0.5 * bsup;
  // Nodes outside the good set, plus the outside of the domain, bound each disk radius.
  std::vector<Point> bad;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!g.inside(k) || a[k] <= out.a0 || std::abs(B0[k]) <= out.rho0 || g.is_boundary(k)) bad.push_back(g.node(k));
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside(k) || a[k] <= out.a0 || std::abs(B0[k]) <= out.rho0) continue;
    const Point p = g.node(k);
    double r = std::numeric_limits<double>::infinity();
    for (const Point& q : bad) r = std::min(r, std::hypot(p.x - q.x, p.y - q.y));
    r -= g.h();  // keep a node spacing of margin
    if (r > out.r0) {
      out.r0 = r;
      out.center = p;
    }
  }
  if (out.r0 <= 0.0) throw NumericalError("no disk fits in {a > a0} and {|B0| > rho0}");
  out.constant = M_PI * out.r0 * out.r0 * out.a0 * out.a0 * fhat_eval(fhat, out.rho0 * lambda_min / abar);
  return out;
}

}  // namespace pgl
