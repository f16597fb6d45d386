#pragma once

#include <functional>
#include <string>

#include "pgl/glsolver.hpp"

namespace pgl {

struct LeadingEnergyReport {
  double leading = 0.0;
  double bulk_pos = 0.0;     // kappa^2 int_{a>0} a^2 fhat(sigma |B0| / a)
  double bulk_nonpos = 0.0;  // kappa^2 / 2 int_{a<=0} a^2
  Mask pos;
  Mask nonpos;
  double sigma = 0.0;
};

/// Pointwise leading density a^2 fhat(sigma |B0| / a) for a > 0 and a^2 / 2 otherwise.
double leading_density(double a, double B0, double sigma, const FhatTable& fhat);

LeadingEnergyReport leading_energy(const ScalarField2D& a, const ScalarField2D& B0, double kappa, double H,
                                   const FhatTable& fhat);

double local_leading_energy(const Mask& D, const ScalarField2D& a, const ScalarField2D& B0, double kappa, double H,
                            const FhatTable& fhat);

/// Predicted int_D |psi|^4 = -int_{D, a>0} a^2 (2 fhat(sigma |B0| / a) - 1).
double psi4_prediction(const Mask& D, const ScalarField2D& a, const ScalarField2D& B0, double kappa, double H,
                       const FhatTable& fhat);

struct EnergyComparisonRow {
  double kappa = 0.0;
  double H = 0.0;
  double E_min = 0.0;
  double E_leading = 0.0;
  double rel_dev = 0.0;  // |E_min - E_leading| / kappa^2
  bool converged = false;
};

struct EnergyComparison {
  std::vector<EnergyComparisonRow> rows;
  bool nonincreasing = true;  // rel_dev nonincreasing within `noise`
};

/// Frozen-potential minimum against the leading term along kappa_list at H = sigma kappa.
/// `setup(kappa)` builds the fields on a grid suited to that kappa.
EnergyComparison compare_energy(const std::function<GLData(double)>& setup, const std::vector<double>& kappa_list,
                                double sigma, const FhatTable& fhat, const SolverOptions& opt = {},
                                double noise = 1e-3);

void write_comparison_csv(const EnergyComparison& c, const std::string& path);

using PeriodicFunction = std::function<double(double, double)>;

/// Mean of phi over one period cell [0,T1] x [0,T2] (composite Simpson, n intervals per direction).
double periodic_average(const PeriodicFunction& phi, double T1, double T2, int n = 256);

/// x -> mean over t of phi(t, x), sampled on the grid.
ScalarField2D periodic_average_field(const std::function<double(double, double, Point)>& phi, GridPtr grid, double T1,
                                     double T2, int n = 256);

struct Box {
  Point lo;
  Point hi;
  double area() const { return (hi.x - lo.x) * (hi.y - lo.y); }
};

/// int_D phi(M x) dx by composite Gauss-Legendre panels resolving the oscillation.
double oscillating_integral(const PeriodicFunction& phi, double T1, double T2, const Box& D, double M);

struct HomogenizationRate {
  std::vector<double> M;
  std::vector<double> error;  // |int_D phi(Mx) - |D| phibar|
  double slope = 0.0;         // least-squares slope of log error against log M
};

HomogenizationRate homogenization_rate(const PeriodicFunction& phi, double T1, double T2, const Box& D,
                                       const std::vector<double>& Ms);

/// Pinning families of the homogenization examples.
struct HomogenizedCase {
  enum class Kind { KappaIndependent, Oscillating, ShiftedPeriodic };
  Kind kind = Kind::Oscillating;
  PeriodicFunction alpha;           // periodic profile (Oscillating, ShiftedPeriodic)
  double T1 = 1.0, T2 = 1.0;
  std::function<double(Point)> a;   // kappa-independent part (KappaIndependent, ShiftedPeriodic)
  std::function<double(Point)> B0;
  double sigma = 0.5;

  /// a(x, kappa) for this family.
  double pinning(Point x, double kappa) const;
};

/// Homogenized leading term on the grid's domain (kappa^2 times the averaged integrals).
double homogenized_leading(const HomogenizedCase& c, GridPtr grid, double kappa, const FhatTable& fhat, int n = 256);

/// leading_energy with a(x, kappa) sampled directly on the grid.
double direct_leading(const HomogenizedCase& c, GridPtr grid, double kappa, const FhatTable& fhat);

struct DiskBound {
  Point center;
  double r0 = 0.0;
  double a0 = 0.0;
  double rho0 = 0.0;
  double constant = 0.0;  // pi r0^2 a0^2 fhat(rho0 lambda_min / abar)
};

/// A disk inside {a > a0} and {|B0| > rho0} (a0, rho0 at half the sup) and the resulting lower-bound constant.
DiskBound kappa_independent_bound(const ScalarField2D& a, const ScalarField2D& B0, double lambda_min,
                                  const FhatTable& fhat);

}  // namespace pgl
