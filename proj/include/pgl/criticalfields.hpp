#pragma once

#include <optional>
#include <string>

#include "pgl/glsolver.hpp"
#include "pgl/spectral.hpp"

namespace pgl {

/// A point of {B0 = 0} found on the link from node i to node j.
struct GammaPoint {
  Point x;
  Point grad;             // central-difference gradient, interpolated along the link
  double grad_norm = 0.0;
  double B_near = 0.0;    // B0 at the nearer link end
  std::size_t i = 0, j = 0;
  double t = 0.0;         // x = (1 - t) node(i) + t node(j)

  /// Linear interpolation of a nodal field at x.
  double sample(const ScalarField2D& f) const { return (1.0 - t) * f[i] + t * f[j]; }
};

struct GammaCrossing {
  GammaPoint point;
  Point normal;        // outward unit normal
  double theta = 0.0;  // angle between grad B0 and -normal
};

struct GammaData {
  std::vector<GammaPoint> points;
  std::vector<GammaCrossing> crossings;
  bool violation = false;  // |B0| + |grad B0| nearly zero at some node
  bool empty() const { return points.empty(); }
};

/// Zero crossings of B0 along links; boundary crossings on links between non-corner boundary nodes.
GammaData gamma_extract(const ScalarField2D& B0);

/// Nodal gradient by central differences (one-sided next to the boundary).
std::pair<ScalarField2D, ScalarField2D> nodal_gradient(const ScalarField2D& f);

/// Theta0, lambda0 and the half-plane table used by the critical-field formulas.
struct SpectralConstants {
  double theta0 = 0.0;
  double lambda0 = 0.0;
  HalfplaneTable halfplane;
  std::string source;  // "computed" or the cache path
};

/// Computes the constants, or reads the half-plane table from `cache_csv` when that file exists.
/// A computed table is written to `cache_csv` if the path is nonempty.
SpectralConstants spectral_constants(const std::string& cache_csv = "");

/// min(inf (sigma |B0| - a), inf over the boundary of (Theta0 sigma |B0| - a)); requires B0 without zeros.
double lambda1(const ScalarField2D& B0, const ScalarField2D& a, double sigma, double theta0);

/// min over Gamma of lambda0 (s |grad B0|)^{2/3} - a and over crossings of lambda(theta) (s |grad B0|)^{2/3} - a.
double lambda1_hat(const GammaData& gamma, const ScalarField2D& a, double sigma_hat, const SpectralConstants& sc);

/// min(lambda0^{3/2} min |grad B0|, min over crossings of lambda(theta)^{3/2} |grad B0|).
double alpha1(const GammaData& gamma, const SpectralConstants& sc);

enum class FieldCase { NonVanishing, Vanishing };

struct HC3Formula {
  double value = 0.0;
  FieldCase field_case = FieldCase::NonVanishing;
  double error_scale = 0.0;      // kappa^{1/2} or kappa^{7/4}
  bool no_superconductivity = false;
  bool boundary_attains = false;  // the boundary supremum is the larger one
  Point argmax;
};

/// Leading term of H_C3; `gamma` selects the vanishing-field formula when it holds points.
HC3Formula hc3_formula(const ScalarField2D& a, const ScalarField2D& B0, double kappa, const GammaData* gamma,
                       const SpectralConstants& sc);

struct HC3Bracket {
  double lo = 0.0;
  double hi = 0.0;
  double mu_lo = 0.0;
  double mu_hi = 0.0;
  int eigensolves = 0;
  bool expanded = false;
  double mid() const { return 0.5 * (lo + hi); }
};

/// Bisection on the sign of mu1(kappa, H) down to width tol * kappa.
HC3Bracket hc3_empirical_local(double kappa, const ScalarField2D& a, const LinkField2D& F, double H_lo, double H_hi,
                               double tol = 1e-3);

struct BreakdownPoint {
  double H = 0.0;
  double psi_l2 = 0.0;
  bool converged = false;
};

struct BreakdownScan {
  double H_break = 0.0;
  bool found = false;  // false: no normal minimiser on the grid and H_break is its top
  std::vector<BreakdownPoint> points;
};

/// First H on the increasing grid whose frozen minimiser has ||psi||_2 <= tol.
BreakdownScan breakdown_scan(const GLData& d, double kappa, const std::vector<double>& H_grid, double tol,
                             const SolverOptions& opt = {});

struct CriticalFieldReport {
  double kappa = 0.0;
  FieldCase field_case = FieldCase::NonVanishing;
  double formula_value = 0.0;
  double error_scale = 0.0;
  double H_lo = 0.0;
  double H_hi = 0.0;
  bool boundary_attains = false;
  double theta0 = 0.0;
  double lambda0 = 0.0;
  std::string spectral_source;
};

}  // namespace pgl
