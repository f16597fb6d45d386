#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <limits>
#include <string>

#include "pgl/fields.hpp"

namespace pgl {

struct SpectralResult {
  double value = 0.0;
  double minimizer_param = std::numeric_limits<double>::quiet_NaN();  // xi0 or tau0 when applicable
  double truncation = 0.0;
  int grid = 0;
  double residual = 0.0;  // ||(Op - value) v|| / ||v|| at the finest level
  std::vector<std::pair<double, double>> refinement_history;  // (h, value)
  bool flagged = false;
  std::string note;
};

// One-dimensional model operators ------------------------------------------

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1
};

struct TridiagEigen {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
};

/// Lowest eigenpair of a symmetric tridiagonal matrix (Sturm bisection + inverse iteration).
TridiagEigen tridiag_lowest(const Tridiagonal& t);

/// -d^2/dt^2 + (t+xi)^2 on [0,T]: cell-centred nodes, Neumann at 0, Dirichlet at T.
Tridiagonal degennes_matrix(double xi, double T, int n);
double degennes_mu(double xi, double T = 10.0, int n = 400);

/// -d^2/dt^2 + (t^2 + 2 tau)^2 / 4 on [-T,T] with Dirichlet ends.
Tridiagonal montgomery_matrix(double tau, double T, int n);
double montgomery_lambda(double tau, double T = 8.0, int n = 400);
/// Sign changes of the ground state (0 for a nodeless state).
int montgomery_ground_nodes(double tau, double T = 8.0, int n = 400);

/// Golden-section minimiser of a unimodal function on [lo, hi].
std::pair<double, double> golden_min(const std::function<double(double)>& f, double lo, double hi, double xtol);

/// Theta0 = min over xi of degennes_mu, with refinement history and Richardson value.
SpectralResult theta0(double tol = 1e-6, int n0 = 400);
/// lambda0 = inf over tau of montgomery_lambda.
SpectralResult lambda0(double tol = 1e-6, int n0 = 400, double T = 8.0);

// Two-dimensional magnetic operators ---------------------------------------

using SpMat = Eigen::SparseMatrix<cplx>;

/**
 * Hermitian matrix of sum_links |u(j+e) exp(-i c link) - u(j)|^2 / h^2
 * + sum_nodes (V + extra/h^2) |u|^2, indexed over inside nodes in order.
 * `extra` counts Dirichlet ghost neighbours per node (may be empty).
 */
SpMat assemble_magnetic(const Grid2D& g, const LinkField2D& links, double coupling, const std::vector<double>& V,
                        const std::vector<double>& extra = {});

struct EigenOptions {
  double shift = 0.0;           // strictly below the spectrum
  double residual_tol = 1e-8;
  int max_lanczos = 120;
  std::uint64_t seed = 7;
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;
  double residual = 0.0;
  bool converged = false;
  int restarts = 0;
};

/// Lowest eigenpair by shift-invert Lanczos (sparse LDLT solves) and shifted inverse-iteration polish.
EigenPair lowest_eigenpair(const SpMat& M, const EigenOptions& opt);

/// Dense reference eigenvalues (ascending); intended for small grids only.
Eigen::VectorXd dense_eigenvalues(const SpMat& M);

/// Lowest eigenvalue of the half-plane operator with field x2 cos(theta) - x1 sin(theta),
/// truncated to (-L, L) x (0, L): Neumann on x2 = 0, Dirichlet elsewhere.
double halfplane_lambda_at(double theta, double L, int n_per_unit, double* residual = nullptr);
SpectralResult halfplane_lambda(double theta, double L = 8.0, int n_per_unit = 10);

/// Table of lambda(R^2_+, theta) on theta = k pi/12, k = 1..11, with monotone cubic interpolation.
struct HalfplaneTable {
  std::vector<double> theta;
  std::vector<double> value;
  double lambda0 = 0.0;
  double eval(double th) const;  // 0 and pi map to lambda0
};
HalfplaneTable build_halfplane_table(double L = 12.0, int n_per_unit = 10, double lambda0_value = 0.0);
/// CSV rows theta,value with a first row 0,lambda0.
void write_halfplane_csv(const HalfplaneTable& t, const std::string& path);
HalfplaneTable read_halfplane_csv(const std::string& path);

/// Lowest eigenvalue of -(grad - i kappa H F)^2 - kappa^2 a, Neumann on the grid boundary.
SpectralResult mu1(double kappa, double H, const ScalarField2D& a, const LinkField2D& F, double tol = 1e-8,
                   Eigen::VectorXcd* eigvec = nullptr);
SpMat mu1_operator(double kappa, double H, const ScalarField2D& a, const LinkField2D& F);

}  // namespace pgl
