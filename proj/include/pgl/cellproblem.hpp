#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pgl/descent.hpp"

namespace pgl {

enum class BoundaryCondition { Dirichlet, Neumann };

/// Constant-field reference problem on Q_R = [-R/2, R/2]^2:
/// F(u) = int b |(grad - i zeta A0) u|^2 + 1/2 (alpha - |u|^2)^2.
struct CellProblem {
  double b = 0.5;
  double alpha = 1.0;
  int zeta = 1;
  double R = 10.0;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  int resolution = 64;  // nodes per side

  void validate() const;
  GridPtr grid() const;
};

/// Nodes per side resolving both the core length sqrt(b) and the unit magnetic length.
int default_resolution(double b, double R);

/// Outer ring of nodes held at zero for the Dirichlet problem.
Mask dirichlet_ring(const Grid2D& g);

QuarticFunctional cell_functional(const CellProblem& p, const GridPtr& grid);

double cell_energy(const ComplexField2D& u, const CellProblem& p);

struct CellMinimum {
  ComplexField2D u;
  double energy = 0.0;
  double residual = 0.0;
  bool converged = false;
  bool stalled = false;
  int iterations = 0;
};

struct CellOptions {
  int seeds = 4;
  double tol = 1e-6;  // Euler-Lagrange residual density
  int max_iter = 20000;
  int stall_window = 400;   // energy-stagnation exit, see DescentOptions
  double stall_rtol = 1e-7;
  std::uint64_t rng_seed = 12345;
  const ComplexField2D* extra_start = nullptr;  // optional additional trial state on the same grid
  bool multilevel = true;  // relax on halved grids first, then prolong
};

/// Covariant bilinear value of a symmetric-gauge cell state at y (clamped to the cell square).
cplx sample_cell_state(const ComplexField2D& u, Point y, int zeta);

/// Gauge-covariant bilinear transfer of a cell state between grids of the same square.
ComplexField2D prolong_cell_state(const ComplexField2D& coarse, const GridPtr& fine, int zeta);

CellMinimum minimize_cell(const CellProblem& p, const CellOptions& opt = {});

struct FhatEstimate {
  double value = 0.0;
  double R_used = 0.0;
  double bound = 0.0;    // size of the extrapolation correction, a measured gap
  bool capped = false;   // the R schedule ended before sqrt(b)/R <= tol
  std::vector<std::pair<double, double>> history;  // (R, e_D/R^2)
};

struct FhatOptions {
  double R_min = 12.0;
  double R_max = 48.0;
  double growth = 1.5;
  int seeds = 4;
  double descent_tol = 1e-5;
  std::uint64_t rng_seed = 12345;
};

FhatEstimate fhat_estimate(double b, double tol, const FhatOptions& opt = {});

/// e_D/R^2 at the given R values followed by first-order extrapolation in 1/R on the last two.
FhatEstimate fhat_from_radii(double b, const std::vector<double>& radii, const FhatOptions& opt = {});

/// (lhs, rhs) = (e(b,R,alpha), alpha^2 e(b/alpha,R,1)), each minimised independently.
std::pair<double, double> scaling_check(double b, double R, double alpha, const CellOptions& opt = {});

struct FhatTable {
  std::vector<double> b;
  std::vector<double> value;
  std::vector<double> R_used;
  std::vector<double> bound;
};

/// Default grid: 40 log-spaced points in [0.02, 1].
std::vector<double> default_b_grid(int n = 40, double lo = 0.02, double hi = 1.0);

double fhat_eval(const FhatTable& t, double b);

/// Small-b asymptotic form (b/2) ln(1/b).
double fhat_small_b(double b);

struct TableOptions {
  double R = 16.0;
  int seeds = 2;
  double descent_tol = 1e-5;
  std::uint64_t rng_seed = 2024;
  bool extrapolate = true;   // second run at 1.5 R and extrapolate in 1/R
  bool monotone_seeding = true;
};

/// Table by cell minimization; each b also tries the minimiser from the next larger b as a start.
FhatTable build_fhat_table(const std::vector<double>& b_grid, const TableOptions& opt = {});

void write_fhat_csv(const FhatTable& t, const std::string& path);
FhatTable read_fhat_csv(const std::string& path);
void validate_table(const FhatTable& t);

}  // namespace pgl
