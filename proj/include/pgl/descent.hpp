#pragma once

#include <array>
#include <functional>

#include "pgl/fields.hpp"

namespace pgl {

/**
 * E(u) = sum_links w |u(j+e) E_e - u(j)|^2 + sum_nodes c (alpha - |u|^2)^2,
 * with E_e = exp(-i phase_e).  Clamped nodes are held at zero but still
 * contribute their c alpha^2 potential term.
 */
class QuarticFunctional {
 public:
  QuarticFunctional(GridPtr grid, double link_weight, const LinkField2D& links, double coupling,
                    std::vector<double> c, std::vector<double> alpha, Mask clamped = {});

  const Grid2D& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Mask& clamped() const { return clamped_; }
  bool free_node(std::size_t k) const { return grid_->inside(k) && !clamped_[k]; }

  double energy(const std::vector<cplx>& u) const;
  /// Energy split into link (kinetic) and node (potential) parts.
  std::pair<double, double> energy_parts(const std::vector<cplx>& u) const;
  /// Real-pair gradient dE/dRe + i dE/dIm; zero on clamped or outside nodes.
  void gradient(const std::vector<cplx>& u, std::vector<cplx>& g) const;
  /// Coefficients of t -> E(u + t d), lowest order first.
  std::array<double, 5> line_polynomial(const std::vector<cplx>& u, const std::vector<cplx>& d) const;

  /// Copy of u with clamped/outside nodes zeroed.
  void project(std::vector<cplx>& u) const;

 private:
  GridPtr grid_;
  double w_;
  std::vector<cplx> ex_, ey_;
  std::vector<double> c_, alpha_;
  Mask clamped_;
};

/// Global minimiser over t in R of a quartic with positive leading coefficient (or a convex quadratic).
double argmin_quartic(const std::array<double, 5>& p);
double eval_poly(const std::array<double, 5>& p, double t);

struct DescentOptions {
  double tol = 1e-6;        // stop when max |g| / grad_scale <= tol
  double grad_scale = 1.0;  // converts the raw gradient to a residual density
  int max_iter = 20000;
  // Optional exit once the energy drop over stall_window iterations is below stall_rtol * |E|.
  int stall_window = 0;
  double stall_rtol = 0.0;
};

struct DescentResult {
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<double> trace;  // energy per iteration
};

double max_residual(const std::vector<cplx>& g, double scale);

/// Polak-Ribiere+ nonlinear CG with exact quartic line search.
DescentResult minimize_ncg(const QuarticFunctional& f, std::vector<cplx>& u, const DescentOptions& opt);

/// Barzilai-Borwein gradient steps with monotone backtracking.
DescentResult minimize_bb(const QuarticFunctional& f, std::vector<cplx>& u, const DescentOptions& opt);

}  // namespace pgl
