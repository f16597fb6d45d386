#pragma once

#include "pgl/fields.hpp"

namespace pgl {

/// Plaquette values live on Grid2D::dual(); index k of the dual grid is plaquette (col, row).
struct PoissonReport {
  int iterations = 0;
  double residual = 0.0;  // max |rhs - S S^T u| / h^2
  bool converged = false;
};

/**
 * Solve S S^T u = rhs on the plaquettes of `grid`, where S^T u assigns to each
 * link the difference of its two neighbouring plaquette values (missing
 * plaquettes count as zero).  This is the 5-point Dirichlet Laplacian on the
 * dual grid times -h^2.  Diagonally preconditioned CG; `u` is the initial guess.
 */
PoissonReport solve_plaquette_laplacian(const Grid2D& grid, const std::vector<double>& rhs, std::vector<double>& u,
                                        double tol, int max_iter = 0);

/// Links S^T u from plaquette values u.
LinkField2D links_from_stream(GridPtr grid, const std::vector<double>& u);

/// S A: plaquette sums (circulation) indexed on the dual grid.
std::vector<double> plaquette_sums(const LinkField2D& A);

/// Discrete curl on the dual grid: plaquette sum / h^2.
ScalarField2D curl(const LinkField2D& A);

/// Discrete divergence at nodes: net outgoing link sum / h^2 (missing links count zero).
ScalarField2D divergence(const LinkField2D& A);

/// Mean of the four corner values of each plaquette, on the dual grid.
ScalarField2D plaquette_average(const ScalarField2D& f);

struct PotentialBundle {
  LinkField2D F;
  ScalarField2D stream;  // on grid.dual(); Laplacian(stream) = B0, zero ghosts outside
  double residual_curl = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Canonical divergence-free potential with curl F = B0 (plaquette-averaged) and F.nu = 0.
PotentialBundle vector_potential_from_field(const ScalarField2D& B0, GridPtr grid, double tol = 1e-10);

/// Exact link integrals of A0(x - c) = 1/2 (-(y - c.y), x - c.x), which has unit curl.
LinkField2D potential_A0(GridPtr grid, Point c = {});

struct GaugePhase {
  ScalarField2D phi;  // zero outside the square
  double defect = 0.0;  // sup over links in the square of |F - b A0(.-x0) - grad phi| per unit length
};

/**
 * Phase phi on Q_ell(x0) with F ~ b A0(. - x0) + grad phi, b = B0 at x~0.
 * phi is integrated along the horizontal-then-vertical path from the node
 * nearest x0.
 */
GaugePhase local_gauge_phase(const LinkField2D& F, Point x0, double b, double ell);
GaugePhase local_gauge_phase(const LinkField2D& F, const ScalarField2D& B0, Point x0, Point xt0, double ell);

/// Bilinear interpolation of a node field (falls back to nearest inside node).
double interpolate(const ScalarField2D& f, Point p);

void write_binary(const PotentialBundle& p, const std::string& path);

}  // namespace pgl
