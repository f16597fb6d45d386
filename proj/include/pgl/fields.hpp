#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pgl {

using cplx = std::complex<double>;

/// Bad or inconsistent input (CLI exit code 2).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its target (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct BoundaryNode {
  std::size_t index = 0;
  Point normal;  // outward unit normal
  bool corner = false;
};

/**
 * @brief Cartesian node grid with an inside mask.
 *
 * Nodes sit at the centres of an nx-by-ny partition of a box, so node (i,j)
 * is at origin + ((i+1/2)h, (j+1/2)h).  Links join horizontally or
 * vertically adjacent inside nodes; a plaquette is the cell spanned by four
 * inside nodes (i,j),(i+1,j),(i+1,j+1),(i,j+1).
 */
class Grid2D {
 public:
  Grid2D(int nx, int ny, double h, Point origin, std::vector<std::uint8_t> inside);

  static Grid2D box(int nx, int ny, double h, Point origin = {});
  /// [x0, x0+side]^2 with n nodes per side.
  static Grid2D square(int n, double side = 1.0, Point lower_left = {});
  /// Disk of the given radius, bounding box covered by n nodes per side.
  static Grid2D disk(int n, double radius, Point center = {});

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  Point origin() const { return origin_; }
  std::size_t size() const { return inside_.size(); }
  std::size_t inside_count() const { return inside_count_; }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  int col(std::size_t k) const { return static_cast<int>(k % nx_); }
  int row(std::size_t k) const { return static_cast<int>(k / nx_); }
  Point node(int i, int j) const { return {origin_.x + (i + 0.5) * h_, origin_.y + (j + 0.5) * h_}; }
  Point node(std::size_t k) const { return node(col(k), row(k)); }

  bool inside(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx_ && j < ny_ && inside_[index(i, j)];
  }
  bool inside(std::size_t k) const { return inside_[k] != 0; }
  bool has_xlink(int i, int j) const { return inside(i, j) && inside(i + 1, j); }
  bool has_ylink(int i, int j) const { return inside(i, j) && inside(i, j + 1); }
  bool has_plaquette(int i, int j) const {
    return inside(i, j) && inside(i + 1, j) && inside(i, j + 1) && inside(i + 1, j + 1);
  }
  const std::vector<std::uint8_t>& mask() const { return inside_; }

  /// Inside nodes missing at least one of their four neighbours.
  const std::vector<BoundaryNode>& boundary() const { return boundary_; }
  bool is_boundary(std::size_t k) const { return on_boundary_[k] != 0; }

  /// Nearest inside node to p (throws if p lies outside the box).
  std::size_t nearest(Point p) const;

  /// Plaquette grid: one node per plaquette centre, inside where all four corners are.
  Grid2D dual() const;

  bool same_layout(const Grid2D& other) const;

  void set_normal(std::size_t boundary_slot, Point n) { boundary_[boundary_slot].normal = n; }

 private:
  void classify_boundary();

  int nx_, ny_;
  double h_;
  Point origin_;
  std::vector<std::uint8_t> inside_;
  std::vector<std::uint8_t> on_boundary_;
  std::vector<BoundaryNode> boundary_;
  std::size_t inside_count_ = 0;
};

using GridPtr = std::shared_ptr<const Grid2D>;

inline GridPtr share(Grid2D g) { return std::make_shared<const Grid2D>(std::move(g)); }

/// Node-centred field; values outside the mask are kept at zero.
template <class T>
class NodeField {
 public:
  NodeField() = default;
  explicit NodeField(GridPtr g, T fill = T{}) : grid_(std::move(g)), v_(grid_->size(), T{}) {
    for (std::size_t k = 0; k < v_.size(); ++k)
      if (grid_->inside(k)) v_[k] = fill;
  }
  NodeField(GridPtr g, std::vector<T> values);

  template <class F>
  static NodeField sample(GridPtr g, F&& f) {
    NodeField out(g);
    for (std::size_t k = 0; k < g->size(); ++k)
      if (g->inside(k)) out.v_[k] = f(g->node(k));
    return out;
  }

  const Grid2D& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  T& operator[](std::size_t k) { return v_[k]; }
  const T& operator[](std::size_t k) const { return v_[k]; }
  T& operator()(int i, int j) { return v_[grid_->index(i, j)]; }
  const T& operator()(int i, int j) const { return v_[grid_->index(i, j)]; }
  std::vector<T>& values() { return v_; }
  const std::vector<T>& values() const { return v_; }

  /// Throws InputError on a NaN/Inf value at an inside node.
  void check_finite() const;

 private:
  GridPtr grid_;
  std::vector<T> v_;
};

using ScalarField2D = NodeField<double>;
using ComplexField2D = NodeField<cplx>;
using Mask = std::vector<std::uint8_t>;

/// Edge integrals of A: x(i,j) on link (i,j)->(i+1,j), y(i,j) on (i,j)->(i,j+1).
class LinkField2D {
 public:
  LinkField2D() = default;
  explicit LinkField2D(GridPtr g) : grid_(std::move(g)), x_(grid_->size(), 0.0), y_(grid_->size(), 0.0) {}

  /// Links from a vector potential A(p) -> Point, two-point Gauss per edge.
  template <class F>
  static LinkField2D from_potential(GridPtr g, F&& A) {
    LinkField2D out(g);
    const double h = g->h();
    const double gq = 0.5 / std::sqrt(3.0);
    for (int j = 0; j < g->ny(); ++j)
      for (int i = 0; i < g->nx(); ++i) {
        const Point p = g->node(i, j);
        if (g->has_xlink(i, j)) {
          const Point a = A(Point{p.x + (0.5 - gq) * h, p.y});
          const Point b = A(Point{p.x + (0.5 + gq) * h, p.y});
          out.x(i, j) = 0.5 * h * (a.x + b.x);
        }
        if (g->has_ylink(i, j)) {
          const Point a = A(Point{p.x, p.y + (0.5 - gq) * h});
          const Point b = A(Point{p.x, p.y + (0.5 + gq) * h});
          out.y(i, j) = 0.5 * h * (a.y + b.y);
        }
      }
    return out;
  }

  /// Pure gradient links chi(j+e) - chi(j).
  static LinkField2D gradient(const ScalarField2D& chi);

  const Grid2D& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  double& x(int i, int j) { return x_[grid_->index(i, j)]; }
  double x(int i, int j) const { return x_[grid_->index(i, j)]; }
  double& y(int i, int j) { return y_[grid_->index(i, j)]; }
  double y(int i, int j) const { return y_[grid_->index(i, j)]; }
  std::vector<double>& xs() { return x_; }
  std::vector<double>& ys() { return y_; }
  const std::vector<double>& xs() const { return x_; }
  const std::vector<double>& ys() const { return y_; }

  LinkField2D& operator+=(const LinkField2D& o);
  LinkField2D& operator-=(const LinkField2D& o);
  LinkField2D& operator*=(double s);

 private:
  GridPtr grid_;
  std::vector<double> x_, y_;
};

LinkField2D operator+(LinkField2D a, const LinkField2D& b);
LinkField2D operator-(LinkField2D a, const LinkField2D& b);
LinkField2D operator*(double s, LinkField2D a);

/// Deterministic pairwise summation.
double pairwise_sum(const double* v, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

Mask full_mask(const Grid2D& g);

/// h^2 * sum of f over masked inside nodes.
double integrate(const ScalarField2D& f, const Mask& mask);
double integrate(const ScalarField2D& f);

/// L2 norm sqrt(h^2 sum |f|^2) over inside nodes.
double l2_norm(const ComplexField2D& f);
double l2_norm(const ScalarField2D& f);
double lp_norm_pow(const ComplexField2D& f, double p);  // h^2 sum |f|^p

/**
 * Per-node |(grad - i c A) psi|^2 using forward links:
 * sum over e of |psi(j+e) exp(-i c link) - psi(j)|^2 / h^2.
 */
ScalarField2D covariant_energy_density(const ComplexField2D& psi, const LinkField2D& A, double coupling);

struct SublevelMasks {
  Mask pos;
  Mask nonpos;
};
SublevelMasks sublevel_masks(const ScalarField2D& a);
std::size_t mask_count(const Mask& m);

/// Number of lattice squares of side ell centred in the domain that see both signs of a.
long count_boundary_squares(const ScalarField2D& a, double ell);

// Serialization -----------------------------------------------------------

void write_csv(const ScalarField2D& f, const std::string& path);
void write_csv(const ComplexField2D& f, const std::string& path);
void write_csv(const LinkField2D& f, const std::string& path);
ScalarField2D read_scalar_csv(GridPtr g, const std::string& path);
ComplexField2D read_complex_csv(GridPtr g, const std::string& path);

void write_binary(const ScalarField2D& f, std::ostream& os);
void write_binary(const ComplexField2D& f, std::ostream& os);
void write_binary(const LinkField2D& f, std::ostream& os);
ScalarField2D read_scalar_binary(GridPtr g, std::istream& is);
ComplexField2D read_complex_binary(GridPtr g, std::istream& is);
LinkField2D read_link_binary(GridPtr g, std::istream& is);
void write_binary(const ScalarField2D& f, const std::string& path);
ScalarField2D read_scalar_binary(GridPtr g, const std::string& path);

}  // namespace pgl
