#include "pgl/fields.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pgl {

namespace {

const int kDi[4] = {1, -1, 0, 0};
const int kDj[4] = {0, 0, 1, -1};

bool connected(int nx, int ny, const std::vector<std::uint8_t>& in) {
  std::size_t start = in.size();
  std::size_t total = 0;
  for (std::size_t k = 0; k < in.size(); ++k)
    if (in[k]) {
      if (start == in.size()) start = k;
      ++total;
    }
  if (total == 0) return false;
  std::vector<std::uint8_t> seen(in.size(), 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    ++reached;
    const int i = static_cast<int>(k % nx), j = static_cast<int>(k / nx);
    for (int d = 0; d < 4; ++d) {
      const int a = i + kDi[d], b = j + kDj[d];
      if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
      const std::size_t q = static_cast<std::size_t>(b) * nx + a;
      if (in[q] && !seen[q]) {
        seen[q] = 1;
        stack.push_back(q);
      }
    }
  }
  return reached == total;
}

}  // namespace

Grid2D::Grid2D(int nx, int ny, double h, Point origin, std::vector<std::uint8_t> inside)
    : nx_(nx), ny_(ny), h_(h), origin_(origin), inside_(std::move(inside)) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("grid spacing must be positive");
  if (nx < 4 || ny < 4) throw InputError("grid needs at least 4 nodes per direction");
  if (inside_.size() != static_cast<std::size_t>(nx) * ny) throw InputError("inside mask has wrong size");
  if (!connected(nx, ny, inside_)) throw InputError("inside mask is empty or not connected");
  for (auto v : inside_) inside_count_ += v ? 1 : 0;
  classify_boundary();
}

void Grid2D::classify_boundary() {
  on_boundary_.assign(inside_.size(), 0);
  boundary_.clear();
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) {
      if (!inside(i, j)) continue;
      const bool mx = !inside(i + 1, j), px = !inside(i - 1, j);
      const bool my = !inside(i, j + 1), py = !inside(i, j - 1);
      if (!(mx || px || my || py)) continue;
      double nxv = (mx ? 1.0 : 0.0) - (px ? 1.0 : 0.0);
      double nyv = (my ? 1.0 : 0.0) - (py ? 1.0 : 0.0);
      const double len = std::hypot(nxv, nyv);
      if (len > 0) {
        nxv /= len;
        nyv /= len;
      }
      BoundaryNode b;
      b.index = index(i, j);
      b.normal = {nxv, nyv};
      b.corner = (mx || px) && (my || py);
      on_boundary_[b.index] = 1;
      boundary_.push_back(b);
    }
}

Grid2D Grid2D::box(int nx, int ny, double h, Point origin) {
  return Grid2D(nx, ny, h, origin, std::vector<std::uint8_t>(static_cast<std::size_t>(nx) * ny, 1));
}

Grid2D Grid2D::square(int n, double side, Point lower_left) {
  if (!(side > 0.0)) throw InputError("square side must be positive");
  return box(n, n, side / n, lower_left);
}

Grid2D Grid2D::disk(int n, double radius, Point center) {
  if (!(radius > 0.0)) throw InputError("disk radius must be positive");
  const double h = 2.0 * radius / n;
  const Point origin{center.x - radius, center.y - radius};
  std::vector<std::uint8_t> in(static_cast<std::size_t>(n) * n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double x = origin.x + (i + 0.5) * h - center.x;
      const double y = origin.y + (j + 0.5) * h - center.y;
      in[static_cast<std::size_t>(j) * n + i] = (x * x + y * y < radius * radius) ? 1 : 0;
    }
  Grid2D g(n, n, h, origin, std::move(in));
  for (std::size_t s = 0; s < g.boundary_.size(); ++s) {
    const Point p = g.node(g.boundary_[s].index);
    const double dx = p.x - center.x, dy = p.y - center.y, r = std::hypot(dx, dy);
    g.boundary_[s].normal = r > 0 ? Point{dx / r, dy / r} : Point{1.0, 0.0};
    g.boundary_[s].corner = false;
  }
  return g;
}

std::size_t Grid2D::nearest(Point p) const {
  const int i = static_cast<int>(std::floor((p.x - origin_.x) / h_));
  const int j = static_cast<int>(std::floor((p.y - origin_.y) / h_));
  const int ic = std::clamp(i, 0, nx_ - 1), jc = std::clamp(j, 0, ny_ - 1);
  if (inside(ic, jc)) return index(ic, jc);
  // Search outward for the closest inside node.
  double best = 1e300;
  std::size_t arg = size();
  for (std::size_t k = 0; k < size(); ++k) {
    if (!inside_[k]) continue;
    const Point q = node(k);
    const double d = std::hypot(q.x - p.x, q.y - p.y);
    if (d < best) {
      best = d;
      arg = k;
    }
  }
  return arg;
}

Grid2D Grid2D::dual() const {
  std::vector<std::uint8_t> in(static_cast<std::size_t>(nx_ - 1) * (ny_ - 1), 0);
  for (int j = 0; j + 1 < ny_; ++j)
    for (int i = 0; i + 1 < nx_; ++i) in[static_cast<std::size_t>(j) * (nx_ - 1) + i] = has_plaquette(i, j);
  return Grid2D(nx_ - 1, ny_ - 1, h_, {origin_.x + 0.5 * h_, origin_.y + 0.5 * h_}, std::move(in));
}

bool Grid2D::same_layout(const Grid2D& o) const {
  return nx_ == o.nx_ && ny_ == o.ny_ && h_ == o.h_ && origin_.x == o.origin_.x && origin_.y == o.origin_.y &&
         inside_ == o.inside_;
}

template <class T>
NodeField<T>::NodeField(GridPtr g, std::vector<T> values) : grid_(std::move(g)), v_(std::move(values)) {
  if (v_.size() != grid_->size()) throw InputError("field value count does not match grid");
}

namespace {
bool finite_value(double v) { return std::isfinite(v); }
bool finite_value(const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
}  // namespace

template <class T>
void NodeField<T>::check_finite() const {
  for (std::size_t k = 0; k < v_.size(); ++k)
    if (grid_->inside(k) && !finite_value(v_[k])) throw InputError("field contains a non-finite value");
}

template class NodeField<double>;
template class NodeField<cplx>;

LinkField2D LinkField2D::gradient(const ScalarField2D& chi) {
  const Grid2D& g = chi.grid();
  LinkField2D out(chi.grid_ptr());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (g.has_xlink(i, j)) out.x(i, j) = chi(i + 1, j) - chi(i, j);
      if (g.has_ylink(i, j)) out.y(i, j) = chi(i, j + 1) - chi(i, j);
    }
  return out;
}

LinkField2D& LinkField2D::operator+=(const LinkField2D& o) {
  if (!grid_->same_layout(*o.grid_)) throw InputError("link fields live on different grids");
  for (std::size_t k = 0; k < x_.size(); ++k) {
    x_[k] += o.x_[k];
    y_[k] += o.y_[k];
  }
  return *this;
}

LinkField2D& LinkField2D::operator-=(const LinkField2D& o) {
  if (!grid_->same_layout(*o.grid_)) throw InputError("link fields live on different grids");
  for (std::size_t k = 0; k < x_.size(); ++k) {
    x_[k] -= o.x_[k];
    y_[k] -= o.y_[k];
  }
  return *this;
}

LinkField2D& LinkField2D::operator*=(double s) {
  for (std::size_t k = 0; k < x_.size(); ++k) {
    x_[k] *= s;
    y_[k] *= s;
  }
  return *this;
}

LinkField2D operator+(LinkField2D a, const LinkField2D& b) { return a += b; }
LinkField2D operator-(LinkField2D a, const LinkField2D& b) { return a -= b; }
LinkField2D operator*(double s, LinkField2D a) { return a *= s; }

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += v[k];
    return s;
  }
  const std::size_t m = n / 2;
  return pairwise_sum(v, m) + pairwise_sum(v + m, n - m);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

Mask full_mask(const Grid2D& g) { return g.mask(); }

double integrate(const ScalarField2D& f, const Mask& mask) {
  const Grid2D& g = f.grid();
  if (mask.size() != g.size()) throw InputError("mask does not match the field's grid");
  std::vector<double> terms(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (mask[k] && g.inside(k)) terms[k] = f[k];
  return g.h() * g.h() * pairwise_sum(terms);
}

double integrate(const ScalarField2D& f) { return integrate(f, f.grid().mask()); }

double lp_norm_pow(const ComplexField2D& f, double p) {
  const Grid2D& g = f.grid();
  std::vector<double> terms(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) terms[k] = std::pow(std::abs(f[k]), p);
  return g.h() * g.h() * pairwise_sum(terms);
}

double l2_norm(const ComplexField2D& f) {
  const Grid2D& g = f.grid();
  std::vector<double> terms(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) terms[k] = std::norm(f[k]);
  return std::sqrt(g.h() * g.h() * pairwise_sum(terms));
}

double l2_norm(const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  std::vector<double> terms(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) terms[k] = f[k] * f[k];
  return std::sqrt(g.h() * g.h() * pairwise_sum(terms));
}

ScalarField2D covariant_energy_density(const ComplexField2D& psi, const LinkField2D& A, double coupling) {
  const Grid2D& g = psi.grid();
  if (!g.same_layout(A.grid())) throw InputError("psi and A live on different grids");
  ScalarField2D out(psi.grid_ptr());
  const double ih2 = 1.0 / (g.h() * g.h());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.inside(i, j)) continue;
      double s = 0.0;
      const cplx p = psi(i, j);
      if (g.has_xlink(i, j)) s += std::norm(psi(i + 1, j) * std::polar(1.0, -coupling * A.x(i, j)) - p);
      if (g.has_ylink(i, j)) s += std::norm(psi(i, j + 1) * std::polar(1.0, -coupling * A.y(i, j)) - p);
      out(i, j) = s * ih2;
    }
  return out;
}

SublevelMasks sublevel_masks(const ScalarField2D& a) {
  const Grid2D& g = a.grid();
  SublevelMasks m{Mask(g.size(), 0), Mask(g.size(), 0)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside(k)) continue;
    if (a[k] > 0.0)
      m.pos[k] = 1;
    else
      m.nonpos[k] = 1;
  }
  return m;
}

std::size_t mask_count(const Mask& m) {
  std::size_t c = 0;
  for (auto v : m) c += v ? 1 : 0;
  return c;
}

long count_boundary_squares(const ScalarField2D& a, double ell) {
  const Grid2D& g = a.grid();
  const double h = g.h();
  if (!(ell >= 2.0 * h)) throw InputError("square side below two grid spacings cannot be resolved");
  const double x0 = g.origin().x, y0 = g.origin().y;
  const double x1 = x0 + g.nx() * h, y1 = y0 + g.ny() * h;
  if (ell >= std::hypot(x1 - x0, y1 - y0)) throw InputError("square side exceeds the domain diameter");
  const double eps = 1e-9 * ell;
  long count = 0;
  const long kx0 = static_cast<long>(std::floor(x0 / ell)), kx1 = static_cast<long>(std::ceil(x1 / ell));
  const long ky0 = static_cast<long>(std::floor(y0 / ell)), ky1 = static_cast<long>(std::ceil(y1 / ell));
  for (long ky = ky0; ky <= ky1; ++ky)
    for (long kx = kx0; kx <= kx1; ++kx) {
      const Point c{kx * ell, ky * ell};
      if (c.x <= x0 + eps || c.x >= x1 - eps || c.y <= y0 + eps || c.y >= y1 - eps) continue;
      if (!g.inside(g.nearest(c)) || std::hypot(g.node(g.nearest(c)).x - c.x, g.node(g.nearest(c)).y - c.y) > h)
        continue;
      const int i0 = std::max(0, static_cast<int>(std::ceil((c.x - 0.5 * ell - x0) / h - 0.5 - 1e-9)));
      const int i1 = std::min(g.nx() - 1, static_cast<int>(std::floor((c.x + 0.5 * ell - x0) / h - 0.5 + 1e-9)));
      const int j0 = std::max(0, static_cast<int>(std::ceil((c.y - 0.5 * ell - y0) / h - 0.5 - 1e-9)));
      const int j1 = std::min(g.ny() - 1, static_cast<int>(std::floor((c.y + 0.5 * ell - y0) / h - 0.5 + 1e-9)));
      bool pos = false, nonpos = false;
      for (int j = j0; j <= j1 && !(pos && nonpos); ++j)
        for (int i = i0; i <= i1; ++i) {
          if (!g.inside(i, j)) continue;
          if (a(i, j) > 0.0)
            pos = true;
          else
            nonpos = true;
        }
      if (pos && nonpos) ++count;
    }
  return count;
}

// Serialization -----------------------------------------------------------

namespace {

constexpr char kMagicScalar[4] = {'P', 'G', 'L', 'S'};
constexpr char kMagicComplex[4] = {'P', 'G', 'L', 'C'};
constexpr char kMagicLink[4] = {'P', 'G', 'L', 'L'};

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

void put_header(std::ostream& os, const char magic[4], const Grid2D& g) {
  if (g.nx() > 65535 || g.ny() > 65535) throw InputError("grid too large for the binary format");
  const std::uint16_t nx = static_cast<std::uint16_t>(g.nx()), ny = static_cast<std::uint16_t>(g.ny());
  const double h = g.h();
  os.write(magic, 4);
  os.write(reinterpret_cast<const char*>(&nx), 2);
  os.write(reinterpret_cast<const char*>(&ny), 2);
  os.write(reinterpret_cast<const char*>(&h), 8);
}

void get_header(std::istream& is, const char magic[4], const Grid2D& g) {
  char m[4];
  std::uint16_t nx = 0, ny = 0;
  double h = 0;
  is.read(m, 4);
  is.read(reinterpret_cast<char*>(&nx), 2);
  is.read(reinterpret_cast<char*>(&ny), 2);
  is.read(reinterpret_cast<char*>(&h), 8);
  if (!is || std::memcmp(m, magic, 4) != 0) throw InputError("bad binary field header");
  if (nx != g.nx() || ny != g.ny() || h != g.h()) throw InputError("binary field does not match grid");
}

void put_doubles(std::ostream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& is, std::size_t n) {
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw InputError("truncated binary field");
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << std::setprecision(17);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open for reading: " + path);
  return is;
}

template <class Row>
void read_csv_rows(const GridPtr& g, const std::string& path, std::size_t ncols, Row&& row) {
  std::ifstream is = open_in(path);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> c(ncols);
    for (auto& v : c) ss >> v;
    if (!ss) throw InputError("malformed CSV row in " + path);
    const std::size_t k = g->nearest({c[0], c[1]});
    const Point p = g->node(k);
    if (std::abs(p.x - c[0]) > 1e-6 * g->h() || std::abs(p.y - c[1]) > 1e-6 * g->h())
      throw InputError("CSV node does not lie on the grid: " + path);
    row(k, c);
  }
}

}  // namespace

void write_csv(const ScalarField2D& f, const std::string& path) {
  auto os = open_out(path);
  os << "x,y,value\n";
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.grid().inside(k)) os << f.grid().node(k).x << ',' << f.grid().node(k).y << ',' << f[k] << '\n';
}

void write_csv(const ComplexField2D& f, const std::string& path) {
  auto os = open_out(path);
  os << "x,y,re,im\n";
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.grid().inside(k))
      os << f.grid().node(k).x << ',' << f.grid().node(k).y << ',' << f[k].real() << ',' << f[k].imag() << '\n';
}

void write_csv(const LinkField2D& f, const std::string& path) {
  auto os = open_out(path);
  os << "x,y,link_x,link_y\n";
  const Grid2D& g = f.grid();
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inside(k)) os << g.node(k).x << ',' << g.node(k).y << ',' << f.xs()[k] << ',' << f.ys()[k] << '\n';
}

ScalarField2D read_scalar_csv(GridPtr g, const std::string& path) {
  ScalarField2D f(g);
  read_csv_rows(g, path, 3, [&](std::size_t k, const std::vector<double>& c) { f[k] = c[2]; });
  f.check_finite();
  return f;
}

ComplexField2D read_complex_csv(GridPtr g, const std::string& path) {
  ComplexField2D f(g);
  read_csv_rows(g, path, 4, [&](std::size_t k, const std::vector<double>& c) { f[k] = {c[2], c[3]}; });
  f.check_finite();
  return f;
}

void write_binary(const ScalarField2D& f, std::ostream& os) {
  put_header(os, kMagicScalar, f.grid());
  put_doubles(os, f.values());
}

void write_binary(const ComplexField2D& f, std::ostream& os) {
  put_header(os, kMagicComplex, f.grid());
  std::vector<double> v(2 * f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    v[2 * k] = f[k].real();
    v[2 * k + 1] = f[k].imag();
  }
  put_doubles(os, v);
}

void write_binary(const LinkField2D& f, std::ostream& os) {
  put_header(os, kMagicLink, f.grid());
  put_doubles(os, f.xs());
  put_doubles(os, f.ys());
}

ScalarField2D read_scalar_binary(GridPtr g, std::istream& is) {
  get_header(is, kMagicScalar, *g);
  ScalarField2D f(g, get_doubles(is, g->size()));
  f.check_finite();
  return f;
}

ComplexField2D read_complex_binary(GridPtr g, std::istream& is) {
  get_header(is, kMagicComplex, *g);
  const auto v = get_doubles(is, 2 * g->size());
  ComplexField2D f(g);
  for (std::size_t k = 0; k < g->size(); ++k) f[k] = {v[2 * k], v[2 * k + 1]};
  f.check_finite();
  return f;
}

LinkField2D read_link_binary(GridPtr g, std::istream& is) {
  get_header(is, kMagicLink, *g);
  LinkField2D f(g);
  f.xs() = get_doubles(is, g->size());
  f.ys() = get_doubles(is, g->size());
  return f;
}

void write_binary(const ScalarField2D& f, const std::string& path) {
  auto os = open_out(path);
  write_binary(f, os);
}

ScalarField2D read_scalar_binary(GridPtr g, const std::string& path) {
  auto is = open_in(path);
  return read_scalar_binary(std::move(g), is);
}

}  // namespace pgl
