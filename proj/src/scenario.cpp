#include "pgl/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

namespace pgl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  if (trim(text.substr(used)).size() != 0) throw ConfigError(key, "trailing text after number '" + text + "'");
  return v;
}

}  // namespace

Config Config::parse(std::istream& is, const std::string& source) {
  Config c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", source + ":" + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", source + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", source + ":" + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("", "cannot open config file " + path);
  return parse(is, path);
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("", "expected key=value, got '" + assignment + "'");
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

const std::string* Config::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  touched_[key] = true;
  return &it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

std::string Config::require(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigError(key, "missing required key");
  return *v;
}

double Config::number(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? parse_number(key, *v) : fallback;
}

long Config::integer(const std::string& key, long fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  const double d = parse_number(key, *v);
  if (d != std::floor(d)) throw ConfigError(key, "expected an integer, got '" + *v + "'");
  return static_cast<long>(d);
}

bool Config::flag(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + *v + "'");
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(key, item));
  }
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!touched_.count(k)) out.push_back(k);
  return out;
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Tabulated fields ----------------------------------------------------------

Tabulated2D Tabulated2D::read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path);
  std::string line;
  std::getline(is, line);
  std::vector<std::array<double, 3>> rows;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::array<double, 3> r{};
    char c1 = 0, c2 = 0;
    std::istringstream ss(line);
    if (!(ss >> r[0] >> c1 >> r[1] >> c2 >> r[2]) || c1 != ',' || c2 != ',')
      throw InputError("bad row in " + path + ": " + line);
    rows.push_back(r);
  }
  Tabulated2D t;
  for (const auto& r : rows) {
    t.xs_.push_back(r[0]);
    t.ys_.push_back(r[1]);
  }
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(t.xs_);
  uniq(t.ys_);
  if (t.xs_.size() < 2 || t.ys_.size() < 2 || rows.size() != t.xs_.size() * t.ys_.size())
    throw InputError(path + " is not a full regular lattice");
  t.v_.assign(rows.size(), std::nan(""));
  for (const auto& r : rows) {
    const auto i = std::lower_bound(t.xs_.begin(), t.xs_.end(), r[0]) - t.xs_.begin();
    const auto j = std::lower_bound(t.ys_.begin(), t.ys_.end(), r[1]) - t.ys_.begin();
    t.v_[j * t.xs_.size() + i] = r[2];
  }
  for (double v : t.v_)
    if (!std::isfinite(v)) throw InputError(path + " has missing or non-finite samples");
  return t;
}

double Tabulated2D::operator()(Point p) const {
  auto locate = [](const std::vector<double>& axis, double x, double& w) {
    if (x <= axis.front()) {
      w = 0.0;
      return std::size_t{0};
    }
    if (x >= axis.back()) {
      w = 1.0;
      return axis.size() - 2;
    }
    const std::size_t k = std::upper_bound(axis.begin(), axis.end(), x) - axis.begin() - 1;
    w = (x - axis[k]) / (axis[k + 1] - axis[k]);
    return k;
  };
  double wx = 0, wy = 0;
  const std::size_t i = locate(xs_, p.x, wx), j = locate(ys_, p.y, wy);
  const std::size_t n = xs_.size();
  auto at = [&](std::size_t a, std::size_t b) { return v_[b * n + a]; };
  return (1 - wx) * (1 - wy) * at(i, j) + wx * (1 - wy) * at(i + 1, j) + (1 - wx) * wy * at(i, j + 1) +
         wx * wy * at(i + 1, j + 1);
}

// Families ------------------------------------------------------------------

GridPtr DomainSpec::build(int nodes) const {
  if (nodes < 4) throw ConfigError("domain.n", "need at least 4 nodes per side");
  if (shape == "square") return share(Grid2D::square(nodes, size, {center.x - size / 2, center.y - size / 2}));
  if (shape == "disk") return share(Grid2D::disk(nodes, size, center));
  throw ConfigError("domain.shape", "unknown shape '" + shape + "'");
}

GridPtr DomainSpec::build_for(double kappa, double H, double sup_B) const {
  if (n > 0) return build(n);
  const double scale = kappa * H * sup_B;
  double h = 1.0 / kappa;
  if (scale > 0.0) h = std::min(h, 1.0 / std::sqrt(scale));
  h *= resolution;
  const double extent = shape == "disk" ? 2.0 * size : size;
  return build(std::max(8, static_cast<int>(std::ceil(extent / h))));
}

PeriodicFunction PinningSpec::profile() const {
  const double m = mean, amp = amplitude, T = T1;
  return [m, amp, T](double t1, double) { return m + amp * std::sin(2.0 * std::numbers::pi * t1 / T); };
}

std::function<double(Point, double)> PinningSpec::make() const {
  const double v = value;
  if (kind == "constant") return [v](Point, double) { return v; };
  if (kind == "linear") {
    const Point s = slope;
    return [v, s](Point p, double) { return v + s.x * p.x + s.y * p.y; };
  }
  if (kind == "radial") {
    const Point c = center;
    const double amp = amplitude, w = width;
    if (!(w > 0.0)) throw ConfigError("pinning.width", "must be positive");
    return [v, c, amp, w](Point p, double) {
      const double r2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
      return v + amp * std::exp(-r2 / (2 * w * w));
    };
  }
  if (kind == "periodic" || kind == "sum") {
    if (!(T1 > 0.0 && T2 > 0.0)) throw ConfigError("pinning.T1", "periods must be positive");
    const PeriodicFunction alpha = profile();
    const bool shifted = kind == "sum";
    const Point s = slope;
    return [alpha, shifted, v, s](Point p, double kappa) {
      const double r = std::sqrt(kappa);
      const double base = shifted ? v + s.x * p.x + s.y * p.y : 0.0;
      return base + alpha(r * p.x, r * p.y);
    };
  }
  if (kind == "tabulated") {
    if (file.empty()) throw ConfigError("pinning.file", "tabulated pinning needs a file");
    auto t = std::make_shared<Tabulated2D>(Tabulated2D::read_csv(file));
    return [t](Point p, double) { return (*t)(p); };
  }
  throw ConfigError("pinning.kind", "unknown pinning family '" + kind + "'");
}

std::function<double(Point)> FieldSpec::make() const {
  const double v = value;
  const Point o = origin;
  if (kind == "constant") return [v](Point) { return v; };
  if (kind == "linear") return [v, o](Point p) { return v * (p.x - o.x); };
  if (kind == "ring") {
    const double r = radius;
    return [v, o, r](Point p) { return v * ((p.x - o.x) * (p.x - o.x) + (p.y - o.y) * (p.y - o.y) - r * r); };
  }
  if (kind == "tabulated") {
    if (file.empty()) throw ConfigError("field.file", "tabulated field needs a file");
    auto t = std::make_shared<Tabulated2D>(Tabulated2D::read_csv(file));
    return [t](Point p) { return (*t)(p); };
  }
  throw ConfigError("field.kind", "unknown field family '" + kind + "'");
}

// Scenario ------------------------------------------------------------------

Scenario Scenario::from_config(const Config& c) {
  Scenario s;
  s.config = c;
  DomainSpec& d = s.domain;
  d.shape = c.get("domain.shape", d.shape);
  d.size = c.number("domain.size", d.size);
  if (d.shape == "disk") d.center = {0.0, 0.0};
  d.center = {c.number("domain.center_x", d.center.x), c.number("domain.center_y", d.center.y)};
  d.n = static_cast<int>(c.integer("domain.n", 0));
  d.resolution = c.number("domain.resolution", d.resolution);
  if (!(d.size > 0.0)) throw ConfigError("domain.size", "must be positive");
  if (!(d.resolution > 0.0)) throw ConfigError("domain.resolution", "must be positive");
  if (d.shape != "square" && d.shape != "disk") throw ConfigError("domain.shape", "unknown shape '" + d.shape + "'");

  PinningSpec& p = s.pinning;
  p.kind = c.get("pinning.kind", p.kind);
  p.value = c.number("pinning.value", p.value);
  p.slope = {c.number("pinning.slope_x", 0.0), c.number("pinning.slope_y", 0.0)};
  p.center = {c.number("pinning.center_x", d.center.x), c.number("pinning.center_y", d.center.y)};
  p.amplitude = c.number("pinning.amplitude", p.amplitude);
  p.width = c.number("pinning.width", p.width);
  p.mean = c.number("pinning.mean", p.mean);
  p.T1 = c.number("pinning.T1", p.T1);
  p.T2 = c.number("pinning.T2", p.T2);
  p.file = c.get("pinning.file", "");
  if (!p.file.empty() && !std::ifstream(p.file)) throw ConfigError("pinning.file", "no such file " + p.file);
  p.make();

  FieldSpec& f = s.field;
  f.kind = c.get("field.kind", f.kind);
  f.value = c.number("field.value", f.value);
  f.origin = {c.number("field.origin_x", 0.0), c.number("field.origin_y", 0.0)};
  f.radius = c.number("field.radius", f.radius);
  f.file = c.get("field.file", "");
  if (!f.file.empty() && !std::ifstream(f.file)) throw ConfigError("field.file", "no such file " + f.file);
  f.make();

  s.kappa = c.numbers("run.kappa", s.kappa);
  for (double k : s.kappa)
    if (!(k > 0.0)) throw ConfigError("run.kappa", "values must be positive");
  s.sigma = c.number("run.sigma", s.sigma);
  s.sigma_hat = c.number("run.sigma_hat", s.sigma_hat);
  s.H = c.numbers("run.H", {});
  for (double h : s.H)
    if (!(h >= 0.0)) throw ConfigError("run.H", "values must be nonnegative");
  s.seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  s.output = c.get("output.dir", s.output);
  return s;
}

double Scenario::sup_field() const {
  const GridPtr g = domain.build(64);
  const auto B = field.make();
  double m = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k)
    if (g->inside(k)) m = std::max(m, std::abs(B(g->node(k))));
  return m;
}

GLData Scenario::data_on(const GridPtr& grid, double kappa) const {
  const auto a = pinning.make();
  const auto B = field.make();
  ScalarField2D af = ScalarField2D::sample(grid, [&](Point p) { return a(p, kappa); });
  ScalarField2D Bf = ScalarField2D::sample(grid, B);
  return make_gl_data(std::move(af), std::move(Bf));
}

GLData Scenario::data(double kappa, double H) const {
  return data_on(domain.build_for(kappa, H, sup_field()), kappa);
}

HomogenizedCase Scenario::homogenized() const {
  HomogenizedCase h;
  if (pinning.kind == "periodic")
    h.kind = HomogenizedCase::Kind::Oscillating;
  else if (pinning.kind == "sum")
    h.kind = HomogenizedCase::Kind::ShiftedPeriodic;
  else
    h.kind = HomogenizedCase::Kind::KappaIndependent;
  h.alpha = pinning.profile();
  h.T1 = pinning.T1;
  h.T2 = pinning.T2;
  const PinningSpec p = pinning;
  if (h.kind == HomogenizedCase::Kind::ShiftedPeriodic) {
    h.a = [p](Point x) { return p.value + p.slope.x * x.x + p.slope.y * x.y; };
  } else {
    const auto a = pinning.make();
    h.a = [a](Point x) { return a(x, 1.0); };
  }
  h.B0 = field.make();
  h.sigma = sigma;
  return h;
}

}  // namespace pgl
