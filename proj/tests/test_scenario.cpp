#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pgl/scenario.hpp"

using namespace pgl;

namespace {

Config parse(const std::string& text) {
  std::istringstream is(text);
  return Config::parse(is, "test");
}

std::string config_error_key(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.key;
  }
  return "<none>";
}

}  // namespace

TEST_CASE("config text") {
  const Config c = parse(
      "# comment\n"
      "seed = 7\n"
      "[domain]\n"
      "shape = disk   # trailing comment\n"
      "size=0.75\n"
      "\n"
      "[run]\n"
      "kappa = 10, 20 ,40\n"
      "frozen = true\n");
  CHECK(c.get("domain.shape", "") == "disk");
  CHECK(c.number("domain.size", 0) == 0.75);
  CHECK(c.integer("seed", 0) == 7);
  CHECK(c.numbers("run.kappa", {}) == std::vector<double>{10, 20, 40});
  CHECK(c.flag("run.frozen", false));
  CHECK(c.number("run.sigma", 0.5) == 0.5);
  CHECK_FALSE(c.has("run.sigma"));
  CHECK(c.unused().empty());

  CHECK_THROWS_AS(parse("[open\n"), ConfigError);
  CHECK_THROWS_AS(parse("novalue\n"), ConfigError);
  CHECK_THROWS_AS(parse(" = 3\n"), ConfigError);
  CHECK(config_error_key([&] { c.number("domain.shape", 0); }) == "domain.shape");
  CHECK(config_error_key([&] { c.require("run.H"); }) == "run.H");
  CHECK(config_error_key([&] { parse("x = 1.5\n").integer("x", 0); }) == "x");
  CHECK(config_error_key([&] { parse("x = 1.5abc\n").number("x", 0); }) == "x");
  CHECK(config_error_key([&] { parse("x = maybe\n").flag("x", false); }) == "x");
}

TEST_CASE("config overrides, unused keys and hashing") {
  Config a = parse("b = 2\na = 1\n");
  const Config b = parse("a = 1\nb = 2\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.dump() == b.dump());
  a.set_assignment("a=3");
  CHECK(a.number("a", 0) == 3);
  CHECK(a.hash() != b.hash());
  CHECK_THROWS_AS(a.set_assignment("novalue"), ConfigError);
  CHECK(a.unused() == std::vector<std::string>{"b"});
  CHECK_THROWS_AS(Config::load("/nonexistent/scenario.cfg"), ConfigError);
}

TEST_CASE("tabulated inputs are interpolated bilinearly") {
  const std::string path = "test_scenario_table.csv";
  {
    std::ofstream os(path);
    os << "x,y,value\n";
    for (double y : {0.0, 1.0})
      for (double x : {0.0, 0.5, 1.0}) os << x << ',' << y << ',' << 2 * x + 3 * y + x * y << '\n';
  }
  const Tabulated2D t = Tabulated2D::read_csv(path);
  // bilinear data is reproduced exactly inside, clamped outside
  CHECK(t({0.25, 0.5}) == doctest::Approx(2 * 0.25 + 1.5 + 0.125));
  CHECK(t({0.8, 0.1}) == doctest::Approx(1.6 + 0.3 + 0.08));
  CHECK(t({2.0, 2.0}) == doctest::Approx(t({1.0, 1.0})));

  Config c;
  c.set("pinning.kind", "tabulated");
  c.set("pinning.file", path);
  const Scenario s = Scenario::from_config(c);
  CHECK(s.pinning.make()({0.25, 0.5}, 10.0) == doctest::Approx(t({0.25, 0.5})));
  std::remove(path.c_str());

  {
    std::ofstream os(path);
    os << "x,y,value\n0,0,1\n1,0,2\n0,1,3\n";
  }
  CHECK_THROWS_AS(Tabulated2D::read_csv(path), InputError);
  std::remove(path.c_str());
  CHECK(config_error_key([&] { Scenario::from_config(c); }) == "pinning.file");
}

TEST_CASE("pinning and field families") {
  Config c;
  c.set("pinning.kind", "radial");
  c.set("pinning.value", "-0.5");
  c.set("pinning.amplitude", "1");
  c.set("pinning.width", "0.2");
  const auto radial = Scenario::from_config(c).pinning.make();
  CHECK(radial({0.5, 0.5}, 1.0) == doctest::Approx(0.5));
  CHECK(radial({0.5, 0.7}, 1.0) == doctest::Approx(-0.5 + std::exp(-0.5)));

  c.set("pinning.kind", "periodic");
  c.set("pinning.mean", "0.25");
  c.set("pinning.amplitude", "1");
  const Scenario p = Scenario::from_config(c);
  CHECK(p.pinning.kappa_dependent());
  CHECK(p.pinning.make()({0.125, 0.0}, 4.0) == doctest::Approx(0.25 + std::sin(2 * M_PI * 0.25)));
  CHECK(p.homogenized().kind == HomogenizedCase::Kind::Oscillating);

  c.set("pinning.kind", "sum");
  c.set("pinning.value", "1");
  c.set("pinning.slope_x", "2");
  const Scenario q = Scenario::from_config(c);
  CHECK(q.pinning.make()({0.125, 0.0}, 4.0) == doctest::Approx(1.25 + 0.25 + 1.0));
  const HomogenizedCase hq = q.homogenized();
  CHECK(hq.kind == HomogenizedCase::Kind::ShiftedPeriodic);
  CHECK(hq.pinning({0.125, 0.0}, 4.0) == doctest::Approx(1.25 + 0.25 + 1.0));

  c.set("pinning.kind", "spiral");
  CHECK(config_error_key([&] { Scenario::from_config(c); }) == "pinning.kind");

  Config f;
  f.set("field.kind", "ring");
  f.set("field.radius", "0.25");
  f.set("field.origin_x", "0.5");
  f.set("field.origin_y", "0.5");
  const auto ring = Scenario::from_config(f).field.make();
  CHECK(ring({0.75, 0.5}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ring({0.5, 0.5}) == doctest::Approx(-0.0625));
  f.set("field.kind", "linear");
  f.set("field.value", "2");
  CHECK(Scenario::from_config(f).field.make()({1.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("domains and run parameters") {
  Config c;
  c.set("domain.shape", "disk");
  c.set("domain.size", "0.5");
  c.set("run.kappa", "8,16");
  c.set("run.H", "4,8");
  const Scenario s = Scenario::from_config(c);
  CHECK(s.domain.center.x == 0.0);
  CHECK(s.kappa == std::vector<double>{8, 16});
  CHECK(s.H == std::vector<double>{4, 8});
  const GridPtr g = s.domain.build_for(16.0, 8.0, s.sup_field());
  CHECK(g->h() <= 0.35 / 16.0 + 1e-12);
  for (std::size_t k = 0; k < g->size(); ++k)
    if (g->inside(k)) CHECK(std::hypot(g->node(k).x, g->node(k).y) <= 0.5);

  c.set("domain.n", "20");
  const GLData d = Scenario::from_config(c).data(16.0, 8.0);
  CHECK(d.grid()->nx() == 20);

  c.set("run.kappa", "8,-1");
  CHECK(config_error_key([&] { Scenario::from_config(c); }) == "run.kappa");
  c.set("run.kappa", "");
  CHECK(config_error_key([&] { Scenario::from_config(c); }) == "run.kappa");
  c.set("run.kappa", "8");
  c.set("domain.shape", "hexagon");
  CHECK(config_error_key([&] { Scenario::from_config(c); }) == "domain.shape");
}

TEST_CASE("scenario data is reproducible") {
  Config c;
  c.set("pinning.kind", "linear");
  c.set("pinning.slope_x", "-1");
  c.set("domain.n", "24");
  const Scenario s = Scenario::from_config(c);
  const GLData d1 = s.data(10.0, 5.0), d2 = s.data(10.0, 5.0);
  CHECK(d1.a.values() == d2.a.values());
  CHECK(d1.F().xs() == d2.F().xs());
  CHECK(d1.F().ys() == d2.F().ys());
}
