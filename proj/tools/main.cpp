// pgl: scenario runner for the pinned Ginzburg-Landau computations.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "pgl/acceptance.hpp"
#include "pgl/criticalfields.hpp"
#include "pgl/scenario.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pgl;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kAcceptance = 4 };

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  long seed = -1;
  int workers = 1;
  std::string fhat_table;
};

struct Run {
  Common common;
  Config config;
  std::string dir;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void init(const std::string& command) {
    if (!common.config_path.empty()) config = Config::load(common.config_path);
    for (const auto& s : common.sets) config.set_assignment(s);
    if (common.seed >= 0) config.set("seed", std::to_string(common.seed));
    dir = common.out.empty() ? config.get("output.dir", "out") : common.out;
    fs::create_directories(dir);
    name = command;
  }

  std::string path(const std::string& file) {
    outputs.push_back(file);
    return (fs::path(dir) / file).string();
  }

  void write_json(const std::string& file, const json& j) {
    std::ofstream os(path(file));
    os << std::setw(2) << j << '\n';
  }

  void manifest(int status) {
    json m;
    m["command"] = name;
    std::ostringstream h;
    h << std::hex << std::setw(16) << std::setfill('0') << config.hash();
    m["config_hash"] = h.str();
    m["config"] = config.values();
    m["seed"] = config.integer("seed", 1);
    m["workers"] = common.workers;
    m["versions"] = {{"pgl", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__}};
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m["outputs"] = outputs;
    m["status"] = status;
    std::ofstream os((fs::path(dir) / "manifest.json").string());
    os << std::setw(2) << m << '\n';
  }

  std::string name;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "scenario file (key = value, dotted sections)")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "override a config key, key=value");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--workers", c.workers, "worker count (recorded; sweeps run in order)");
}

FhatTable load_or_build_fhat(const Run& r) {
  const std::string p = r.common.fhat_table.empty() ? r.config.get("fhat.table", "") : r.common.fhat_table;
  if (!p.empty()) return read_fhat_csv(p);
  TableOptions o;
  o.R = r.config.number("fhat.R", 12.0);
  o.seeds = static_cast<int>(r.config.integer("fhat.seeds", 1));
  return build_fhat_table(default_b_grid(), o);
}

SolverOptions solver_options(const Config& c) {
  SolverOptions o;
  o.method = c.get("solver.method", "ncg") == "bb" ? DescentMethod::BB : DescentMethod::NCG;
  o.tol = c.number("solver.tol", 0.0);
  o.max_iter = static_cast<int>(c.integer("solver.max_iter", o.max_iter));
  o.seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  return o;
}

std::vector<double> H_list(const Scenario& s, double kappa) {
  if (!s.H.empty()) return s.H;
  if (s.sigma_hat > 0.0) return {s.sigma_hat * kappa * kappa};
  return {s.sigma * kappa};
}

json spectral_json(const SpectralResult& r) {
  json hist = json::array();
  for (const auto& [h, v] : r.refinement_history) hist.push_back({h, v});
  return {{"value", r.value},          {"minimizer_param", std::isfinite(r.minimizer_param) ? json(r.minimizer_param) : json()},
          {"truncation", r.truncation}, {"grid", r.grid},
          {"residual", r.residual},     {"refinement_history", hist},
          {"flagged", r.flagged},       {"note", r.note}};
}

// Subcommands ---------------------------------------------------------------

int cmd_fhat(Run& r, const std::string& b_grid, double R, int seeds) {
  std::vector<double> grid = b_grid == "default" ? default_b_grid() : r.config.numbers("fhat.b", {});
  if (b_grid != "default") {
    Config tmp;
    tmp.set("fhat.b_grid", b_grid);
    grid = tmp.numbers("fhat.b_grid", {});
  }
  TableOptions o;
  o.R = R;
  o.seeds = seeds;
  o.rng_seed = static_cast<std::uint64_t>(r.config.integer("seed", 2024));
  const FhatTable t = build_fhat_table(grid, o);
  write_fhat_csv(t, r.path("fhat_table.csv"));
  return kOk;
}

int cmd_cell(Run& r, double b, double R, double alpha, const std::string& bc, int n) {
  CellProblem p;
  p.b = b;
  p.R = R;
  p.alpha = alpha;
  if (bc != "dirichlet" && bc != "neumann") throw ConfigError("--bc", "expected dirichlet or neumann");
  p.bc = bc == "dirichlet" ? BoundaryCondition::Dirichlet : BoundaryCondition::Neumann;
  p.resolution = n > 0 ? n : default_resolution(b, R);
  CellOptions co;
  co.rng_seed = static_cast<std::uint64_t>(r.config.integer("seed", 12345));
  const CellMinimum m = minimize_cell(p, co);
  ScalarField2D mod(m.u.grid_ptr());
  for (std::size_t k = 0; k < mod.size(); ++k) mod[k] = std::abs(m.u[k]);
  write_csv(mod, r.path("cell_modulus.csv"));
  r.write_json("cell.json", {{"b", b},
                             {"R", R},
                             {"alpha", alpha},
                             {"bc", bc},
                             {"resolution", p.resolution},
                             {"energy", m.energy},
                             {"energy_per_area", m.energy / (R * R)},
                             {"residual", m.residual},
                             {"converged", m.converged},
                             {"iterations", m.iterations}});
  return m.converged ? kOk : kNumerical;
}

int cmd_minimize(Run& r, bool frozen) {
  const Scenario s = Scenario::from_config(r.config);
  const SolverOptions opt = solver_options(r.config);
  std::ofstream os(r.path("minimize.csv"));
  os.precision(12);
  os << "kappa,H,nodes,energy,energy_per_k2,converged,iterations,psi_eq,current_eq,neumann,field_bc,"
        "sup_psi2,kinetic_ratio,curl_ratio,normal\n";
  bool all = true;
  for (double kappa : s.kappa)
    for (double H : H_list(s, kappa)) {
      const GLData d = s.data(kappa, H);
      const GLState st = frozen ? minimize_frozen(d, kappa, H, nullptr, opt) : minimize_coupled(d, kappa, H, nullptr, opt);
      const Diagnostics g = diagnostics(st, d);
      all = all && st.converged;
      os << kappa << ',' << H << ',' << d.grid()->nx() << ',' << st.energy << ',' << st.energy / (kappa * kappa) << ','
         << st.converged << ',' << st.iterations << ',' << st.residuals.psi_eq << ',' << st.residuals.current_eq << ','
         << st.residuals.neumann << ',' << st.residuals.field_bc << ',' << g.sup_psi2 << ',' << g.kinetic_ratio << ','
         << g.curl_ratio << ',' << g.normal << '\n';
      std::ostringstream name;
      name << "state_k" << kappa << "_H" << H << ".chk";
      write_checkpoint(st, r.path(name.str()));
    }
  return all ? kOk : kNumerical;
}

int cmd_energy_compare(Run& r) {
  const Scenario s = Scenario::from_config(r.config);
  const FhatTable t = load_or_build_fhat(r);
  auto setup = [&](double kappa) { return s.data(kappa, s.sigma * kappa); };
  const EnergyComparison c = compare_energy(setup, s.kappa, s.sigma, t, solver_options(r.config));
  write_comparison_csv(c, r.path("energy_compare.csv"));
  bool conv = true;
  for (const auto& row : c.rows) conv = conv && row.converged;
  return conv ? kOk : kNumerical;
}

int cmd_psi4(Run& r, double margin) {
  const Scenario s = Scenario::from_config(r.config);
  const FhatTable t = load_or_build_fhat(r);
  std::ofstream os(r.path("psi4.csv"));
  os.precision(12);
  os << "kappa,H,psi4_D,prediction,area_D\n";
  bool conv = true;
  for (double kappa : s.kappa)
    for (double H : H_list(s, kappa)) {
      const GLData d = s.data(kappa, H);
      const GLState st = minimize_coupled(d, kappa, H, nullptr, solver_options(r.config));
      conv = conv && st.converged;
      const Grid2D& g = *d.grid();
      // D: inside nodes at distance > margin from the bounding box of the domain.
      double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
      for (std::size_t k = 0; k < g.size(); ++k)
        if (g.inside(k)) {
          const Point p = g.node(k);
          xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
          ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
        }
      Mask D(g.size(), 0);
      ScalarField2D p4(d.grid()), one(d.grid(), 1.0);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const Point p = g.node(k);
        D[k] = g.inside(k) && p.x > xmin + margin && p.x < xmax - margin && p.y > ymin + margin && p.y < ymax - margin;
        p4[k] = std::norm(st.psi[k]) * std::norm(st.psi[k]);
      }
      os << kappa << ',' << H << ',' << integrate(p4, D) << ',' << psi4_prediction(D, d.a, d.B0, kappa, H, t) << ','
         << integrate(one, D) << '\n';
    }
  return conv ? kOk : kNumerical;
}

int cmd_mu1(Run& r) {
  const Scenario s = Scenario::from_config(r.config);
  std::ofstream os(r.path("mu1.csv"));
  os.precision(12);
  os << "kappa,H,nodes,mu1,residual,flagged\n";
  bool ok = true;
  for (double kappa : s.kappa)
    for (double H : H_list(s, kappa)) {
      const GLData d = s.data(kappa, H);
      const SpectralResult m = mu1(kappa, H, d.a, d.F());
      ok = ok && !m.flagged;
      os << kappa << ',' << H << ',' << d.grid()->nx() << ',' << m.value << ',' << m.residual << ',' << m.flagged << '\n';
    }
  return ok ? kOk : kNumerical;
}

int cmd_theta0(Run& r, double tol, int n0) {
  const SpectralResult t = theta0(tol, n0);
  r.write_json("theta0.json", spectral_json(t));
  return t.flagged ? kNumerical : kOk;
}

int cmd_montgomery(Run& r, double tol, int n0, double T, const std::vector<double>& scan) {
  const SpectralResult l = lambda0(tol, n0, T);
  r.write_json("montgomery.json", spectral_json(l));
  if (!scan.empty()) {
    if (scan.size() != 3 || scan[2] < 2) throw ConfigError("--tau-scan", "expected lo,hi,count");
    std::ofstream os(r.path("montgomery_scan.csv"));
    os.precision(12);
    os << "tau,lambda,nodes\n";
    const int n = static_cast<int>(scan[2]);
    for (int k = 0; k < n; ++k) {
      const double tau = scan[0] + (scan[1] - scan[0]) * k / (n - 1);
      os << tau << ',' << montgomery_lambda(tau, T, n0) << ',' << montgomery_ground_nodes(tau, T, n0) << '\n';
    }
  }
  return l.flagged ? kNumerical : kOk;
}

int cmd_halfplane(Run& r, double L, int n, double theta) {
  if (std::isfinite(theta)) {
    const SpectralResult s = halfplane_lambda(theta, L, n);
    r.write_json("halfplane.json", spectral_json(s));
    return s.flagged ? kNumerical : kOk;
  }
  const HalfplaneTable t = build_halfplane_table(L, n, lambda0().value);
  write_halfplane_csv(t, r.path("halfplane.csv"));
  return kOk;
}

// Presets for the two field classes; a scenario file overrides them.
Scenario hc3_scenario(Run& r, const std::string& which) {
  Config& c = r.config;
  if (which == "vanishing") {
    auto dflt = [&](const std::string& k, const std::string& v) {
      if (!c.has(k)) c.set(k, v);
    };
    dflt("domain.center_x", "0");
    dflt("domain.center_y", "0");
    dflt("field.kind", "linear");
  } else if (which == "constant") {
    if (!c.has("domain.shape")) c.set("domain.shape", "disk");
    if (!c.has("domain.resolution")) c.set("domain.resolution", "0.2");
  } else if (which != "scenario") {
    throw ConfigError("--case", "expected vanishing, constant or scenario");
  }
  return Scenario::from_config(c);
}

int cmd_hc3(Run& r, const std::string& which, double kappa, std::vector<double> bracket, double tol,
            const std::string& cache) {
  const Scenario s = hc3_scenario(r, which);
  const SpectralConstants sc = spectral_constants(cache);
  // Locate the field class on a coarse grid, then size the run grid from the formula.
  const GLData coarse = s.data_on(s.domain.build(64), kappa);
  const GammaData g0 = gamma_extract(coarse.B0);
  const HC3Formula f0 = hc3_formula(coarse.a, coarse.B0, kappa, g0.empty() ? nullptr : &g0, sc);
  if (f0.no_superconductivity) {
    r.write_json("hc3.json", {{"kappa", kappa}, {"formula_value", 0.0}, {"no_superconductivity", true}});
    return kOk;
  }
  const GLData d = s.data(kappa, 1.3 * f0.value);
  const GammaData gamma = gamma_extract(d.B0);
  const HC3Formula f = hc3_formula(d.a, d.B0, kappa, gamma.empty() ? nullptr : &gamma, sc);
  if (bracket.empty()) bracket = {0.7 * f.value, 1.3 * f.value};
  if (bracket.size() != 2) throw ConfigError("--bracket", "expected lo,hi");
  const HC3Bracket b = hc3_empirical_local(kappa, d.a, d.F(), bracket[0], bracket[1], tol);
  CriticalFieldReport rep;
  rep.kappa = kappa;
  rep.field_case = f.field_case;
  rep.formula_value = f.value;
  rep.error_scale = f.error_scale;
  rep.H_lo = b.lo;
  rep.H_hi = b.hi;
  rep.boundary_attains = f.boundary_attains;
  rep.theta0 = sc.theta0;
  rep.lambda0 = sc.lambda0;
  rep.spectral_source = sc.source;
  r.write_json("hc3.json", {{"kappa", rep.kappa},
                            {"case", rep.field_case == FieldCase::Vanishing ? "gamma_nonempty" : "gamma_empty"},
                            {"formula_value", rep.formula_value},
                            {"error_scale", rep.error_scale},
                            {"bracket", {rep.H_lo, rep.H_hi}},
                            {"mu1_at_bracket", {b.mu_lo, b.mu_hi}},
                            {"eigensolves", b.eigensolves},
                            {"bracket_expanded", b.expanded},
                            {"boundary_attains", rep.boundary_attains},
                            {"argmax", {f.argmax.x, f.argmax.y}},
                            {"nodes", d.grid()->nx()},
                            {"spectral", {{"theta0", rep.theta0},
                                          {"lambda0", rep.lambda0},
                                          {"halfplane_table", rep.spectral_source},
                                          {"halfplane_L", 12.0}}}});
  return kOk;
}

int cmd_breakdown(Run& r, double tol) {
  const Scenario s = Scenario::from_config(r.config);
  if (s.H.empty()) throw ConfigError("run.H", "breakdown needs an H grid");
  std::ofstream os(r.path("breakdown.csv"));
  os.precision(12);
  os << "kappa,H,psi_l2,converged,H_break,found\n";
  for (double kappa : s.kappa) {
    const GLData d = s.data(kappa, s.H.back());
    const BreakdownScan b = breakdown_scan(d, kappa, s.H, tol, solver_options(r.config));
    for (const auto& p : b.points)
      os << kappa << ',' << p.H << ',' << p.psi_l2 << ',' << p.converged << ',' << b.H_break << ',' << b.found << '\n';
  }
  return kOk;
}

int cmd_homogenize(Run& r, const std::vector<double>& Ms) {
  const Scenario s = Scenario::from_config(r.config);
  const HomogenizedCase hc = s.homogenized();
  const Box D{{r.config.number("homogenize.x0", 0.0), r.config.number("homogenize.y0", 0.0)},
              {r.config.number("homogenize.x1", 1.0 / 3.0), r.config.number("homogenize.y1", 1.0)}};
  const HomogenizationRate rate = homogenization_rate(hc.alpha, hc.T1, hc.T2, D, Ms);
  json out;
  out["rate"] = {{"M", rate.M}, {"error", rate.error}, {"slope", rate.slope}};
  const FhatTable t = load_or_build_fhat(r);
  json rows = json::array();
  for (double kappa : s.kappa) {
    const GridPtr g = s.domain.n > 0 ? s.domain.build(s.domain.n) : s.domain.build(std::max(64, static_cast<int>(20 * std::sqrt(kappa) * s.domain.size / hc.T1)));
    const double hom = homogenized_leading(hc, g, kappa, t), dir = direct_leading(hc, g, kappa, t);
    rows.push_back({{"kappa", kappa}, {"homogenized", hom}, {"direct", dir}, {"rel", std::abs(hom - dir) / std::abs(dir)}});
  }
  out["leading"] = rows;
  r.write_json("homogenize.json", out);
  return kOk;
}

int cmd_gamma(Run& r) {
  const Scenario s = Scenario::from_config(r.config);
  const GridPtr g = s.domain.n > 0 ? s.domain.build(s.domain.n) : s.domain.build(128);
  const ScalarField2D B = ScalarField2D::sample(g, s.field.make());
  const GammaData gd = gamma_extract(B);
  {
    std::ofstream os(r.path("gamma_points.csv"));
    os.precision(12);
    os << "x,y,grad_norm,B_near\n";
    for (const auto& p : gd.points) os << p.x.x << ',' << p.x.y << ',' << p.grad_norm << ',' << p.B_near << '\n';
  }
  {
    std::ofstream os(r.path("gamma_crossings.csv"));
    os.precision(12);
    os << "x,y,grad_norm,theta,normal_x,normal_y\n";
    for (const auto& c : gd.crossings)
      os << c.point.x.x << ',' << c.point.x.y << ',' << c.point.grad_norm << ',' << c.theta << ',' << c.normal.x << ','
         << c.normal.y << '\n';
  }
  r.write_json("gamma.json", {{"points", gd.points.size()}, {"crossings", gd.crossings.size()}, {"violation", gd.violation}});
  return gd.violation ? kNumerical : kOk;
}

int cmd_verify(Run& r, const std::vector<int>& only, const std::string& cache) {
  AcceptanceOptions o;
  o.only = only;
  o.cache_dir = cache;
  bool all = true;
  std::ofstream os(r.path("verify.txt"));
  run_acceptance(o, [&](const CriterionResult& c) {
    const std::string line = format_result(c);
    std::cout << line << std::endl;
    os << line << '\n';
    all = all && c.pass;
  });
  return all ? kOk : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pgl: pinned Ginzburg-Landau energies, spectra and critical fields"};
  app.require_subcommand(1);
  Run run;
  Common& c = run.common;

  auto* fhat = app.add_subcommand("fhat", "tabulate the bulk energy density");
  std::string b_grid = "default";
  double fhat_R = 12.0;
  int fhat_seeds = 1;
  fhat->add_option("--b-grid", b_grid, "'default' or a comma list of b values in (0,1]");
  fhat->add_option("--R", fhat_R, "cell side (a second run at 1.5 R extrapolates)");
  fhat->add_option("--seeds", fhat_seeds, "random restarts per b");

  auto* cell = app.add_subcommand("cell", "minimise one reference cell");
  double cb = 0.5, cR = 10.0, calpha = 1.0;
  std::string cbc = "dirichlet";
  int cn = 0;
  cell->add_option("--b", cb);
  cell->add_option("--R", cR);
  cell->add_option("--alpha", calpha);
  cell->add_option("--bc", cbc, "dirichlet or neumann");
  cell->add_option("--n", cn, "nodes per side (0 = automatic)");

  auto* minimize = app.add_subcommand("minimize", "minimise the energy for each (kappa, H)");
  bool frozen = false;
  minimize->add_flag("--frozen", frozen, "keep A = F");

  auto* energy = app.add_subcommand("energy-compare", "minimum energy against the leading term");
  auto* psi4 = app.add_subcommand("psi4", "interior |psi|^4 against the prediction");
  double margin = 0.2;
  psi4->add_option("--margin", margin, "distance of D from the domain's bounding box");

  auto* mu1c = app.add_subcommand("mu1", "lowest eigenvalue of the linearised operator");

  auto* th = app.add_subcommand("theta0", "de Gennes constant");
  double th_tol = 1e-6;
  int th_n = 400;
  th->add_option("--tol", th_tol);
  th->add_option("--n", th_n);

  auto* mont = app.add_subcommand("montgomery", "Montgomery constant");
  double mo_tol = 1e-6, mo_T = 8.0;
  int mo_n = 400;
  std::vector<double> tau_scan;
  mont->add_option("--tol", mo_tol);
  mont->add_option("--n", mo_n);
  mont->add_option("--T", mo_T);
  mont->add_option("--tau-scan", tau_scan, "lo hi count")->expected(3)->delimiter(',');

  auto* hp = app.add_subcommand("halfplane", "half-plane ground energies");
  double hp_L = 12.0, hp_theta = std::nan("");
  int hp_n = 10;
  hp->add_option("--L", hp_L);
  hp->add_option("--n", hp_n, "nodes per unit length");
  hp->add_option("--theta", hp_theta, "single angle in (0, pi); omitted builds the table");

  auto* hc3 = app.add_subcommand("hc3", "H_C3 formula and eigenvalue bracket");
  std::string hc3_case = "scenario", spectral_cache;
  double hc3_kappa = 8.0, hc3_tol = 1e-3;
  std::vector<double> hc3_bracket;
  hc3->add_option("--case", hc3_case, "vanishing, constant or scenario");
  hc3->add_option("--kappa", hc3_kappa);
  hc3->add_option("--bracket", hc3_bracket, "lo,hi")->delimiter(',');
  hc3->add_option("--tol", hc3_tol, "bracket width over kappa");
  hc3->add_option("--spectral-cache", spectral_cache, "half-plane table CSV (read, or written when absent)");

  auto* brk = app.add_subcommand("breakdown", "first H with a normal minimiser");
  double brk_tol = 1e-3;
  brk->add_option("--tol", brk_tol, "threshold for ||psi||_2");

  auto* hom = app.add_subcommand("homogenize", "oscillation averaging rate and homogenised leading term");
  std::vector<double> Ms{8, 16, 32, 64};
  hom->add_option("--M", Ms, "oscillation scales")->delimiter(',');

  auto* gam = app.add_subcommand("gamma", "zero set of the applied field");

  auto* ver = app.add_subcommand("verify", "run the acceptance criteria");
  std::vector<int> only;
  std::string ver_cache = "acceptance_cache";
  ver->add_option("--only", only)->delimiter(',');
  ver->add_option("--cache", ver_cache);

  for (auto* sub : {fhat, cell, minimize, energy, psi4, mu1c, th, mont, hp, hc3, brk, hom, gam, ver}) add_common(sub, c);
  for (auto* sub : {energy, psi4, hom}) sub->add_option("--fhat-table", c.fhat_table, "cached table CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  int status = kOk;
  try {
    run.init(sub->get_name());
    if (sub == fhat) status = cmd_fhat(run, b_grid, fhat_R, fhat_seeds);
    else if (sub == cell) status = cmd_cell(run, cb, cR, calpha, cbc, cn);
    else if (sub == minimize) status = cmd_minimize(run, frozen);
    else if (sub == energy) status = cmd_energy_compare(run);
    else if (sub == psi4) status = cmd_psi4(run, margin);
    else if (sub == mu1c) status = cmd_mu1(run);
    else if (sub == th) status = cmd_theta0(run, th_tol, th_n);
    else if (sub == mont) status = cmd_montgomery(run, mo_tol, mo_n, mo_T, tau_scan);
    else if (sub == hp) status = cmd_halfplane(run, hp_L, hp_n, hp_theta);
    else if (sub == hc3) status = cmd_hc3(run, hc3_case, hc3_kappa, hc3_bracket, hc3_tol, spectral_cache);
    else if (sub == brk) status = cmd_breakdown(run, brk_tol);
    else if (sub == hom) status = cmd_homogenize(run, Ms);
    else if (sub == gam) status = cmd_gamma(run);
    else if (sub == ver) status = cmd_verify(run, only, ver_cache);
    for (const auto& k : run.config.unused()) std::cerr << "warning: unused config key " << k << '\n';
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    status = kConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    status = kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    status = kNumerical;
  }
  if (!run.dir.empty()) run.manifest(status);
  return status;
}
