#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pgl/asymptotics.hpp"

namespace pgl {

struct ConfigError : InputError {
  ConfigError(const std::string& key, const std::string& what)
      : InputError(key.empty() ? what : key + ": " + what), key(key) {}
  std::string key;
};

/**
 * Flat `key = value` text with dotted section names.  `#` starts a comment;
 * `[name]` lines prefix the following keys with `name.`.  Lists are comma
 * separated.  Keys are kept sorted, so the text dump (and its hash) does not
 * depend on the order of lines in the file.
 */
class Config {
 public:
  static Config parse(std::istream& is, const std::string& source = "<config>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// `key=value` as given on the command line.
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  /// Keys nothing has read so far; usually typos.
  std::vector<std::string> unused() const;

  std::string dump() const;
  std::uint64_t hash() const;  // FNV-1a of dump()
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> touched_;
  const std::string* find(const std::string& key) const;
};

/// Regular-lattice samples read from CSV rows x,y,value, evaluated bilinearly (clamped at the edges).
class Tabulated2D {
 public:
  static Tabulated2D read_csv(const std::string& path);
  double operator()(Point p) const;

 private:
  std::vector<double> xs_, ys_, v_;
};

struct DomainSpec {
  std::string shape = "square";  // square or disk
  double size = 1.0;             // side or radius
  Point center{0.5, 0.5};
  int n = 0;                     // nodes per side; 0 picks a resolved grid per (kappa, H)
  double resolution = 0.35;      // h <= resolution * min(1/sqrt(kappa H |B0|), 1/kappa)

  GridPtr build(int nodes) const;
  /// Auto grid for a run at (kappa, H); n when fixed.
  GridPtr build_for(double kappa, double H, double sup_B) const;
};

struct PinningSpec {
  std::string kind = "constant";  // constant, linear, radial, periodic, sum, tabulated
  double value = 1.0;             // constant level, or the base of linear/radial/sum
  Point slope{0.0, 0.0};          // linear
  Point center{0.5, 0.5};         // radial
  double amplitude = 0.0;         // radial, periodic
  double width = 0.1;             // radial
  double mean = 1.0;              // periodic profile 'mean + amplitude sin(2 pi t1 / T1)'
  double T1 = 1.0, T2 = 1.0;
  std::string file;               // tabulated

  bool kappa_dependent() const { return kind == "periodic" || kind == "sum"; }
  std::function<double(Point, double)> make() const;
  PeriodicFunction profile() const;
};

struct FieldSpec {
  std::string kind = "constant";  // constant, linear, ring, tabulated
  double value = 1.0;             // constant level, or linear/ring gradient scale
  Point origin{0.0, 0.0};         // linear: value (x1 - origin.x); ring: value (|x - origin|^2 - radius^2)
  double radius = 0.5;
  std::string file;

  std::function<double(Point)> make() const;
};

struct Scenario {
  DomainSpec domain;
  PinningSpec pinning;
  FieldSpec field;
  std::vector<double> kappa{10.0};
  double sigma = 0.5;
  double sigma_hat = 0.0;
  std::vector<double> H;  // explicit H grid, empty when derived from sigma
  std::uint64_t seed = 1;
  std::string output = "out";
  Config config;

  /// Reads the `domain.`, `pinning.`, `field.`, `run.`, `output.` and `seed` keys.
  static Scenario from_config(const Config& c);

  /// sup |B0| over a fine sample of the domain.
  double sup_field() const;
  GLData data(double kappa, double H) const;
  GLData data_on(const GridPtr& grid, double kappa) const;
  HomogenizedCase homogenized() const;
};

}  // namespace pgl
