#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "varmin/integrand.hpp"
#include "varmin/minimizer.hpp"
#include "varmin/semicont.hpp"

namespace varmin {

// Malformed problem file. `where` is "line L, column C" for syntax errors
// and a JSON pointer (plus the line of its last key when found) otherwise.
class SpecError : public std::runtime_error {
 public:
  SpecError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct BoundarySpec {
  enum class Kind { Zero, Linear, ProductXY };
  Kind kind = Kind::Zero;
  double offset = 0.0;          // linear: offset + slope·x
  Vec slope{0.0, 0.0};
  double scale = 1.0;           // product-xy: scale·x·y

  BoundaryData function() const;
};

struct InitialSpec {
  enum class Kind { Trace, ZeroInterior, RandomInterior };
  Kind kind = Kind::ZeroInterior;
  double amplitude = 0.1;
  double level_amplitude = 0.0;  // re-perturbation after each prolongation
  int level_trials = 1;
};

struct ProbeSpec {
  double u_max = 10.0;
  double xi_max = 20.0;
  bool far_field = true;
  std::size_t samples = 2000;
  double tol = 1e-9;
};

struct SemicontSpec {
  SequenceKind sequence = SequenceKind::Sawtooth;
  std::vector<int> ks;
  SequenceResolution resolution;
  double p = 2.0;                    // exponent for weak-convergence norms
  double q = 2.0;
  int truncation_levels = 8;         // j = 1..truncation_levels
  std::optional<LscVerdict> expect;
};

struct LemmaSpec {
  enum class Function { Identity, SignStep, Sine };
  enum class Cells { Dyadic, Odd };
  Function function = Function::Identity;
  Cells cells = Cells::Dyadic;
  double eps = 0.01;
  int levels = 12;
  int sample_resolution = 4096;      // interpolation mesh for non-affine u
};

struct ProblemSpec {
  Domain domain = Domain::interval(0.0, 1.0);
  std::string integrand = "dirichlet";
  IntegrandParams params;
  std::optional<double> p, q;
  std::optional<GrowthCertificate> growth;  // full constants given
  bool check_convexity = true;
  bool check_growth = true;
  BoundarySpec boundary;
  InitialSpec initial;
  int resolution = 4;
  int levels = 3;
  MinimizeOptions solver;
  ProbeSpec probe;
  std::uint64_t seed = kDefaultSeed;
  std::optional<SemicontSpec> semicont;
  std::optional<LemmaSpec> lemma;

  Integrand make_integrand() const;
  ProbeBox probe_box() const;
};

// Parses and validates. Throws SpecError.
ProblemSpec parse_problem(const std::string& text);
ProblemSpec load_problem(const std::string& path);

}  // namespace varmin
