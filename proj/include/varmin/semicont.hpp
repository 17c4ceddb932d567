#pragma once

#include <span>
#include <string>
#include <vector>

#include "varmin/functional.hpp"
#include "varmin/integrand.hpp"
#include "varmin/mesh.hpp"

namespace varmin {

// A possibly discontinuous piecewise-affine function on an interval: piece i
// runs over [breaks[i], breaks[i+1]] from left[i] to right[i].
struct PiecewiseLinear1D {
  std::vector<double> breaks;
  std::vector<double> left, right;

  static PiecewiseLinear1D from_field(const FemField& u);
  static PiecewiseLinear1D step(const std::vector<double>& breaks, const std::vector<double>& values);

  double integral(double lo, double hi) const;
};

// Piecewise-constant function on a partition.
struct StepFunction {
  Partition partition;
  std::vector<double> values;
};

// u_P = Σ χ_{P_j} ⨍_{P_j} u. Means are exact for piecewise-affine input.
StepFunction partition_average(const PiecewiseLinear1D& u, const Partition& P);
// 1D fields are averaged exactly; in 2D each triangle is assigned to the
// partition cell containing its centroid, which is exact when the
// partition cells are unions of mesh cells.
StepFunction partition_average(const FemField& u, const Partition& P);

// |{x : |u(x) − u_P(x)| > eps}|, computed in closed form piece by piece.
double measure_deviation(const PiecewiseLinear1D& u, const StepFunction& uP, double eps);

enum class SequenceKind { Sawtooth, ModulatedSawtooth, StrongPerturbation };
const char* to_string(SequenceKind k);
SequenceKind sequence_kind_from_string(const std::string& s);

struct SequenceMember {
  int k = 0;
  FemField u;      // u_k
  FemField limit;  // weak limit, interpolated on u_k's mesh
};

// Throws Error(InvalidResolution) unless resolution is a multiple of 2k,
// Error(InvalidDomain) for non-interval domains.
SequenceMember make_sequence(SequenceKind kind, const Domain& domain, int k, int resolution);
// Mesh resolution used for member k: `fixed` when positive, else 2k·factor.
struct SequenceResolution {
  int factor = 2;
  int fixed = 0;
  int operator()(int k) const { return fixed > 0 ? fixed : 2 * k * factor; }
};

struct DictionaryElement {
  enum class Kind { Indicator, Monomial };
  Kind kind = Kind::Monomial;
  double lo = 0.0, hi = 0.0;  // indicator support
  int degree = 0;             // monomial degree
  std::string label() const;
  // ∫_l^r φ(x) dx.
  double integral(double l, double r) const;
};

// Indicators of dyadic cells of depth 0..max_depth, then monomials 0..max_degree.
std::vector<DictionaryElement> default_dictionary(const Domain& domain, int max_depth = 6,
                                                  int max_degree = 3);

struct WeakConvergenceRow {
  int k = 0;
  double grad_p_norm = 0.0;      // ‖∇u_k‖_p
  double dictionary_max = 0.0;   // max_φ |∫(∇u_k − ∇u)·φ|
  double lq_distance = 0.0;      // ‖u_k − u‖_q
};

struct WeakConvergenceReport {
  std::vector<WeakConvergenceRow> rows;
  std::size_t dictionary_size = 0;
  double sup_grad_norm = 0.0;
  double dictionary_tail = 0.0;  // max over the last quartile of k
  double lq_tail = 0.0;
  bool bounded = false;
  bool weak_gradients = false;
  bool strong_lq = false;
};

WeakConvergenceReport weak_convergence_witness(SequenceKind kind, const Domain& domain,
                                               const std::vector<int>& ks, double p, double q,
                                               const SequenceResolution& resolution,
                                               const std::vector<DictionaryElement>& dictionary);

enum class LscVerdict { Consistent, Violated };
const char* to_string(LscVerdict v);
LscVerdict verdict_from_string(const std::string& s);

struct SemicontinuityReport {
  std::string functional;
  SequenceKind kind = SequenceKind::Sawtooth;
  std::vector<std::pair<int, double>> table;  // (k, F(u_k))
  double F_limit = 0.0;
  double liminf = 0.0;   // min over the last quartile of k
  int liminf_from_k = 0;
  double tol = 0.0;      // quadrature error estimate
  LscVerdict verdict = LscVerdict::Consistent;
};

SemicontinuityReport liminf_check(const Integrand& f, SequenceKind kind, const Domain& domain,
                                  const std::vector<int>& ks,
                                  const SequenceResolution& resolution = {});

struct ChebyshevCheck {
  double t = 0.0;
  double measure = 0.0;          // |{|v| > t}|
  double measure_nonstrict = 0.0;  // |{|v| ≥ t}|
  double lhs = 0.0;              // Σ_{|v|>t} |cell|·t^p
  double moment = 0.0;           // Σ |cell|·|v|^p
  double bound = 0.0;            // moment / t^p
  bool holds = false;            // lhs ≤ moment, compared exactly
};

// Chebyshev inequality for piecewise-constant |v| with the given cell measures.
ChebyshevCheck chebyshev_check(std::span<const double> values, std::span<const double> measures,
                               double t, double p);
// Truncation-set measure for v = ∇u (piecewise constant on mesh cells).
ChebyshevCheck truncation_measures(const FemField& u, int j, double p);

// f(x0, u0, ⨍v) − ⨍ f(x0, u0, v) over a weighted sample of gradient values.
double jensen_gap(const Integrand& f, const Vec& x0, double u0, std::span<const Vec> values,
                  std::span<const double> weights);
// Max over partition cells of the Jensen gap of v = ∇u. Cells are grouped
// as in partition_average.
double jensen_cell_check(const Integrand& f, const Vec& x0, double u0, const FemField& u,
                         const Partition& P);

}  // namespace varmin
