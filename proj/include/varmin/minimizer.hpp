#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "varmin/functional.hpp"
#include "varmin/integrand.hpp"
#include "varmin/mesh.hpp"

namespace varmin {

// Relative width of the band, (band)·max(1, |F|), below which changes in F
// are treated as rounding noise by the line search.
inline constexpr double kLineSearchRoundingBand = 1e-13;

enum class DescentMethod { GradientDescent, LBFGS };
enum class MinimizeStatus { Converged, MaxIters, Diverged };

const char* to_string(MinimizeStatus s);
const char* to_string(DescentMethod m);

struct MinimizeOptions {
  DescentMethod method = DescentMethod::GradientDescent;
  double gtol = 1e-8;
  int max_iters = 10000;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  int lbfgs_memory = 10;
  bool record_trace = false;
  // Exponent of the seminorm ‖∇(u - reference)‖_p recorded per iteration.
  double trace_norm_p = 2.0;
};

struct IterationRecord {
  int iter = 0;
  double F = 0.0;
  double gnorm = 0.0;
  double step = 0.0;
  double seminorm = 0.0;  // ‖∇(u_k − reference)‖_p, when a reference is given
};

struct LevelRecord {
  int level = 0;
  std::size_t dofs = 0;
  double F = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  double seminorm = 0.0;  // ‖∇u‖_p of the level's final iterate
  // ‖∇(u_l − P u_{l−1})‖_p / ‖∇u_l‖_p against the prolonged previous
  // minimizer; 0 on level 0.
  double level_change = 0.0;
  MinimizeStatus status = MinimizeStatus::Converged;
  std::vector<IterationRecord> trace;
};

// Boundary data as a closed-form trace g evaluated at boundary vertices.
using BoundaryData = std::function<double(const Vec&)>;

// Descent from u_init with backtracking Armijo line search. Boundary
// coefficients of u_init are never modified. `reference` (typically the
// extension u0 of the boundary data) is only used for the per-iteration
// seminorm trace.
std::pair<FemField, LevelRecord> minimize_fixed(const Integrand& f, const FemField& u_init,
                                                const MinimizeOptions& opts,
                                                const FemField* reference = nullptr);

// Overwrites the boundary coefficients of u with g.
void apply_dirichlet(FemField& u, const BoundaryData& g);

struct RefiningProblem {
  MeshPtr mesh;             // level-0 mesh
  BoundaryData boundary;    // trace of u0
  FemField initial;         // on `mesh`, satisfying the boundary data
  MinimizeOptions options;
  // On levels ≥ 1, descent also restarts `perturb_trials` times from the
  // prolonged field with interior values perturbed by amplitude·U(−1, 1);
  // the lowest converged F is kept (amplitude 0 disables).
  double perturb_amplitude = 0.0;
  int perturb_trials = 1;
  std::uint64_t seed = kDefaultSeed;
};

struct MinimizationReport {
  std::vector<LevelRecord> levels;
  FemField final_field;
  MinimizeStatus status = MinimizeStatus::Converged;
  bool monotone = true;  // F non-increasing across levels (1e-12 slack)
  double lower_bound = 0.0;
  bool nonattainment = false;
};

MinimizationReport minimize_refining(const Integrand& f, const RefiningProblem& problem, int levels);

// At least three levels, all converged, final F more than 10·gtol above
// lower_bound, and the discrete minimizers do not settle: the last level's
// relative change is at least `change_threshold` and at least 0.75 times
// the previous level's.
bool nonattainment_signature(const std::vector<LevelRecord>& levels, double lower_bound, double gtol,
                             double change_threshold = 0.1);

}  // namespace varmin
