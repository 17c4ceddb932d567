#include "varmin/minimizer.hpp"

#include <cmath>
#include <deque>
#include <random>

#include "varmin/error.hpp"

namespace varmin {

const char* to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::Converged: return "converged";
    case MinimizeStatus::MaxIters: return "max-iters";
    case MinimizeStatus::Diverged: return "diverged";
  }
  return "unknown";
}

const char* to_string(DescentMethod m) {
  return m == DescentMethod::LBFGS ? "lbfgs" : "gradient-descent";
}

namespace {

constexpr double kSettleRatio = 0.75;

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::deque<Pair>& mem) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    q *= last.s.dot(last.y) / last.y.dot(last.y);
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return -q;
}

double seminorm_to(const FemField& u, const FemField* ref, double p) {
  if (!ref) return 0.0;
  return w1p_seminorm(FemField(u.mesh, u.coeffs - ref->coeffs), p);
}

}  // namespace

void apply_dirichlet(FemField& u, const BoundaryData& g) {
  for (int i : u.mesh->boundary_vertices()) u.coeffs[i] = g(u.mesh->vertex(i));
}

std::pair<FemField, LevelRecord> minimize_fixed(const Integrand& f, const FemField& u_init,
                                                const MinimizeOptions& opts,
                                                const FemField* reference) {
  FemField u = u_init;
  LevelRecord rec;
  rec.level = u.mesh->level();
  rec.dofs = u.mesh->num_vertices() - u.mesh->boundary_vertices().size();

  double F = assemble_F(f, u);
  Eigen::VectorXd g = assemble_grad(f, u);
  double gnorm = g.lpNorm<Eigen::Infinity>();
  auto record = [&](int iter, double step) {
    if (!opts.record_trace) return;
    rec.trace.push_back({iter, F, gnorm, step, seminorm_to(u, reference, opts.trace_norm_p)});
  };
  record(0, 0.0);

  std::deque<Pair> memory;
  double step = 1.0;
  int iter = 0;
  rec.status = MinimizeStatus::MaxIters;
  while (true) {
    if (gnorm <= opts.gtol) {
      rec.status = MinimizeStatus::Converged;
      break;
    }
    if (iter >= opts.max_iters) break;

    Eigen::VectorXd d;
    if (opts.method == DescentMethod::LBFGS) {
      d = lbfgs_direction(g, memory);
      if (!(d.dot(g) < 0.0)) {
        memory.clear();
        d = -g;
      }
    } else {
      d = -g;
    }
    const double slope = d.dot(g);

    double t;
    if (opts.method == DescentMethod::LBFGS)
      t = memory.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
    else
      t = iter == 0 ? std::min(1.0, 1.0 / gnorm) : 2.0 * step;

    // Near a minimizer the decrease in F drops below rounding and the
    // sufficient-decrease test on F values turns into a coin flip. When the
    // predicted decrease is inside that noise band a step is accepted on
    // the approximate Armijo condition φ'(t) ≤ (2σ − 1) φ'(0), provided F
    // stays within the band and ‖g‖ shrinks.
    const double noise = kLineSearchRoundingBand * std::max(1.0, std::abs(F));
    bool accepted = false;
    FemField trial = u;
    double F_trial = F;
    Eigen::VectorXd g_new;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      trial.coeffs = u.coeffs + t * d;
      try {
        F_trial = assemble_F(f, trial);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EvaluationError) throw;
        t *= opts.backtrack;
        continue;
      }
      if (-t * slope > noise) {
        if (F_trial < F && F_trial <= F + opts.armijo * t * slope) {
          accepted = true;
          break;
        }
      } else if (F_trial <= F + noise) {
        g_new = assemble_grad(f, trial);
        if (g_new.dot(d) <= (2.0 * opts.armijo - 1.0) * slope && g_new.norm() < g.norm()) {
          accepted = true;
          break;
        }
        g_new.resize(0);
      }
      t *= opts.backtrack;
    }
    if (!accepted) {
      rec.status = MinimizeStatus::Diverged;
      break;
    }

    if (g_new.size() == 0) g_new = assemble_grad(f, trial);
    if (opts.method == DescentMethod::LBFGS) {
      Pair pr{trial.coeffs - u.coeffs, g_new - g, 0.0};
      const double sy = pr.s.dot(pr.y);
      if (sy > 1e-12 * pr.s.norm() * pr.y.norm()) {
        pr.rho = 1.0 / sy;
        memory.push_back(std::move(pr));
        if (static_cast<int>(memory.size()) > opts.lbfgs_memory) memory.pop_front();
      }
    }
    u = std::move(trial);
    F = F_trial;
    g = std::move(g_new);
    gnorm = g.lpNorm<Eigen::Infinity>();
    step = t;
    ++iter;
    record(iter, t);
  }

  rec.F = F;
  rec.grad_norm = gnorm;
  rec.iterations = iter;
  rec.seminorm = w1p_seminorm(u, opts.trace_norm_p);
  return {std::move(u), std::move(rec)};
}

bool nonattainment_signature(const std::vector<LevelRecord>& levels, double lower_bound, double gtol,
                             double change_threshold) {
  if (levels.size() < 3) return false;
  for (const auto& l : levels)
    if (l.status != MinimizeStatus::Converged) return false;
  const LevelRecord& last = levels.back();
  const LevelRecord& prev = levels[levels.size() - 2];
  // A converging sequence shrinks the change by about h each level.
  return last.F - lower_bound > 10.0 * gtol && last.level_change >= change_threshold &&
         last.level_change >= kSettleRatio * prev.level_change;
}

MinimizationReport minimize_refining(const Integrand& f, const RefiningProblem& problem, int levels) {
  if (levels < 1) throw Error(ErrorKind::InvalidArgument, "levels must be >= 1");
  MinimizationReport rep;
  rep.lower_bound = problem.mesh->domain().measure() * sampled_infimum(f, ProbeBox::over(problem.mesh->domain()));
  const double p = problem.options.trace_norm_p;

  FemField current = problem.initial;
  apply_dirichlet(current, problem.boundary);
  for (int l = 0; l < levels; ++l) {
    std::optional<FemField> prolonged;
    if (l > 0) {
      current = prolongate(current, refine(*current.mesh));
      // Keep the boundary exactly on the trace (matters for non-affine g).
      apply_dirichlet(current, problem.boundary);
      prolonged = current;
    }
    const FemField reference = interpolate(current.mesh, problem.boundary);
    auto [u, rec] = minimize_fixed(f, current, problem.options, &reference);
    // Perturbed restarts compete with the warm start; the warm start alone
    // already guarantees F_l <= F_{l-1}.
    if (prolonged && problem.perturb_amplitude > 0.0) {
      for (int t = 0; t < problem.perturb_trials; ++t) {
        FemField start = *prolonged;
        std::mt19937_64 rng(problem.seed + static_cast<std::uint64_t>(l) +
                            1000u * static_cast<std::uint64_t>(t));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (std::size_t i = 0; i < start.mesh->num_vertices(); ++i) {
          const double r = dist(rng);
          if (!start.mesh->is_boundary(i)) start.coeffs[static_cast<Eigen::Index>(i)] += problem.perturb_amplitude * r;
        }
        auto [v, vrec] = minimize_fixed(f, start, problem.options, &reference);
        if (vrec.status == MinimizeStatus::Converged && vrec.F < rec.F) {
          u = std::move(v);
          rec = std::move(vrec);
        }
      }
    }
    if (prolonged) {
      const double diff = w1p_seminorm(FemField(u.mesh, u.coeffs - prolonged->coeffs), p);
      const double size = w1p_seminorm(u, p);
      rec.level_change = size > 0.0 ? diff / size : (diff > 0.0 ? 1.0 : 0.0);
    }
    if (!rep.levels.empty() && rec.F > rep.levels.back().F + 1e-12) rep.monotone = false;
    if (rec.status == MinimizeStatus::Diverged) rep.status = MinimizeStatus::Diverged;
    else if (rec.status == MinimizeStatus::MaxIters && rep.status == MinimizeStatus::Converged)
      rep.status = MinimizeStatus::MaxIters;
    rep.levels.push_back(std::move(rec));
    current = std::move(u);
  }
  rep.final_field = current;
  rep.nonattainment = nonattainment_signature(rep.levels, rep.lower_bound, problem.options.gtol);
  return rep;
}

}  // namespace varmin
