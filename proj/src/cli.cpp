#include "varmin/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <utility>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "varmin/error.hpp"

namespace varmin {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  out += '\n';
  return out;
}

std::string num(double v) { return format_double(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

json header(const std::string& command, const ProblemSpec& spec) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = spec.seed;
  j["integrand"] = spec.integrand;
  j["domain"] = to_json(spec.domain);
  return j;
}

FemField initial_field(const ProblemSpec& spec, MeshPtr mesh) {
  const BoundaryData g = spec.boundary.function();
  FemField u;
  switch (spec.initial.kind) {
    case InitialSpec::Kind::Trace:
      u = interpolate(mesh, g);
      break;
    case InitialSpec::Kind::ZeroInterior:
      u = FemField::zeros(mesh);
      break;
    case InitialSpec::Kind::RandomInterior: {
      u = interpolate(mesh, g);
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
        const double r = dist(rng);
        if (!mesh->is_boundary(i)) u.coeffs[static_cast<Eigen::Index>(i)] += spec.initial.amplitude * r;
      }
      break;
    }
  }
  apply_dirichlet(u, g);
  return u;
}

// Growth certificate to use for coercivity: given constants that survive
// check_growth, or constants from suggest_growth. Fills `info` either way.
std::optional<GrowthCertificate> resolve_growth(const ProblemSpec& spec, const Integrand& f, json& info) {
  const ProbeBox probe = spec.probe_box();
  if (spec.growth) {
    info["source"] = "given";
    info["constants"] = to_json(*spec.growth);
    const GrowthReport rep = check_growth(f, *spec.growth, probe, spec.probe.samples);
    info["check"] = to_json(rep);
    if (!rep.holds) {
      info["reason"] = "growth check found a violation";
      return std::nullopt;
    }
    return spec.growth;
  }
  info["source"] = "suggested";
  info["p"] = *spec.p;
  info["q"] = *spec.q;
  const auto cert = suggest_growth(f, *spec.p, *spec.q, probe, spec.probe.samples);
  if (!cert) {
    info["constants"] = nullptr;
    info["reason"] = fmt::format("no constants with c0 > 0 found for p = {}", format_double(*spec.p));
    // Re-run the check with a small c0 so the report carries a witness.
    GrowthCertificate probe_cert;
    probe_cert.c0 = 1e-6;
    probe_cert.c1 = 0.0;
    probe_cert.c2 = -1e-9;
    probe_cert.p = *spec.p;
    probe_cert.q = *spec.q;
    info["check"] = to_json(check_growth(f, probe_cert, probe, spec.probe.samples));
    info["check_constants"] = to_json(probe_cert);
    return std::nullopt;
  }
  info["constants"] = to_json(*cert);
  info["check"] = to_json(check_growth(f, *cert, probe, spec.probe.samples));
  return cert;
}

void require_interval(const ProblemSpec& spec, const char* what) {
  if (spec.domain.dim != 1)
    throw Error(ErrorKind::InvalidDomain, fmt::format("{} needs an interval domain", what));
}

}  // namespace

CommandOutput cmd_check(const ProblemSpec& spec) {
  CommandOutput out;
  const Integrand f = spec.make_integrand();
  const ProbeBox probe = spec.probe_box();
  out.report = header("check", spec);
  bool ok = true;
  std::string summary;

  if (spec.check_convexity) {
    const ConvexityReport rep = check_convexity(f, probe, spec.probe.samples, spec.probe.tol);
    out.report["convexity"] = to_json(rep);
    ok = ok && rep.certified();
    summary += fmt::format("convexity: {}", rep.certified() ? "certified-on-samples" : "counterexample");
  }
  if (spec.check_growth) {
    json info;
    if (!spec.p) {
      info["status"] = "not-requested";
      info["reason"] = "no p, q given";
    } else {
      const auto cert = resolve_growth(spec, f, info);
      info["status"] = cert ? "holds-on-samples" : "violation";
      ok = ok && cert.has_value();
    }
    if (!summary.empty()) summary += "; ";
    summary += fmt::format("growth: {}", info["status"].get<std::string>());
    out.report["growth"] = std::move(info);
  }
  out.report["result"] = ok ? "pass" : "fail";
  out.exit_code = ok ? kExitOk : kExitQualified;
  out.summary = summary.empty() ? "no checks requested" : summary;
  return out;
}

CommandOutput cmd_minimize(const ProblemSpec& spec, bool verbose) {
  CommandOutput out;
  const Integrand f = spec.make_integrand();
  const BoundaryData g = spec.boundary.function();

  RefiningProblem problem;
  problem.mesh = make_mesh(spec.domain, spec.resolution);
  problem.boundary = g;
  problem.initial = initial_field(spec, problem.mesh);
  problem.options = spec.solver;
  problem.options.record_trace = true;
  problem.perturb_amplitude = spec.initial.level_amplitude;
  problem.perturb_trials = spec.initial.level_trials;
  problem.seed = spec.seed;

  json cert_info;
  std::optional<GrowthCertificate> cert;
  if (spec.p) {
    cert = resolve_growth(spec, f, cert_info);
    problem.options.trace_norm_p = cert ? cert->p : *spec.p;
  }

  // Finiteness of F on the initial guess; an EvaluationError propagates.
  const double F_init = assemble_F(f, problem.initial);

  const MinimizationReport rep = minimize_refining(f, problem, spec.levels);

  out.report = header("minimize", spec);
  out.report["solver"] = json{{"method", to_string(spec.solver.method)},
                              {"gtol", spec.solver.gtol},
                              {"max_iters", spec.solver.max_iters}};
  out.report["mesh"] = json{{"resolution", spec.resolution}, {"levels", spec.levels}};
  out.report["F_initial"] = F_init;
  out.report["result"] = to_json(rep);

  std::size_t violations = 0, checked = 0;
  if (!spec.p) {
    cert_info["status"] = "not-requested";
  } else if (!cert) {
    cert_info["status"] = "certificate-unavailable";
  } else {
    json levels = json::array();
    bool all_available = true;
    MeshPtr mesh = problem.mesh;
    for (std::size_t l = 0; l < rep.levels.size(); ++l) {
      if (l > 0) mesh = refine(*mesh);
      const LevelRecord& lr = rep.levels[l];
      const FemField u0 = interpolate(mesh, g);
      const double F0 = lr.trace.front().F;
      json lj{{"level", lr.level}};
      try {
        const CoercivityCertificate cc = coercivity_certificate(*cert, u0, F0, spec.domain);
        lj["certificate"] = to_json(cc);
        std::size_t lv = 0, lc = 0;
        double max_semi = 0.0;
        for (const auto& it : lr.trace) {
          if (!(it.F <= F0)) continue;
          ++lc;
          max_semi = std::max(max_semi, it.seminorm);
          if (it.seminorm > cc.radius * (1.0 + 1e-12) + 1e-14) ++lv;
        }
        lj["iterates_checked"] = lc;
        lj["violations"] = lv;
        lj["max_seminorm"] = max_semi;
        violations += lv;
        checked += lc;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::CertificateUnavailable) throw;
        all_available = false;
        lj["certificate"] = json{{"status", "certificate-unavailable"}, {"reason", e.what()}};
      }
      levels.push_back(std::move(lj));
    }
    cert_info["status"] = all_available ? "available" : "certificate-unavailable";
    cert_info["levels"] = std::move(levels);
    cert_info["iterates_checked"] = checked;
    cert_info["violations"] = violations;
  }
  out.report["coercivity"] = std::move(cert_info);

  std::string levels_csv =
      csv_row({"level", "dofs", "F", "grad_norm", "iterations", "seminorm", "level_change", "status"});
  for (const auto& l : rep.levels)
    levels_csv += csv_row({num(l.level), num(l.dofs), num(l.F), num(l.grad_norm), num(l.iterations),
                           num(l.seminorm), num(l.level_change), to_string(l.status)});
  out.files["table_levels.csv"] = std::move(levels_csv);
  if (verbose) {
    std::string trace = csv_row({"level", "iter", "F", "grad_norm", "step", "seminorm"});
    for (const auto& l : rep.levels)
      for (const auto& it : l.trace)
        trace += csv_row({num(l.level), num(it.iter), num(it.F), num(it.gnorm), num(it.step), num(it.seminorm)});
    out.files["trace.csv"] = std::move(trace);
  }

  out.exit_code = rep.status == MinimizeStatus::Converged ? kExitOk : kExitQualified;
  out.summary = fmt::format("{}: F = {} after {} levels{}{}", to_string(rep.status),
                            format_double(rep.levels.back().F), rep.levels.size(),
                            rep.nonattainment ? ", non-attainment signature" : "",
                            violations > 0 ? fmt::format(", {} certificate violations", violations) : "");
  return out;
}

CommandOutput cmd_semicont(const ProblemSpec& spec) {
  if (!spec.semicont) throw Error(ErrorKind::InvalidArgument, "semicont needs a 'semicont' block");
  require_interval(spec, "semicont");
  const SemicontSpec& sc = *spec.semicont;
  for (int k : sc.ks) {
    const int res = sc.resolution(k);
    if (res % (2 * k) != 0)
      throw Error(ErrorKind::InvalidResolution,
                  fmt::format("resolution {} is not a multiple of 2k = {}", res, 2 * k));
  }
  CommandOutput out;
  const Integrand f = spec.make_integrand();

  const SemicontinuityReport lsc = liminf_check(f, sc.sequence, spec.domain, sc.ks, sc.resolution);
  const auto dict = default_dictionary(spec.domain);
  const WeakConvergenceReport weak =
      weak_convergence_witness(sc.sequence, spec.domain, sc.ks, sc.p, sc.q, sc.resolution, dict);
  const int k_last = sc.ks.back();
  const SequenceMember last = make_sequence(sc.sequence, spec.domain, k_last, sc.resolution(k_last));

  out.report = header("semicont", spec);
  out.report["lsc"] = to_json(lsc);
  json wj = to_json(weak);
  json labels = json::array();
  for (const auto& d : dict) labels.push_back(d.label());
  wj["dictionary"] = std::move(labels);
  out.report["weak_convergence"] = std::move(wj);

  json trunc = json::array();
  std::string trunc_csv = csv_row({"j", "measure", "measure_nonstrict", "moment", "bound", "holds"});
  bool cheb_ok = true;
  for (int j = 1; j <= sc.truncation_levels; ++j) {
    const ChebyshevCheck c = truncation_measures(last.u, j, sc.p);
    cheb_ok = cheb_ok && c.holds;
    trunc.push_back(to_json(c));
    trunc_csv += csv_row({num(j), num(c.measure), num(c.measure_nonstrict), num(c.moment), num(c.bound),
                          c.holds ? "true" : "false"});
  }
  out.report["truncation"] = json{{"k", k_last}, {"p", sc.p}, {"rows", std::move(trunc)}, {"chebyshev_holds", cheb_ok}};

  std::string lsc_csv = csv_row({"k", "F"});
  for (const auto& [k, F] : lsc.table) lsc_csv += csv_row({num(k), num(F)});
  std::string weak_csv = csv_row({"k", "grad_p_norm", "dictionary_max", "lq_distance"});
  for (const auto& r : weak.rows)
    weak_csv += csv_row({num(r.k), num(r.grad_p_norm), num(r.dictionary_max), num(r.lq_distance)});
  out.files["table_liminf.csv"] = std::move(lsc_csv);
  out.files["table_weak.csv"] = std::move(weak_csv);
  out.files["table_truncation.csv"] = std::move(trunc_csv);

  if (sc.expect) {
    const bool match = *sc.expect == lsc.verdict;
    out.report["expected_verdict"] = to_string(*sc.expect);
    out.report["verdict_matches"] = match;
    out.exit_code = match ? kExitOk : kExitQualified;
  }
  out.summary = fmt::format("{}: F_limit = {}, liminf = {}{}", to_string(lsc.verdict), format_double(lsc.F_limit),
                            format_double(lsc.liminf),
                            sc.expect ? (out.exit_code == kExitOk ? " (as expected)" : " (expected otherwise)") : "");
  return out;
}

CommandOutput cmd_lemma_apim(const ProblemSpec& spec) {
  require_interval(spec, "lemma-apim");
  const LemmaSpec ls = spec.lemma.value_or(LemmaSpec{});
  const Domain& d = spec.domain;
  const double mid = 0.5 * (d.a + d.b);

  PiecewiseLinear1D u;
  std::string label;
  switch (ls.function) {
    case LemmaSpec::Function::Identity:
      u = PiecewiseLinear1D{{d.a, d.b}, {d.a}, {d.b}};
      label = "x";
      break;
    case LemmaSpec::Function::SignStep:
      u = PiecewiseLinear1D::step({d.a, mid, d.b}, {-1.0, 1.0});
      label = "sign(x - mid)";
      break;
    case LemmaSpec::Function::Sine: {
      const double L = d.b - d.a;
      u = PiecewiseLinear1D::from_field(interpolate(make_mesh(d, ls.sample_resolution), [&](const Vec& x) {
        return std::sin(2.0 * M_PI * (x[0] - d.a) / L);
      }));
      label = fmt::format("P1 interpolant of sin(2 pi x) on {} cells", ls.sample_resolution);
      break;
    }
  }

  CommandOutput out;
  out.report = header("lemma-apim", spec);
  out.report["function"] = label;
  out.report["eps"] = ls.eps;
  out.report["cells"] = ls.cells == LemmaSpec::Cells::Dyadic ? "dyadic" : "odd";
  json rows = json::array();
  std::string csv = csv_row({"j", "cells", "norm", "measure"});
  std::vector<double> measures;
  for (int j = 0; j <= ls.levels; ++j) {
    const int m = ls.cells == LemmaSpec::Cells::Dyadic ? 1 << j : 2 * j + 1;
    const Partition P = make_partition(d, m);
    const double meas = measure_deviation(u, partition_average(u, P), ls.eps);
    measures.push_back(meas);
    rows.push_back(json{{"j", j}, {"cells", m}, {"norm", P.norm}, {"measure", meas}});
    csv += csv_row({num(j), num(m), num(P.norm), num(meas)});
  }
  out.report["rows"] = std::move(rows);
  const bool ok = measures.back() <= measures.front();
  out.report["final_le_first"] = ok;
  out.files["table_lemma.csv"] = std::move(csv);
  out.exit_code = ok ? kExitOk : kExitQualified;
  out.summary = fmt::format("deviation measure {} -> {} over {} partitions", format_double(measures.front()),
                            format_double(measures.back()), measures.size());
  return out;
}

int run_command(const std::string& command, const CommandOptions& opts) {
  namespace fs = std::filesystem;
  CommandOutput out;
  json error_report;
  int code = kExitOk;
  try {
    ProblemSpec spec = load_problem(opts.spec_path);
    if (opts.seed) spec.seed = *opts.seed;
    if (command == "check") out = cmd_check(spec);
    else if (command == "minimize") out = cmd_minimize(spec, opts.verbose);
    else if (command == "semicont") out = cmd_semicont(spec);
    else if (command == "lemma-apim") out = cmd_lemma_apim(spec);
    else throw Error(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
    code = out.exit_code;
  } catch (const SpecError& e) {
    std::cerr << "varmin: spec error in " << opts.spec_path << ": " << e.what() << "\n";
    error_report = json{{"command", command}, {"status", "spec-error"}, {"error", e.what()}};
    code = kExitSpec;
  } catch (const Error& e) {
    const bool eval = e.kind() == ErrorKind::EvaluationError;
    std::cerr << "varmin: " << (eval ? "evaluation error" : "spec error") << ": " << e.what() << "\n";
    error_report =
        json{{"command", command}, {"status", eval ? "evaluation-error" : "spec-error"}, {"error", e.what()}};
    code = eval ? kExitEval : kExitSpec;
  }

  json& report = error_report.is_null() ? out.report : error_report;
  if (opts.timestamp) {
    const auto now = std::chrono::system_clock::now();
    report["generated_at"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  }
  report["exit_code"] = code;

  try {
    fs::create_directories(opts.out_dir);
    auto write = [&](const std::string& name, const std::string& contents) {
      std::ofstream f(fs::path(opts.out_dir) / name, std::ios::binary);
      f << contents;
      if (!f) throw std::runtime_error("cannot write " + (fs::path(opts.out_dir) / name).string());
    };
    write("report.json", dump_json(report));
    if (error_report.is_null())
      for (const auto& [name, contents] : out.files) write(name, contents);
  } catch (const std::exception& e) {
    std::cerr << "varmin: " << e.what() << "\n";
    return code == kExitOk ? kExitQualified : code;
  }
  if (error_report.is_null()) std::cout << command << ": " << out.summary << "\n";
  return code;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"varmin: direct-method toolkit for integral functionals"};
  app.require_subcommand(1);
  CommandOptions opts;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"check", "convexity and growth probes of the integrand"},
      {"minimize", "minimize the discretized functional over nested meshes"},
      {"semicont", "evaluate F along a weakly converging sequence"},
      {"lemma-apim", "partition-average approximation of a fixed function"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--spec", opts.spec_path, "problem file (JSON)")->required();
    sub->add_option("--out", opts.out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "override the spec's seed");
    sub->add_flag("--no-timestamp", [&](std::int64_t) { opts.timestamp = false; }, "omit generated_at");
    sub->add_flag("-v,--verbose", opts.verbose, "also write trace.csv");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitSpec;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) opts.seed = seed;
  return run_command(sub->get_name(), opts);
}

}  // namespace varmin
