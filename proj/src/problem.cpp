#include "varmin/problem.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "varmin/error.hpp"

namespace varmin {

using json = nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Walks the keys of `path` through the raw text and returns the line of the
// last one, 0 when not found. Good enough for hand-written problem files.
std::size_t locate(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  bool found = false;
  for (const auto& key : path) {
    if (!key.empty() && std::isdigit(static_cast<unsigned char>(key[0]))) continue;
    const auto at = text.find("\"" + key + "\"", pos);
    if (at == std::string::npos) return found ? line_col(text, pos).first : 0;
    pos = at;
    found = true;
  }
  return found ? line_col(text, pos).first : 0;
}

class Node {
 public:
  Node(const json& j, std::vector<std::string> path, const std::string& text)
      : j_(j), path_(std::move(path)), text_(text) {}

  [[noreturn]] void fail(const std::string& what) const {
    std::string ptr;
    for (const auto& k : path_) ptr += "/" + k;
    if (ptr.empty()) ptr = "/";
    std::string where = "field " + ptr;
    if (const auto line = locate(text_, path_); line > 0) where += fmt::format(" (line {})", line);
    throw SpecError(where, what);
  }

  const json& raw() const { return j_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  Node child(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return Node(j_.at(key), std::move(p), text_);
  }
  Node element(std::size_t i) const {
    auto p = path_;
    p.push_back(std::to_string(i));
    return Node(j_.at(i), std::move(p), text_);
  }

  void expect_object(const std::set<std::string>& allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) child(it.key()).fail("unknown field");
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  long long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long long>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number(const std::string& key, double dflt) const { return has(key) ? child(key).number() : dflt; }
  int integer(const std::string& key, int dflt) const {
    if (!has(key)) return dflt;
    const auto v = child(key).integer();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      child(key).fail("integer out of range");
    return static_cast<int>(v);
  }
  bool boolean(const std::string& key, bool dflt) const { return has(key) ? child(key).boolean() : dflt; }
  std::string string(const std::string& key, const std::string& dflt) const {
    return has(key) ? child(key).string() : dflt;
  }

 private:
  const json& j_;
  std::vector<std::string> path_;
  const std::string& text_;
};

Domain parse_domain(const Node& n) {
  n.expect_object({"type", "bounds"});
  if (!n.has("type")) n.fail("missing field 'type'");
  const auto type = n.child("type").string();
  if (!n.has("bounds")) n.fail("missing field 'bounds'");
  const Node b = n.child("bounds");
  std::vector<double> v(b.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = b.element(i).number();
  try {
    if (type == "interval") {
      if (v.size() != 2) b.fail("interval needs [a, b]");
      return Domain::interval(v[0], v[1]);
    }
    if (type == "rectangle") {
      if (v.size() != 4) b.fail("rectangle needs [a, b, c, d]");
      return Domain::rectangle(v[0], v[1], v[2], v[3]);
    }
  } catch (const Error& e) {
    b.fail(e.what());
  }
  n.child("type").fail("unknown domain type '" + type + "' (interval, rectangle)");
}

void parse_integrand(const Node& n, ProblemSpec& spec) {
  if (n.raw().is_string()) {
    spec.integrand = n.string();
    return;
  }
  n.expect_object({"name", "params"});
  if (!n.has("name")) n.fail("missing field 'name'");
  spec.integrand = n.child("name").string();
  if (n.has("params")) {
    const Node p = n.child("params");
    p.expect_object({"p", "a", "b", "r"});
    spec.params.p = p.number("p", spec.params.p);
    spec.params.a = p.number("a", spec.params.a);
    spec.params.b = p.number("b", spec.params.b);
    spec.params.r = p.number("r", spec.params.r);
  }
}

BoundarySpec parse_boundary(const Node& n, int dim) {
  n.expect_object({"type", "offset", "slope", "scale"});
  BoundarySpec b;
  const auto type = n.string("type", "zero");
  if (type == "zero") {
    b.kind = BoundarySpec::Kind::Zero;
  } else if (type == "linear") {
    b.kind = BoundarySpec::Kind::Linear;
    b.offset = n.number("offset", 0.0);
    if (n.has("slope")) {
      const Node s = n.child("slope");
      if (s.raw().is_number()) {
        b.slope = {s.number(), 0.0};
      } else {
        if (s.size() != static_cast<std::size_t>(dim)) s.fail(fmt::format("slope needs {} entries", dim));
        for (std::size_t i = 0; i < s.size(); ++i) b.slope[i] = s.element(i).number();
      }
    }
  } else if (type == "product-xy") {
    if (dim != 2) n.child("type").fail("product-xy needs a rectangle domain");
    b.kind = BoundarySpec::Kind::ProductXY;
    b.scale = n.number("scale", 1.0);
  } else {
    n.child("type").fail("unknown boundary type '" + type + "' (zero, linear, product-xy)");
  }
  return b;
}

InitialSpec parse_initial(const Node& n) {
  n.expect_object({"type", "amplitude", "level_amplitude", "level_trials"});
  InitialSpec s;
  const auto type = n.string("type", "zero-interior");
  if (type == "trace") s.kind = InitialSpec::Kind::Trace;
  else if (type == "zero-interior") s.kind = InitialSpec::Kind::ZeroInterior;
  else if (type == "random-interior") s.kind = InitialSpec::Kind::RandomInterior;
  else n.child("type").fail("unknown initial type '" + type + "' (trace, zero-interior, random-interior)");
  s.amplitude = n.number("amplitude", s.amplitude);
  if (!(s.amplitude >= 0.0)) n.child("amplitude").fail("amplitude must be >= 0");
  s.level_amplitude = n.number("level_amplitude", s.level_amplitude);
  if (!(s.level_amplitude >= 0.0)) n.child("level_amplitude").fail("level_amplitude must be >= 0");
  s.level_trials = n.integer("level_trials", s.level_trials);
  if (s.level_trials < 1 || s.level_trials > 64) n.child("level_trials").fail("level_trials must be in [1, 64]");
  return s;
}

MinimizeOptions parse_solver(const Node& n) {
  n.expect_object({"method", "gtol", "max_iters", "armijo", "backtrack", "max_backtracks", "lbfgs_memory"});
  MinimizeOptions o;
  const auto m = n.string("method", "gradient-descent");
  if (m == "gradient-descent" || m == "gd") o.method = DescentMethod::GradientDescent;
  else if (m == "lbfgs") o.method = DescentMethod::LBFGS;
  else n.child("method").fail("unknown method '" + m + "' (gradient-descent, lbfgs)");
  o.gtol = n.number("gtol", o.gtol);
  o.max_iters = n.integer("max_iters", o.max_iters);
  o.armijo = n.number("armijo", o.armijo);
  o.backtrack = n.number("backtrack", o.backtrack);
  o.max_backtracks = n.integer("max_backtracks", o.max_backtracks);
  o.lbfgs_memory = n.integer("lbfgs_memory", o.lbfgs_memory);
  if (!(o.gtol > 0.0)) n.child("gtol").fail("gtol must be > 0");
  if (o.max_iters < 0) n.child("max_iters").fail("max_iters must be >= 0");
  if (!(o.armijo > 0.0 && o.armijo < 1.0)) n.child("armijo").fail("armijo must be in (0, 1)");
  if (!(o.backtrack > 0.0 && o.backtrack < 1.0)) n.child("backtrack").fail("backtrack must be in (0, 1)");
  if (o.max_backtracks < 1) n.child("max_backtracks").fail("max_backtracks must be >= 1");
  if (o.lbfgs_memory < 1) n.child("lbfgs_memory").fail("lbfgs_memory must be >= 1");
  return o;
}

ProbeSpec parse_probe(const Node& n) {
  n.expect_object({"u_max", "xi_max", "far_field", "samples", "tol"});
  ProbeSpec p;
  p.u_max = n.number("u_max", p.u_max);
  p.xi_max = n.number("xi_max", p.xi_max);
  p.far_field = n.boolean("far_field", p.far_field);
  const int samples = n.integer("samples", static_cast<int>(p.samples));
  if (samples < 0) n.child("samples").fail("samples must be >= 0");
  p.samples = static_cast<std::size_t>(samples);
  p.tol = n.number("tol", p.tol);
  if (!(p.u_max > 0.0)) n.child("u_max").fail("u_max must be > 0");
  if (!(p.xi_max > 0.0)) n.child("xi_max").fail("xi_max must be > 0");
  if (!(p.tol >= 0.0)) n.child("tol").fail("tol must be >= 0");
  return p;
}

SemicontSpec parse_semicont(const Node& n) {
  n.expect_object({"sequence", "k_max", "ks", "resolution", "resolution_factor", "p", "q",
                   "truncation_levels", "expect"});
  SemicontSpec s;
  if (n.has("sequence")) {
    try {
      s.sequence = sequence_kind_from_string(n.child("sequence").string());
    } catch (const Error& e) {
      n.child("sequence").fail(e.what());
    }
  }
  if (n.has("ks")) {
    const Node ks = n.child("ks");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto k = ks.element(i).integer();
      if (k < 1 || k > 1 << 20) ks.element(i).fail("k must be in [1, 2^20]");
      s.ks.push_back(static_cast<int>(k));
    }
    if (s.ks.empty()) ks.fail("ks must be nonempty");
  } else {
    const int kmax = n.integer("k_max", 64);
    if (kmax < 1 || kmax > 1 << 20) n.child("k_max").fail("k_max must be in [1, 2^20]");
    for (int k = 1; k <= kmax; ++k) s.ks.push_back(k);
  }
  s.resolution.fixed = n.integer("resolution", 0);
  if (n.has("resolution") && s.resolution.fixed < 1) n.child("resolution").fail("resolution must be >= 1");
  s.resolution.factor = n.integer("resolution_factor", s.resolution.factor);
  if (s.resolution.factor < 1) n.child("resolution_factor").fail("resolution_factor must be >= 1");
  s.p = n.number("p", s.p);
  s.q = n.number("q", s.q);
  if (!(s.p > 1.0)) n.child("p").fail("p must be > 1");
  if (!(s.q >= 1.0)) n.child("q").fail("q must be >= 1");
  s.truncation_levels = n.integer("truncation_levels", s.truncation_levels);
  if (s.truncation_levels < 1) n.child("truncation_levels").fail("truncation_levels must be >= 1");
  if (n.has("expect")) {
    try {
      s.expect = verdict_from_string(n.child("expect").string());
    } catch (const Error& e) {
      n.child("expect").fail(e.what());
    }
  }
  return s;
}

LemmaSpec parse_lemma(const Node& n) {
  n.expect_object({"function", "cells", "eps", "levels", "sample_resolution"});
  LemmaSpec s;
  const auto fn = n.string("function", "x");
  if (fn == "x") s.function = LemmaSpec::Function::Identity;
  else if (fn == "sign-step") s.function = LemmaSpec::Function::SignStep;
  else if (fn == "sin") s.function = LemmaSpec::Function::Sine;
  else n.child("function").fail("unknown function '" + fn + "' (x, sign-step, sin)");
  const auto cells = n.string("cells", "dyadic");
  if (cells == "dyadic") s.cells = LemmaSpec::Cells::Dyadic;
  else if (cells == "odd") s.cells = LemmaSpec::Cells::Odd;
  else n.child("cells").fail("unknown cells '" + cells + "' (dyadic, odd)");
  s.eps = n.number("eps", s.eps);
  if (!(s.eps > 0.0)) n.child("eps").fail("eps must be > 0");
  s.levels = n.integer("levels", s.levels);
  if (s.levels < 0 || s.levels > 24) n.child("levels").fail("levels must be in [0, 24]");
  s.sample_resolution = n.integer("sample_resolution", s.sample_resolution);
  if (s.sample_resolution < 1) n.child("sample_resolution").fail("sample_resolution must be >= 1");
  return s;
}

}  // namespace

BoundaryData BoundarySpec::function() const {
  switch (kind) {
    case Kind::Zero: return [](const Vec&) { return 0.0; };
    case Kind::Linear: return [o = offset, s = slope](const Vec& x) { return o + dot(s, x); };
    case Kind::ProductXY: return [c = scale](const Vec& x) { return c * x[0] * x[1]; };
  }
  return [](const Vec&) { return 0.0; };
}

Integrand ProblemSpec::make_integrand() const { return find_integrand(integrand, domain.dim, params); }

ProbeBox ProblemSpec::probe_box() const {
  ProbeBox b = ProbeBox::over(domain);
  b.u_max = probe.u_max;
  b.xi_max = probe.xi_max;
  b.far_field = probe.far_field;
  b.seed = seed;
  return b;
}

ProblemSpec parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at ...: " prefix.
    if (const auto c = what.rfind(": "); c != std::string::npos) what = what.substr(c + 2);
    throw SpecError(fmt::format("line {}, column {}", line, col), "syntax error: " + what);
  }

  const Node root(doc, {}, text);
  root.expect_object({"domain", "integrand", "p", "q", "growth", "checks", "boundary", "initial", "mesh",
                      "solver", "probe", "seed", "semicont", "lemma_apim", "description"});
  ProblemSpec spec;
  if (root.has("description")) root.child("description").string();
  if (root.has("domain")) spec.domain = parse_domain(root.child("domain"));
  if (root.has("integrand")) parse_integrand(root.child("integrand"), spec);
  try {
    (void)spec.make_integrand();
  } catch (const Error& e) {
    root.child("integrand").fail(e.what());
  }

  if (root.has("p")) spec.p = root.child("p").number();
  if (root.has("q")) spec.q = root.child("q").number();
  if (root.has("growth")) {
    const Node g = root.child("growth");
    g.expect_object({"c0", "c1", "c2", "p", "q"});
    if (g.has("p")) spec.p = g.child("p").number();
    if (g.has("q")) spec.q = g.child("q").number();
    if (g.has("c0") || g.has("c1") || g.has("c2")) {
      for (const char* k : {"c0", "c1", "c2"})
        if (!g.has(k)) g.fail(fmt::format("growth constants need c0, c1 and c2 (missing {})", k));
      GrowthCertificate c;
      c.c0 = g.child("c0").number();
      c.c1 = g.child("c1").number();
      c.c2 = g.child("c2").number();
      if (!spec.p || !spec.q) g.fail("growth constants need p and q");
      c.p = *spec.p;
      c.q = *spec.q;
      if (!(c.c0 > 0.0)) g.child("c0").fail("c0 must be > 0");
      spec.growth = c;
    }
  }
  if (spec.p || spec.q) {
    const Node at = root.has("growth") ? root.child("growth") : root;
    if (!spec.p || !spec.q) at.fail("p and q must be given together");
    if (!(*spec.p > 1.0) || !std::isfinite(*spec.p)) at.fail(fmt::format("p must be in (1, inf), got {}", *spec.p));
    if (!(*spec.q >= 1.0 && *spec.q < *spec.p))
      at.fail(fmt::format("q must be in [1, p), got q={} with p={}", *spec.q, *spec.p));
  }

  if (root.has("checks")) {
    const Node c = root.child("checks");
    spec.check_convexity = spec.check_growth = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto name = c.element(i).string();
      if (name == "convexity") spec.check_convexity = true;
      else if (name == "growth") spec.check_growth = true;
      else c.element(i).fail("unknown check '" + name + "' (convexity, growth)");
    }
  }
  if (root.has("boundary")) spec.boundary = parse_boundary(root.child("boundary"), spec.domain.dim);
  if (root.has("initial")) spec.initial = parse_initial(root.child("initial"));
  if (root.has("mesh")) {
    const Node m = root.child("mesh");
    m.expect_object({"resolution", "levels"});
    spec.resolution = m.integer("resolution", spec.resolution);
    spec.levels = m.integer("levels", spec.levels);
    if (spec.resolution < 1) m.child("resolution").fail("resolution must be >= 1");
    if (spec.levels < 1 || spec.levels > 16) m.child("levels").fail("levels must be in [1, 16]");
  }
  if (root.has("solver")) spec.solver = parse_solver(root.child("solver"));
  if (root.has("probe")) spec.probe = parse_probe(root.child("probe"));
  if (root.has("seed")) {
    const Node s = root.child("seed");
    if (!s.raw().is_number_unsigned()) s.fail("seed must be a non-negative integer");
    spec.seed = s.raw().get<std::uint64_t>();
  }
  if (root.has("semicont")) spec.semicont = parse_semicont(root.child("semicont"));
  if (root.has("lemma_apim")) spec.lemma = parse_lemma(root.child("lemma_apim"));
  return spec;
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError(path, "cannot open problem file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

}  // namespace varmin
