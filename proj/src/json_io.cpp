#include "varmin/json_io.hpp"

#include <cmath>

#include <fmt/format.h>

namespace varmin {

namespace {

void dump_rec(const json& j, int indent, int depth, std::string& out) {
  const auto pad = [&](int d) {
    if (indent >= 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * d), ' ');
    }
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        pad(depth + 1);
        out += json(it.key()).dump();
        out += indent >= 0 ? ": " : ":";
        dump_rec(it.value(), indent, depth + 1, out);
      }
      pad(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Numeric arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) pad(depth + 1);
        dump_rec(e, indent, depth + 1, out);
      }
      if (!flat) pad(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

json vec_json(const Vec& v, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  std::string s = fmt::format("{:.17g}", v);
  // Keep floats recognisable as floats when they happen to be integral.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump_json(const json& j, int indent) {
  std::string out;
  dump_rec(j, indent, 0, out);
  out += '\n';
  return out;
}

json field_to_json(const FemField& u) {
  const Mesh& m = *u.mesh;
  json j;
  j["dim"] = m.dim();
  j["level"] = m.level();
  j["domain"] = to_json(m.domain());
  json verts = json::array();
  for (const Vec& v : m.vertices()) verts.push_back(vec_json(v, m.dim()));
  j["vertices"] = std::move(verts);
  json cells = json::array();
  for (const Cell& c : m.cells()) {
    json a = json::array();
    for (int k = 0; k < m.vertices_per_cell(); ++k) a.push_back(c[k]);
    cells.push_back(std::move(a));
  }
  j["cells"] = std::move(cells);
  j["boundary"] = m.boundary_vertices();
  json coeffs = json::array();
  for (Eigen::Index i = 0; i < u.coeffs.size(); ++i) coeffs.push_back(u.coeffs[i]);
  j["coeffs"] = std::move(coeffs);
  return j;
}

json to_json(const Domain& d) {
  json j;
  if (d.dim == 1) {
    j["type"] = "interval";
    j["bounds"] = {d.a, d.b};
  } else {
    j["type"] = "rectangle";
    j["bounds"] = {d.a, d.b, d.c, d.d};
  }
  return j;
}

json to_json(const GrowthCertificate& c) {
  return json{{"c0", c.c0}, {"c1", c.c1}, {"c2", c.c2}, {"p", c.p}, {"q", c.q}};
}

json to_json(const ConvexityReport& r) {
  json j;
  j["status"] = r.certified() ? "certified-on-samples" : "counterexample";
  j["samples_checked"] = r.samples_checked;
  j["seed"] = r.seed;
  j["tol"] = r.tol;
  if (r.witness) {
    const auto& w = *r.witness;
    j["witness"] = json{{"x", {w.x[0], w.x[1]}}, {"u", w.u},           {"xi1", {w.xi1[0], w.xi1[1]}},
                        {"xi2", {w.xi2[0], w.xi2[1]}}, {"lambda", w.lambda}, {"violation", w.violation},
                        {"threshold", w.threshold}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

json to_json(const GrowthReport& r) {
  json j;
  j["status"] = r.holds ? "holds-on-samples" : "violation";
  j["samples_checked"] = r.samples_checked;
  j["seed"] = r.seed;
  if (r.witness) {
    const auto& w = *r.witness;
    j["witness"] = json{{"x", {w.x[0], w.x[1]}}, {"u", w.u}, {"xi", {w.xi[0], w.xi[1]}},
                        {"f", r.witness_f},     {"bound", r.witness_bound}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

json to_json(const CoercivityCertificate& c) {
  json j;
  j["status"] = "available";
  j["radius_R"] = c.radius;
  j["F0"] = c.F0;
  j["growth"] = to_json(c.growth);
  j["friedrichs_C"] = c.friedrichs_C;
  j["domain_measure"] = c.domain_measure;
  j["grad_u0_p"] = c.grad_u0_p;
  j["u0_q"] = c.u0_q;
  j["chain"] = json{{"split_p", c.split_p}, {"split_q", c.split_q}, {"holder", c.holder},
                    {"lead", c.lead},       {"A", c.A},             {"B", c.B},
                    {"phi_at_R", c.phi(c.radius)},
                    {"formula", "F >= lead*R^p - A*R^q - B, lead = c0*split_p, "
                                "A = |c1|*split_q*holder*C^q, "
                                "B = c0*|grad u0|_p^p + |c1|*split_q*|u0|_q^q - c2*|Omega|"}};
  return j;
}

json to_json(const LevelRecord& r) {
  return json{{"level", r.level},
              {"dofs", r.dofs},
              {"F", r.F},
              {"grad_norm", r.grad_norm},
              {"iterations", r.iterations},
              {"seminorm", r.seminorm},
              {"level_change", r.level_change},
              {"status", to_string(r.status)}};
}

json to_json(const MinimizationReport& r) {
  json j;
  json levels = json::array();
  for (const auto& l : r.levels) levels.push_back(to_json(l));
  j["levels"] = std::move(levels);
  j["status"] = to_string(r.status);
  j["monotone"] = r.monotone;
  j["lower_bound"] = r.lower_bound;
  j["nonattainment"] = r.nonattainment;
  j["final_field"] = field_to_json(r.final_field);
  return j;
}

json to_json(const SemicontinuityReport& r) {
  json j;
  j["functional"] = r.functional;
  j["sequence"] = to_string(r.kind);
  json table = json::array();
  for (const auto& [k, F] : r.table) table.push_back(json{{"k", k}, {"F", F}});
  j["table"] = std::move(table);
  j["F_limit"] = r.F_limit;
  j["liminf"] = r.liminf;
  j["liminf_estimator"] = fmt::format("min over k >= {} (last quartile)", r.liminf_from_k);
  j["tol"] = r.tol;
  j["verdict"] = to_string(r.verdict);
  return j;
}

json to_json(const WeakConvergenceReport& r) {
  json j;
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back(json{{"k", row.k},
                        {"grad_p_norm", row.grad_p_norm},
                        {"dictionary_max", row.dictionary_max},
                        {"lq_distance", row.lq_distance}});
  j["rows"] = std::move(rows);
  j["dictionary_size"] = r.dictionary_size;
  j["sup_grad_norm"] = r.sup_grad_norm;
  j["dictionary_tail"] = r.dictionary_tail;
  j["lq_tail"] = r.lq_tail;
  j["bounded"] = r.bounded;
  j["weak_gradients"] = r.weak_gradients;
  j["strong_lq"] = r.strong_lq;
  return j;
}

json to_json(const ChebyshevCheck& c) {
  return json{{"t", c.t},           {"measure", c.measure}, {"measure_nonstrict", c.measure_nonstrict},
              {"moment", c.moment}, {"bound", c.bound},     {"holds", c.holds}};
}

}  // namespace varmin
