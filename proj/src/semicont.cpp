#include "varmin/semicont.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "varmin/error.hpp"

namespace varmin {

namespace {

// |{s ∈ [0, len] : g(s) > level}| for g affine from gl to gr.
double superlevel_measure(double gl, double gr, double len, double level) {
  if (len <= 0.0) return 0.0;
  if (gl > level && gr > level) return len;
  if (gl <= level && gr <= level) return 0.0;
  const double t = std::clamp((level - gl) / (gr - gl), 0.0, 1.0);
  return gr > gl ? len * (1.0 - t) : len * t;
}

double piece_value(const PiecewiseLinear1D& u, std::size_t i, double x) {
  const double x0 = u.breaks[i], x1 = u.breaks[i + 1];
  return u.left[i] + (u.right[i] - u.left[i]) * (x - x0) / (x1 - x0);
}

void require_interval(const Domain& d, const char* what) {
  if (d.dim != 1) throw Error(ErrorKind::InvalidDomain, fmt::format("{} requires an interval domain", what));
}

// (partition cell, mesh cell, weight) triples.
struct Membership {
  std::size_t part, cell;
  double weight;
};

std::vector<Membership> memberships(const Mesh& mesh, const Partition& P) {
  std::vector<Membership> out;
  if (mesh.dim() == 1) {
    for (std::size_t j = 0; j < P.cells.size(); ++j) {
      const double lo = P.cells[j].lo[0], hi = P.cells[j].hi[0];
      for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const double x0 = mesh.vertex(mesh.cell(c)[0])[0];
        const double x1 = mesh.vertex(mesh.cell(c)[1])[0];
        const double w = std::min(hi, std::max(x0, x1)) - std::max(lo, std::min(x0, x1));
        if (w > 0.0) out.push_back({j, c, w});
      }
    }
    return out;
  }
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Vec g = mesh.centroid(c);
    for (std::size_t j = 0; j < P.cells.size(); ++j) {
      const auto& pc = P.cells[j];
      if (g[0] >= pc.lo[0] && g[0] < pc.hi[0] && g[1] >= pc.lo[1] && g[1] < pc.hi[1]) {
        out.push_back({j, c, mesh.geometry(c).measure});
        break;
      }
    }
  }
  return out;
}

double last_quartile_max(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const std::size_t from = (3 * v.size()) / 4;
  return *std::max_element(v.begin() + static_cast<std::ptrdiff_t>(from), v.end());
}

}  // namespace

PiecewiseLinear1D PiecewiseLinear1D::from_field(const FemField& u) {
  const Mesh& mesh = *u.mesh;
  require_interval(mesh.domain(), "PiecewiseLinear1D::from_field");
  std::vector<std::size_t> order(mesh.num_cells());
  std::iota(order.begin(), order.end(), 0);
  auto left_x = [&](std::size_t c) { return mesh.vertex(mesh.cell(c)[0])[0]; };
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return left_x(a) < left_x(b); });
  PiecewiseLinear1D pl;
  for (std::size_t c : order) {
    const Cell& cl = mesh.cell(c);
    if (pl.breaks.empty()) pl.breaks.push_back(mesh.vertex(cl[0])[0]);
    pl.breaks.push_back(mesh.vertex(cl[1])[0]);
    pl.left.push_back(u.coeffs[cl[0]]);
    pl.right.push_back(u.coeffs[cl[1]]);
  }
  return pl;
}

PiecewiseLinear1D PiecewiseLinear1D::step(const std::vector<double>& breaks,
                                          const std::vector<double>& values) {
  if (breaks.size() != values.size() + 1)
    throw Error(ErrorKind::InvalidArgument, "step function needs one value per piece");
  return PiecewiseLinear1D{breaks, values, values};
}

double PiecewiseLinear1D::integral(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double l = std::max(lo, breaks[i]);
    const double r = std::min(hi, breaks[i + 1]);
    if (r <= l) continue;
    s += (r - l) * 0.5 * (piece_value(*this, i, l) + piece_value(*this, i, r));
  }
  return s;
}

StepFunction partition_average(const PiecewiseLinear1D& u, const Partition& P) {
  StepFunction sf{P, {}};
  for (const auto& c : P.cells) {
    const double m = c.hi[0] - c.lo[0];
    if (!(m > 0.0)) {
      sf.values.push_back(0.0);  // null cell
      continue;
    }
    sf.values.push_back(u.integral(c.lo[0], c.hi[0]) / m);
  }
  return sf;
}

StepFunction partition_average(const FemField& u, const Partition& P) {
  if (u.mesh->dim() == 1) return partition_average(PiecewiseLinear1D::from_field(u), P);
  StepFunction sf{P, std::vector<double>(P.cells.size(), 0.0)};
  std::vector<double> mass(P.cells.size(), 0.0);
  for (const auto& mb : memberships(*u.mesh, P)) {
    // Cell mean of a P1 field is its value at the centroid.
    sf.values[mb.part] += mb.weight * eval_in_cell(u, mb.cell, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    mass[mb.part] += mb.weight;
  }
  for (std::size_t j = 0; j < mass.size(); ++j)
    if (mass[j] > 0.0) sf.values[j] /= mass[j];
  return sf;
}

double measure_deviation(const PiecewiseLinear1D& u, const StepFunction& uP, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  double total = 0.0;
  const auto& cells = uP.partition.cells;
  std::size_t j = 0;
  for (std::size_t i = 0; i + 1 < u.breaks.size(); ++i) {
    const double b0 = u.breaks[i], b1 = u.breaks[i + 1];
    while (j < cells.size() && cells[j].hi[0] <= b0) ++j;
    for (std::size_t jj = j; jj < cells.size() && cells[jj].lo[0] < b1; ++jj) {
      const double l = std::max(b0, cells[jj].lo[0]);
      const double r = std::min(b1, cells[jj].hi[0]);
      if (r <= l) continue;
      const double gl = piece_value(u, i, l) - uP.values[jj];
      const double gr = piece_value(u, i, r) - uP.values[jj];
      total += superlevel_measure(gl, gr, r - l, eps) + superlevel_measure(-gl, -gr, r - l, eps);
    }
  }
  return total;
}

const char* to_string(SequenceKind k) {
  switch (k) {
    case SequenceKind::Sawtooth: return "sawtooth";
    case SequenceKind::ModulatedSawtooth: return "modulated-sawtooth";
    case SequenceKind::StrongPerturbation: return "strong-perturbation";
  }
  return "unknown";
}

SequenceKind sequence_kind_from_string(const std::string& s) {
  if (s == "sawtooth") return SequenceKind::Sawtooth;
  if (s == "modulated-sawtooth") return SequenceKind::ModulatedSawtooth;
  if (s == "strong-perturbation") return SequenceKind::StrongPerturbation;
  throw Error(ErrorKind::NotFound, fmt::format("sequence family '{}'", s));
}

SequenceMember make_sequence(SequenceKind kind, const Domain& domain, int k, int resolution) {
  require_interval(domain, "make_sequence");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, fmt::format("k must be >= 1, got {}", k));
  if (resolution < 1 || resolution % (2 * k) != 0)
    throw Error(ErrorKind::InvalidResolution,
                fmt::format("resolution {} is not a multiple of 2k = {}", resolution, 2 * k));
  auto mesh = make_mesh(domain, resolution);
  const double L = domain.b - domain.a;
  const long per_tooth = resolution / k;
  const double h = L / resolution;

  // Vertex-exact sawtooth: k teeth of slope ±1, zero at every tooth boundary.
  Eigen::VectorXd saw(static_cast<Eigen::Index>(mesh->num_vertices()));
  for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
    const long idx = std::lround((mesh->vertex(i)[0] - domain.a) / h);
    const long j = idx % per_tooth;
    saw[i] = static_cast<double>(std::min(j, per_tooth - j)) * h;
  }

  auto s = [&](const Vec& x) { return (x[0] - domain.a) / L; };
  SequenceMember m;
  m.k = k;
  switch (kind) {
    case SequenceKind::Sawtooth:
      m.u = FemField(mesh, saw);
      m.limit = FemField::zeros(mesh);
      break;
    case SequenceKind::ModulatedSawtooth: {
      const FemField env = interpolate(mesh, [&](const Vec& x) { return std::sin(std::numbers::pi * s(x)); });
      m.u = FemField(mesh, saw.cwiseProduct(env.coeffs));
      m.limit = FemField::zeros(mesh);
      break;
    }
    case SequenceKind::StrongPerturbation:
      m.limit = interpolate(mesh, s);
      m.u = interpolate(mesh, [&](const Vec& x) {
        return s(x) + std::sin(std::numbers::pi * s(x)) / static_cast<double>(k);
      });
      break;
  }
  return m;
}

std::string DictionaryElement::label() const {
  if (kind == Kind::Indicator) return fmt::format("indicator[{},{}]", lo, hi);
  return fmt::format("x^{}", degree);
}

double DictionaryElement::integral(double l, double r) const {
  if (kind == Kind::Indicator) return std::max(0.0, std::min(r, hi) - std::max(l, lo));
  const int n = degree + 1;
  return (std::pow(r, n) - std::pow(l, n)) / n;
}

std::vector<DictionaryElement> default_dictionary(const Domain& domain, int max_depth, int max_degree) {
  require_interval(domain, "default_dictionary");
  std::vector<DictionaryElement> dict;
  const double L = domain.b - domain.a;
  for (int depth = 0; depth <= max_depth; ++depth) {
    const int n = 1 << depth;
    for (int i = 0; i < n; ++i) {
      DictionaryElement e;
      e.kind = DictionaryElement::Kind::Indicator;
      e.lo = domain.a + L * i / n;
      e.hi = domain.a + L * (i + 1) / n;
      dict.push_back(e);
    }
  }
  for (int d = 0; d <= max_degree; ++d) {
    DictionaryElement e;
    e.kind = DictionaryElement::Kind::Monomial;
    e.degree = d;
    dict.push_back(e);
  }
  return dict;
}

WeakConvergenceReport weak_convergence_witness(SequenceKind kind, const Domain& domain,
                                               const std::vector<int>& ks, double p, double q,
                                               const SequenceResolution& resolution,
                                               const std::vector<DictionaryElement>& dictionary) {
  if (dictionary.empty()) throw Error(ErrorKind::InvalidArgument, "dictionary must be nonempty");
  WeakConvergenceReport rep;
  rep.dictionary_size = dictionary.size();
  std::vector<double> dict_vals, lq_vals;
  for (int k : ks) {
    const auto m = make_sequence(kind, domain, k, resolution(k));
    const Mesh& mesh = *m.u.mesh;
    WeakConvergenceRow row;
    row.k = k;
    row.grad_p_norm = w1p_seminorm(m.u, p);
    for (const auto& phi : dictionary) {
      double s = 0.0;
      for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const double dg = grad_field(m.u, c)[0] - grad_field(m.limit, c)[0];
        const double x0 = mesh.vertex(mesh.cell(c)[0])[0];
        const double x1 = mesh.vertex(mesh.cell(c)[1])[0];
        s += dg * phi.integral(x0, x1);
      }
      row.dictionary_max = std::max(row.dictionary_max, std::abs(s));
    }
    row.lq_distance = lp_norm(FemField(m.u.mesh, m.u.coeffs - m.limit.coeffs), q);
    rep.sup_grad_norm = std::max(rep.sup_grad_norm, row.grad_p_norm);
    dict_vals.push_back(row.dictionary_max);
    lq_vals.push_back(row.lq_distance);
    rep.rows.push_back(row);
  }
  rep.dictionary_tail = last_quartile_max(dict_vals);
  rep.lq_tail = last_quartile_max(lq_vals);
  rep.bounded = std::isfinite(rep.sup_grad_norm);
  // Tails must have dropped by an order of magnitude from the largest value.
  auto decayed = [](double tail, const std::vector<double>& v) {
    if (v.empty()) return false;
    const double peak = *std::max_element(v.begin(), v.end());
    return tail <= 1e-12 || tail <= 0.1 * peak;
  };
  rep.weak_gradients = decayed(rep.dictionary_tail, dict_vals);
  rep.strong_lq = decayed(rep.lq_tail, lq_vals);
  return rep;
}

const char* to_string(LscVerdict v) {
  return v == LscVerdict::Consistent ? "lsc-consistent" : "lsc-violated";
}

LscVerdict verdict_from_string(const std::string& s) {
  if (s == "lsc-consistent") return LscVerdict::Consistent;
  if (s == "lsc-violated") return LscVerdict::Violated;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown verdict '{}'", s));
}

SemicontinuityReport liminf_check(const Integrand& f, SequenceKind kind, const Domain& domain,
                                  const std::vector<int>& ks, const SequenceResolution& resolution) {
  if (ks.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one k");
  SemicontinuityReport rep;
  rep.functional = f.name;
  rep.kind = kind;
  const int alt_order = f.quadrature_order == 3 ? 2 : 3;
  double quad_err = 0.0;
  SequenceMember last;
  for (int k : ks) {
    auto m = make_sequence(kind, domain, k, resolution(k));
    const double F = assemble_F(f, m.u);
    quad_err = std::max(quad_err, std::abs(F - assemble_F(f, m.u, alt_order)));
    rep.table.emplace_back(k, F);
    last = std::move(m);
  }
  rep.F_limit = assemble_F(f, last.limit);
  quad_err = std::max(quad_err, std::abs(rep.F_limit - assemble_F(f, last.limit, alt_order)));
  rep.tol = std::max(quad_err, 1e-12 * std::max(1.0, std::abs(rep.F_limit)));

  const std::size_t from = (3 * rep.table.size()) / 4;
  rep.liminf_from_k = rep.table[from].first;
  rep.liminf = std::numeric_limits<double>::infinity();
  for (std::size_t i = from; i < rep.table.size(); ++i) rep.liminf = std::min(rep.liminf, rep.table[i].second);
  rep.verdict = rep.liminf < rep.F_limit - 10.0 * rep.tol ? LscVerdict::Violated : LscVerdict::Consistent;
  return rep;
}

ChebyshevCheck chebyshev_check(std::span<const double> values, std::span<const double> measures,
                               double t, double p) {
  if (values.size() != measures.size())
    throw Error(ErrorKind::InvalidArgument, "values and measures differ in length");
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "t must be > 0");
  ChebyshevCheck chk;
  chk.t = t;
  const double tp = std::pow(t, p);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double a = std::abs(values[i]);
    if (a > t) {
      chk.measure += measures[i];
      chk.lhs += measures[i] * tp;
    }
    if (a >= t) chk.measure_nonstrict += measures[i];
    chk.moment += measures[i] * std::pow(a, p);
  }
  chk.bound = chk.moment / tp;
  chk.holds = chk.lhs <= chk.moment;
  return chk;
}

ChebyshevCheck truncation_measures(const FemField& u, int j, double p) {
  if (j < 1) throw Error(ErrorKind::InvalidArgument, "j must be >= 1");
  const Mesh& mesh = *u.mesh;
  std::vector<double> vals(mesh.num_cells()), meas(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    vals[c] = norm(grad_field(u, c));
    meas[c] = mesh.geometry(c).measure;
  }
  return chebyshev_check(vals, meas, static_cast<double>(j), p);
}

double jensen_gap(const Integrand& f, const Vec& x0, double u0, std::span<const Vec> values,
                  std::span<const double> weights) {
  if (values.size() != weights.size() || values.empty())
    throw Error(ErrorKind::InvalidArgument, "need matching nonempty values and weights");
  double wsum = 0.0, fsum = 0.0;
  Vec mean{0.0, 0.0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    wsum += weights[i];
    mean = mean + weights[i] * values[i];
    fsum += weights[i] * f.eval(x0, u0, values[i]);
  }
  return f.eval(x0, u0, (1.0 / wsum) * mean) - fsum / wsum;
}

double jensen_cell_check(const Integrand& f, const Vec& x0, double u0, const FemField& u,
                         const Partition& P) {
  std::vector<std::vector<Vec>> vals(P.cells.size());
  std::vector<std::vector<double>> wts(P.cells.size());
  for (const auto& mb : memberships(*u.mesh, P)) {
    vals[mb.part].push_back(grad_field(u, mb.cell));
    wts[mb.part].push_back(mb.weight);
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < P.cells.size(); ++j) {
    if (vals[j].empty()) continue;
    worst = std::max(worst, jensen_gap(f, x0, u0, vals[j], wts[j]));
  }
  return worst;
}

}  // namespace varmin
