#include "varmin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "varmin/error.hpp"

namespace varmin {

Vec Mesh::centroid(std::size_t c) const {
  const Cell& cl = cells_[c];
  Vec s{0.0, 0.0};
  const int nv = vertices_per_cell();
  for (int k = 0; k < nv; ++k) s = s + vertices_[cl[k]];
  return (1.0 / nv) * s;
}

std::array<double, 3> Mesh::barycentric(std::size_t c, const Vec& x) const {
  const Cell& cl = cells_[c];
  const CellGeometry& g = geometry_[c];
  std::array<double, 3> lam{0.0, 0.0, 0.0};
  const Vec& v0 = vertices_[cl[0]];
  if (dim() == 1) {
    lam[1] = (x[0] - v0[0]) * g.grad_basis[1][0];
    lam[0] = 1.0 - lam[1];
    return lam;
  }
  const Vec dx = x - v0;
  lam[1] = dot(g.grad_basis[1], dx);
  lam[2] = dot(g.grad_basis[2], dx);
  lam[0] = 1.0 - lam[1] - lam[2];
  return lam;
}

std::size_t Mesh::locate(const Vec& x) const {
  if (!domain_.contains(x))
    throw Error(ErrorKind::OutOfDomain, fmt::format("point ({}, {})", x[0], x[1]));
  std::size_t best = 0;
  double best_min = -std::numeric_limits<double>::infinity();
  const int nv = vertices_per_cell();
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto lam = barycentric(c, x);
    double mn = lam[0];
    for (int k = 1; k < nv; ++k) mn = std::min(mn, lam[k]);
    if (mn >= 0.0) return c;
    if (mn > best_min) {
      best_min = mn;
      best = c;
    }
  }
  // Points on ∂Ω can miss every cell by rounding.
  if (best_min > -1e-9) return best;
  throw Error(ErrorKind::OutOfDomain, fmt::format("point ({}, {}) not in any cell", x[0], x[1]));
}

void Mesh::finalize() {
  geometry_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Cell& cl = cells_[c];
    CellGeometry& g = geometry_[c];
    if (dim() == 1) {
      const double h = vertices_[cl[1]][0] - vertices_[cl[0]][0];
      g.measure = std::abs(h);
      g.diameter = std::abs(h);
      g.grad_basis = {Vec{-1.0 / h, 0.0}, Vec{1.0 / h, 0.0}, Vec{0.0, 0.0}};
    } else {
      const Vec& a = vertices_[cl[0]];
      const Vec e1 = vertices_[cl[1]] - a;
      const Vec e2 = vertices_[cl[2]] - a;
      const double det = e1[0] * e2[1] - e1[1] * e2[0];
      g.measure = 0.5 * std::abs(det);
      // Rows of J^{-1}, J = [e1 e2].
      const Vec g1{e2[1] / det, -e2[0] / det};
      const Vec g2{-e1[1] / det, e1[0] / det};
      g.grad_basis = {Vec{-g1[0] - g2[0], -g1[1] - g2[1]}, g1, g2};
      g.diameter = std::max({norm(e1), norm(e2), norm(vertices_[cl[2]] - vertices_[cl[1]])});
    }
  }
  is_boundary_.assign(vertices_.size(), 0);
  boundary_.clear();
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (domain_.on_boundary(vertices_[i])) {
      is_boundary_[i] = 1;
      boundary_.push_back(static_cast<int>(i));
    }
  }
}

MeshPtr make_mesh(const Domain& domain, int resolution) {
  if (resolution < 1)
    throw Error(ErrorKind::InvalidDomain, fmt::format("resolution must be >= 1, got {}", resolution));
  if (domain.dim == 1) {
    (void)Domain::interval(domain.a, domain.b);
  } else if (domain.dim == 2) {
    (void)Domain::rectangle(domain.a, domain.b, domain.c, domain.d);
  } else {
    throw Error(ErrorKind::InvalidDomain, fmt::format("dimension {}", domain.dim));
  }
  auto m = std::make_shared<Mesh>();
  m->domain_ = domain;
  m->resolution_ = resolution;
  const int n = resolution;
  if (domain.dim == 1) {
    for (int i = 0; i <= n; ++i)
      m->vertices_.push_back({domain.a + (domain.b - domain.a) * i / n, 0.0});
    for (int i = 0; i < n; ++i) m->cells_.push_back({i, i + 1, -1});
  } else {
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        m->vertices_.push_back(
            {domain.a + (domain.b - domain.a) * i / n, domain.c + (domain.d - domain.c) * j / n});
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        m->cells_.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        m->cells_.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
  }
  m->parent_vertex_count_ = m->vertices_.size();
  m->finalize();
  return m;
}

MeshPtr refine(const Mesh& coarse) {
  auto m = std::make_shared<Mesh>();
  m->domain_ = coarse.domain_;
  m->level_ = coarse.level_ + 1;
  m->resolution_ = 2 * coarse.resolution_;
  m->vertices_ = coarse.vertices_;
  m->parent_vertex_count_ = coarse.vertices_.size();

  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(m->vertices_.size());
    m->vertices_.push_back(0.5 * (coarse.vertices_[a] + coarse.vertices_[b]));
    m->midpoint_parents_.push_back(key);
    midpoint.emplace(key, id);
    return id;
  };

  for (const Cell& c : coarse.cells_) {
    if (coarse.dim() == 1) {
      const int mm = mid(c[0], c[1]);
      m->cells_.push_back({c[0], mm, -1});
      m->cells_.push_back({mm, c[1], -1});
    } else {
      const int ab = mid(c[0], c[1]);
      const int bc = mid(c[1], c[2]);
      const int ca = mid(c[2], c[0]);
      m->cells_.push_back({c[0], ab, ca});
      m->cells_.push_back({ab, c[1], bc});
      m->cells_.push_back({ca, bc, c[2]});
      m->cells_.push_back({ab, bc, ca});
    }
  }
  m->finalize();
  return m;
}

FemField::FemField(MeshPtr m, Eigen::VectorXd c) : mesh(std::move(m)), coeffs(std::move(c)) {
  if (!mesh || static_cast<std::size_t>(coeffs.size()) != mesh->num_vertices())
    throw Error(ErrorKind::InvalidArgument, "coefficient count does not match mesh vertices");
}

FemField FemField::zeros(MeshPtr m) {
  const auto n = static_cast<Eigen::Index>(m->num_vertices());
  return FemField(std::move(m), Eigen::VectorXd::Zero(n));
}

FemField interpolate(MeshPtr mesh, const std::function<double(const Vec&)>& g) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(mesh->num_vertices()));
  for (std::size_t i = 0; i < mesh->num_vertices(); ++i) c[i] = g(mesh->vertex(i));
  return FemField(std::move(mesh), std::move(c));
}

FemField prolongate(const FemField& coarse, MeshPtr fine) {
  if (fine->parent_vertex_count() != coarse.mesh->num_vertices() ||
      fine->level() != coarse.mesh->level() + 1)
    throw Error(ErrorKind::InvalidArgument, "fine mesh is not a refinement of the field's mesh");
  Eigen::VectorXd c(static_cast<Eigen::Index>(fine->num_vertices()));
  c.head(coarse.coeffs.size()) = coarse.coeffs;
  const auto& parents = fine->midpoint_parents();
  for (std::size_t k = 0; k < parents.size(); ++k)
    c[coarse.coeffs.size() + k] = 0.5 * (coarse.coeffs[parents[k].first] + coarse.coeffs[parents[k].second]);
  return FemField(std::move(fine), std::move(c));
}

double eval_in_cell(const FemField& u, std::size_t cell, const std::array<double, 3>& bary) {
  const Cell& c = u.mesh->cell(cell);
  double s = 0.0;
  for (int k = 0; k < u.mesh->vertices_per_cell(); ++k) s += bary[k] * u.coeffs[c[k]];
  return s;
}

double eval_field(const FemField& u, const Vec& x) {
  const std::size_t c = u.mesh->locate(x);
  return eval_in_cell(u, c, u.mesh->barycentric(c, x));
}

Vec grad_field(const FemField& u, std::size_t cell) {
  if (cell >= u.mesh->num_cells())
    throw Error(ErrorKind::InvalidArgument, fmt::format("cell index {} out of range", cell));
  const Cell& c = u.mesh->cell(cell);
  const CellGeometry& g = u.mesh->geometry(cell);
  Vec s{0.0, 0.0};
  for (int k = 0; k < u.mesh->vertices_per_cell(); ++k) s = s + u.coeffs[c[k]] * g.grad_basis[k];
  return s;
}

namespace {

struct RefRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weight;  // fractions of the cell measure
};

const RefRule& reference_rule(int dim, int order) {
  static const RefRule line1{{{0.5, 0.5, 0.0}}, {1.0}};
  static const RefRule line2 = [] {
    const double s = 0.5 / std::sqrt(3.0);
    return RefRule{{{0.5 + s, 0.5 - s, 0.0}, {0.5 - s, 0.5 + s, 0.0}}, {0.5, 0.5}};
  }();
  static const RefRule tri1{{{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {1.0}};
  static const RefRule tri2{{{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}},
                            {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  static const RefRule tri4 = [] {
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    return RefRule{{{1 - 2 * a, a, a}, {a, 1 - 2 * a, a}, {a, a, 1 - 2 * a},
                    {1 - 2 * b, b, b}, {b, 1 - 2 * b, b}, {b, b, 1 - 2 * b}},
                   {wa, wa, wa, wb, wb, wb}};
  }();
  if (order < 1 || order > 3) throw Error(ErrorKind::InvalidOrder, fmt::format("order {}", order));
  if (dim == 1) return order == 1 ? line1 : line2;
  if (order == 1) return tri1;
  return order == 2 ? tri2 : tri4;
}

}  // namespace

std::vector<QuadPoint> quadrature(const Mesh& mesh, std::size_t cell, int order) {
  const RefRule& rule = reference_rule(mesh.dim(), order);
  const Cell& c = mesh.cell(cell);
  const double meas = mesh.geometry(cell).measure;
  std::vector<QuadPoint> pts;
  pts.reserve(rule.weight.size());
  for (std::size_t q = 0; q < rule.weight.size(); ++q) {
    Vec x{0.0, 0.0};
    for (int k = 0; k < mesh.vertices_per_cell(); ++k) x = x + rule.bary[q][k] * mesh.vertex(c[k]);
    pts.push_back({x, rule.weight[q] * meas, rule.bary[q]});
  }
  return pts;
}

double PartitionCell::measure(int dim) const {
  return dim == 1 ? hi[0] - lo[0] : (hi[0] - lo[0]) * (hi[1] - lo[1]);
}

double PartitionCell::diameter(int dim) const {
  return dim == 1 ? hi[0] - lo[0] : std::hypot(hi[0] - lo[0], hi[1] - lo[1]);
}

Partition Partition::from_breakpoints(const Domain& domain, const std::vector<double>& breaks) {
  if (domain.dim != 1 || breaks.size() < 2 || breaks.front() != domain.a || breaks.back() != domain.b)
    throw Error(ErrorKind::InvalidArgument, "breakpoints must span the interval");
  Partition P;
  P.domain = domain;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) throw Error(ErrorKind::InvalidArgument, "breakpoints must increase");
    P.cells.push_back({{breaks[i], 0.0}, {breaks[i + 1], 0.0}});
    P.norm = std::max(P.norm, breaks[i + 1] - breaks[i]);
  }
  return P;
}

Partition make_partition(const Domain& domain, int m) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, fmt::format("cells_per_axis must be >= 1, got {}", m));
  Partition P;
  P.domain = domain;
  auto cut = [m](double lo, double hi, int i) { return i == m ? hi : lo + (hi - lo) * i / m; };
  if (domain.dim == 1) {
    for (int i = 0; i < m; ++i)
      P.cells.push_back({{cut(domain.a, domain.b, i), 0.0}, {cut(domain.a, domain.b, i + 1), 0.0}});
  } else {
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        P.cells.push_back({{cut(domain.a, domain.b, i), cut(domain.c, domain.d, j)},
                           {cut(domain.a, domain.b, i + 1), cut(domain.c, domain.d, j + 1)}});
  }
  for (const auto& c : P.cells) P.norm = std::max(P.norm, c.diameter(domain.dim));
  return P;
}

}  // namespace varmin
