#pragma once

#include <array>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "varmin/geometry.hpp"

namespace varmin {

// Simplex as vertex indices; 1D cells use the first two entries and
// store -1 in the third.
using Cell = std::array<int, 3>;

struct CellGeometry {
  double measure = 0.0;
  std::array<Vec, 3> grad_basis{};  // ∇ of each local hat function
  double diameter = 0.0;
};

class Mesh {
 public:
  int dim() const { return domain_.dim; }
  const Domain& domain() const { return domain_; }
  int level() const { return level_; }
  // Number of uniform subdivisions per axis.
  int resolution() const { return resolution_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  int vertices_per_cell() const { return dim() + 1; }

  const std::vector<Vec>& vertices() const { return vertices_; }
  const Vec& vertex(std::size_t i) const { return vertices_[i]; }
  const std::vector<Cell>& cells() const { return cells_; }
  const Cell& cell(std::size_t c) const { return cells_[c]; }
  const CellGeometry& geometry(std::size_t c) const { return geometry_[c]; }

  const std::vector<int>& boundary_vertices() const { return boundary_; }
  bool is_boundary(std::size_t i) const { return is_boundary_[i] != 0; }

  // Vertices [0, parent_vertex_count) coincide with the parent mesh; vertex
  // parent_vertex_count + k is the midpoint of edge midpoint_parents()[k].
  std::size_t parent_vertex_count() const { return parent_vertex_count_; }
  const std::vector<std::pair<int, int>>& midpoint_parents() const { return midpoint_parents_; }

  Vec centroid(std::size_t c) const;
  // Barycentric coordinates of x with respect to cell c.
  std::array<double, 3> barycentric(std::size_t c, const Vec& x) const;
  // Index of a cell containing x; throws Error(OutOfDomain) if none.
  std::size_t locate(const Vec& x) const;

  friend std::shared_ptr<const Mesh> make_mesh(const Domain& domain, int resolution);
  friend std::shared_ptr<const Mesh> refine(const Mesh& coarse);

 private:
  void finalize();

  Domain domain_;
  int level_ = 0;
  int resolution_ = 0;
  std::vector<Vec> vertices_;
  std::vector<Cell> cells_;
  std::vector<CellGeometry> geometry_;
  std::vector<int> boundary_;
  std::vector<char> is_boundary_;
  std::size_t parent_vertex_count_ = 0;
  std::vector<std::pair<int, int>> midpoint_parents_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

// 1D: `resolution` equal sub-intervals. 2D: resolution x resolution squares,
// each split along its (lower-left, upper-right) diagonal.
MeshPtr make_mesh(const Domain& domain, int resolution);
// Uniform bisection in 1D, red refinement (4 children) in 2D.
MeshPtr refine(const Mesh& coarse);

// Continuous piecewise-linear field; coefficient i is the value at vertex i.
struct FemField {
  MeshPtr mesh;
  Eigen::VectorXd coeffs;

  FemField() = default;
  FemField(MeshPtr m, Eigen::VectorXd c);
  static FemField zeros(MeshPtr m);
};

FemField interpolate(MeshPtr mesh, const std::function<double(const Vec&)>& g);
// Reproduces a field from the parent mesh exactly on its refinement.
FemField prolongate(const FemField& coarse, MeshPtr fine);

double eval_field(const FemField& u, const Vec& x);
double eval_in_cell(const FemField& u, std::size_t cell, const std::array<double, 3>& bary);
Vec grad_field(const FemField& u, std::size_t cell);

struct QuadPoint {
  Vec x;
  double weight;
  std::array<double, 3> bary;
};

// Order 1: midpoint/centroid. Order 2 and 3: two-point Gauss in 1D; in 2D
// a 3-point degree-2 rule and a 6-point degree-4 rule. Weights are positive
// and sum to the cell measure.
std::vector<QuadPoint> quadrature(const Mesh& mesh, std::size_t cell, int order);

// Axis-aligned boxes (intervals in 1D) covering the domain.
struct PartitionCell {
  Vec lo, hi;
  double measure(int dim) const;
  double diameter(int dim) const;
};

struct Partition {
  Domain domain;
  std::vector<PartitionCell> cells;
  double norm = 0.0;  // max cell diameter

  // 1D partition with given sorted breakpoints (first = a, last = b).
  static Partition from_breakpoints(const Domain& domain, const std::vector<double>& breaks);
};

Partition make_partition(const Domain& domain, int cells_per_axis);

}  // namespace varmin
