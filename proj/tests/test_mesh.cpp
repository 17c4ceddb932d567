#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "varmin/error.hpp"
#include "varmin/mesh.hpp"

namespace varmin {
namespace {

const Domain kUnit = Domain::interval(0.0, 1.0);
const Domain kSquare = Domain::rectangle(0.0, 1.0, 0.0, 1.0);

TEST(Domain, RejectsDegenerate) {
  EXPECT_THROW(Domain::interval(1.0, 1.0), Error);
  EXPECT_THROW(Domain::rectangle(0.0, 1.0, 2.0, 1.0), Error);
  EXPECT_DOUBLE_EQ(Domain::rectangle(0, 2, 0, 3).measure(), 6.0);
}

TEST(MakeMesh, Counts) {
  const auto m1 = make_mesh(kUnit, 4);
  EXPECT_EQ(m1->num_vertices(), 5u);
  EXPECT_EQ(m1->num_cells(), 4u);
  EXPECT_EQ(m1->boundary_vertices().size(), 2u);
  const auto m2 = make_mesh(kSquare, 2);
  EXPECT_EQ(m2->num_vertices(), 9u);
  EXPECT_EQ(m2->num_cells(), 8u);
  EXPECT_EQ(m2->boundary_vertices().size(), 8u);
}

TEST(MakeMesh, ZeroResolutionIsInvalidDomain) {
  try {
    make_mesh(kUnit, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDomain);
  }
}

// Cells tile Ω: measures sum to |Ω|, every boundary vertex sits on ∂Ω and
// interior vertices do not.
TEST(MakeMesh, CoversDomain) {
  for (const Domain& d : {kUnit, Domain::interval(-1, 2), kSquare, Domain::rectangle(0, 2, -1, 0)}) {
    for (int res : {1, 3, 8}) {
      auto m = make_mesh(d, res);
      for (int l = 0; l < 2; ++l, m = refine(*m)) {
        double total = 0.0;
        for (std::size_t c = 0; c < m->num_cells(); ++c) {
          EXPECT_GT(m->geometry(c).measure, 0.0);
          total += m->geometry(c).measure;
        }
        EXPECT_NEAR(total, d.measure(), 1e-12);
        for (std::size_t i = 0; i < m->num_vertices(); ++i)
          EXPECT_EQ(m->is_boundary(i), d.on_boundary(m->vertex(i))) << i;
      }
    }
  }
}

// Disjoint interiors: random points have positive barycentrics in exactly one cell.
TEST(MakeMesh, CellsHaveDisjointInteriors) {
  const auto m = refine(*make_mesh(kSquare, 3));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec x{u(rng), u(rng)};
    int inside = 0;
    for (std::size_t c = 0; c < m->num_cells(); ++c) {
      const auto b = m->barycentric(c, x);
      if (b[0] > 1e-12 && b[1] > 1e-12 && b[2] > 1e-12) ++inside;
    }
    EXPECT_EQ(inside, 1);
  }
}

TEST(Refine, Counts) {
  EXPECT_EQ(refine(*make_mesh(kUnit, 4))->num_cells(), 8u);
  EXPECT_EQ(refine(*make_mesh(kSquare, 2))->num_cells(), 32u);
  EXPECT_EQ(refine(*make_mesh(kSquare, 2))->level(), 1);
}

TEST(Refine, ParentVerticesArePreserved) {
  for (const Domain& d : {kUnit, kSquare}) {
    const auto coarse = make_mesh(d, 3);
    const auto fine = refine(*coarse);
    ASSERT_EQ(fine->parent_vertex_count(), coarse->num_vertices());
    for (std::size_t i = 0; i < coarse->num_vertices(); ++i) EXPECT_EQ(fine->vertex(i), coarse->vertex(i));
    for (std::size_t k = 0; k < fine->midpoint_parents().size(); ++k) {
      const auto [a, b] = fine->midpoint_parents()[k];
      const Vec mid = 0.5 * (coarse->vertex(a) + coarse->vertex(b));
      EXPECT_EQ(fine->vertex(coarse->num_vertices() + k), mid);
    }
  }
}

TEST(Refine, ProlongationPreservesField) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0), c(-3.0, 3.0);
  for (const Domain& d : {kUnit, kSquare}) {
    const auto coarse = make_mesh(d, 4);
    FemField uc = FemField::zeros(coarse);
    for (Eigen::Index i = 0; i < uc.coeffs.size(); ++i) uc.coeffs[i] = c(rng);
    const auto fine = refine(*coarse);
    const FemField uf = prolongate(uc, fine);
    for (int i = 0; i < 100; ++i) {
      const Vec x{u(rng), d.dim == 2 ? u(rng) : 0.0};
      EXPECT_NEAR(eval_field(uf, x), eval_field(uc, x), 1e-12);
    }
  }
}

TEST(Field, AffineReproduction) {
  for (const Domain& d : {kUnit, kSquare}) {
    const auto m = make_mesh(d, 5);
    const FemField u = interpolate(m, [](const Vec& x) { return 2.0 * x[0] - x[1] + 0.5; });
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> r(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const Vec x{r(rng), d.dim == 2 ? r(rng) : 0.0};
      EXPECT_NEAR(eval_field(u, x), 2.0 * x[0] - x[1] + 0.5, 1e-13);
    }
    for (std::size_t c = 0; c < m->num_cells(); ++c) {
      const Vec g = grad_field(u, c);
      EXPECT_NEAR(g[0], 2.0, 1e-12);
      EXPECT_NEAR(g[1], d.dim == 2 ? -1.0 : 0.0, 1e-12);
    }
    for (std::size_t i = 0; i < m->num_vertices(); ++i) EXPECT_DOUBLE_EQ(eval_field(u, m->vertex(i)), u.coeffs[i]);
  }
}

TEST(Field, ConstantHasZeroGradient) {
  const auto m = make_mesh(kSquare, 3);
  const FemField u(m, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m->num_vertices()), 4.2));
  for (std::size_t c = 0; c < m->num_cells(); ++c) {
    EXPECT_DOUBLE_EQ(grad_field(u, c)[0], 0.0);
    EXPECT_DOUBLE_EQ(grad_field(u, c)[1], 0.0);
  }
}

TEST(Field, SingleCellGradient) {
  const auto m = make_mesh(kUnit, 1);
  Eigen::VectorXd c(2);
  c << 0.0, 1.0;
  EXPECT_DOUBLE_EQ(grad_field(FemField(m, c), 0)[0], 1.0);
}

TEST(Field, LocateOutsideThrows) {
  const auto m = make_mesh(kUnit, 4);
  try {
    m->locate({1.5, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
}

double integrate(const Mesh& m, int order, const std::function<double(const Vec&)>& g) {
  double s = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    for (const auto& q : quadrature(m, c, order)) s += q.weight * g(q.x);
  return s;
}

TEST(Quadrature, GaussExactness1D) {
  const auto m = make_mesh(kUnit, 1);
  EXPECT_NEAR(integrate(*m, 3, [](const Vec& x) { return x[0] * x[0] * x[0]; }), 0.25, 1e-15);
  EXPECT_NEAR(integrate(*m, 2, [](const Vec& x) { return x[0] * x[0]; }), 1.0 / 3.0, 1e-14);
}

// Exhaustive monomials up to the stated degree: 1 for order 1, 3 for the
// 1D Gauss rule, 2 and 4 for the triangle rules.
TEST(Quadrature, MonomialExactness) {
  const auto m1 = make_mesh(Domain::interval(0.0, 2.0), 3);
  for (int order = 1; order <= 3; ++order) {
    const int degree = order == 1 ? 1 : 3;
    for (int k = 0; k <= degree; ++k)
      EXPECT_NEAR(integrate(*m1, order, [k](const Vec& x) { return std::pow(x[0], k); }),
                  std::pow(2.0, k + 1) / (k + 1), 1e-12)
          << "order " << order << " x^" << k;
  }
  const auto m2 = make_mesh(Domain::rectangle(0.0, 1.0, 0.0, 2.0), 3);
  for (int order = 1; order <= 3; ++order) {
    const int degree = order == 1 ? 1 : order == 2 ? 2 : 4;
    for (int i = 0; i <= degree; ++i)
      for (int j = 0; i + j <= degree; ++j) {
        const double exact = (1.0 / (i + 1)) * std::pow(2.0, j + 1) / (j + 1);
        EXPECT_NEAR(integrate(*m2, order, [i, j](const Vec& x) { return std::pow(x[0], i) * std::pow(x[1], j); }),
                    exact, 1e-12)
            << "order " << order << " x^" << i << " y^" << j;
      }
  }
}

TEST(Quadrature, WeightsSumToCellMeasure) {
  const auto m = refine(*make_mesh(Domain::rectangle(0, 3, 0, 1), 2));
  for (int order = 1; order <= 3; ++order)
    for (std::size_t c = 0; c < m->num_cells(); ++c) {
      double w = 0.0;
      for (const auto& q : quadrature(*m, c, order)) {
        EXPECT_GT(q.weight, 0.0);
        w += q.weight;
      }
      EXPECT_NEAR(w, m->geometry(c).measure, 1e-15);
    }
}

TEST(Quadrature, InvalidOrder) {
  const auto m = make_mesh(kUnit, 1);
  for (int order : {0, 4})
    try {
      quadrature(*m, 0, order);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidOrder);
    }
}

TEST(Partition, Norms) {
  EXPECT_DOUBLE_EQ(make_partition(kUnit, 4).norm, 0.25);
  EXPECT_DOUBLE_EQ(make_partition(kSquare, 4).norm, std::sqrt(2.0) / 4.0);
}

TEST(Partition, TilesDomainAndNormIsMaxDiameter) {
  for (const Domain& d : {kUnit, kSquare, Domain::rectangle(-1, 1, 0, 3)}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= 64; m *= 2) {
      const Partition P = make_partition(d, m);
      double total = 0.0, diam = 0.0;
      for (const auto& c : P.cells) {
        total += c.measure(d.dim);
        diam = std::max(diam, c.diameter(d.dim));
      }
      EXPECT_NEAR(total, d.measure(), 1e-12);
      EXPECT_DOUBLE_EQ(P.norm, diam);
      EXPECT_LT(P.norm, prev);
      prev = P.norm;
    }
  }
}

TEST(Partition, FromBreakpoints) {
  const Partition P = Partition::from_breakpoints(kUnit, {0.0, 0.1, 0.5, 1.0});
  ASSERT_EQ(P.cells.size(), 3u);
  EXPECT_DOUBLE_EQ(P.norm, 0.5);
  EXPECT_THROW(Partition::from_breakpoints(kUnit, {0.0, 0.6, 0.5, 1.0}), Error);
}

}  // namespace
}  // namespace varmin
