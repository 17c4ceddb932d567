#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "varmin/error.hpp"
#include "varmin/semicont.hpp"

namespace varmin {
namespace {

const Domain kUnit = Domain::interval(0.0, 1.0);
const Domain kSquare = Domain::rectangle(0.0, 1.0, 0.0, 1.0);

const std::vector<std::string> kConvex = {"dirichlet", "dirichlet-mass", "p-laplace", "minimal-surface",
                                          "power-law"};

PiecewiseLinear1D identity() { return PiecewiseLinear1D::from_field(interpolate(make_mesh(kUnit, 1), [](const Vec& x) { return x[0]; })); }
PiecewiseLinear1D sign_step() { return PiecewiseLinear1D::step({0.0, 0.5, 1.0}, {-1.0, 1.0}); }

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

TEST(PartitionAverage, IdentityOnFourCells) {
  const StepFunction s = partition_average(identity(), make_partition(kUnit, 4));
  ASSERT_EQ(s.values.size(), 4u);
  const double want[] = {0.125, 0.375, 0.625, 0.875};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(s.values[i], want[i]);
}

TEST(PartitionAverage, SignStep) {
  const auto u = sign_step();
  const StepFunction even = partition_average(u, make_partition(kUnit, 4));
  EXPECT_EQ(measure_deviation(u, even, 1e-12), 0.0);
  const StepFunction odd = partition_average(u, make_partition(kUnit, 5));
  EXPECT_DOUBLE_EQ(odd.values[2], 0.0);
  EXPECT_DOUBLE_EQ(measure_deviation(u, odd, 0.5), 0.2);
}

// Mean of the averaged function equals the mean of u on every cell.
TEST(PartitionAverage, PreservesCellIntegrals) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const auto m = make_mesh(kUnit, 24);
  FemField u = FemField::zeros(m);
  for (Eigen::Index i = 0; i < u.coeffs.size(); ++i) u.coeffs[i] = d(rng);
  const auto pl = PiecewiseLinear1D::from_field(u);
  for (int cells : {1, 3, 7, 16}) {
    const Partition P = make_partition(kUnit, cells);
    const StepFunction s = partition_average(u, P);
    for (std::size_t j = 0; j < P.cells.size(); ++j) {
      const auto& c = P.cells[j];
      EXPECT_NEAR(s.values[j] * c.measure(1), pl.integral(c.lo[0], c.hi[0]), 1e-14);
    }
  }
}

TEST(PartitionAverage, TwoDimensionalAffine) {
  const auto m = make_mesh(kSquare, 8);
  const FemField u = interpolate(m, [](const Vec& x) { return x[0] + 2 * x[1]; });
  const Partition P = make_partition(kSquare, 4);
  const StepFunction s = partition_average(u, P);
  for (std::size_t j = 0; j < P.cells.size(); ++j) {
    const auto& c = P.cells[j];
    EXPECT_NEAR(s.values[j], 0.5 * (c.lo[0] + c.hi[0]) + (c.lo[1] + c.hi[1]), 1e-13);
  }
}

// Independent oracle for the deviation measure: fine midpoint sampling.
double sampled_deviation(const PiecewiseLinear1D& u, const StepFunction& s, double eps, int n) {
  double meas = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    std::size_t piece = 0;
    while (piece + 1 < u.left.size() && x > u.breaks[piece + 1]) ++piece;
    const double t = (x - u.breaks[piece]) / (u.breaks[piece + 1] - u.breaks[piece]);
    const double ux = u.left[piece] + t * (u.right[piece] - u.left[piece]);
    std::size_t cell = 0;
    while (cell + 1 < s.partition.cells.size() && x > s.partition.cells[cell].hi[0]) ++cell;
    if (std::abs(ux - s.values[cell]) > eps) meas += 1.0 / n;
  }
  return meas;
}

TEST(MeasureDeviation, MatchesSampling) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const auto m = make_mesh(kUnit, 10);
  FemField u = FemField::zeros(m);
  for (Eigen::Index i = 0; i < u.coeffs.size(); ++i) u.coeffs[i] = d(rng);
  const auto pl = PiecewiseLinear1D::from_field(u);
  for (int cells : {1, 2, 3, 5}) {
    const StepFunction s = partition_average(pl, make_partition(kUnit, cells));
    for (double eps : {0.05, 0.2, 0.5}) EXPECT_NEAR(measure_deviation(pl, s, eps), sampled_deviation(pl, s, eps, 200000), 2e-5);
  }
}

TEST(MeasureDeviation, IdentityDyadic) {
  const auto u = identity();
  double prev = 1.0;
  for (int j = 0; j <= 12; ++j) {
    const Partition P = make_partition(kUnit, 1 << j);
    const double meas = measure_deviation(u, partition_average(u, P), 0.01);
    EXPECT_LE(meas, prev);
    prev = meas;
    if (P.norm <= 0.02) {
      EXPECT_EQ(meas, 0.0) << j;
    }
  }
  EXPECT_EQ(prev, 0.0);
}

// Exact up to the rounding of the partition breakpoints themselves.
TEST(MeasureDeviation, SignStepOddCells) {
  for (int m = 1; m <= 201; m += 2) {
    const auto u = sign_step();
    EXPECT_NEAR(measure_deviation(u, partition_average(u, make_partition(kUnit, m)), 0.01), 1.0 / m,
                2 * std::numeric_limits<double>::epsilon())
        << m;
  }
}

// Lemma-2 property for x, sign(x − ½) and an interpolated sin(2πx).
TEST(MeasureDeviation, EventuallyDecreasesToZero) {
  const auto sine = PiecewiseLinear1D::from_field(
      interpolate(make_mesh(kUnit, 1024), [](const Vec& x) { return std::sin(2 * std::numbers::pi * x[0]); }));
  for (const auto& u : {identity(), sign_step(), sine})
    for (double eps : {0.1, 0.01}) {
      std::vector<double> seq;
      for (int j = 0; j <= 12; ++j) seq.push_back(measure_deviation(u, partition_average(u, make_partition(kUnit, 1 << j)), eps));
      for (std::size_t j = 6; j < seq.size(); ++j) EXPECT_LE(seq[j], seq[j - 1] + 1e-15);
      EXPECT_LE(seq.back(), 1e-3);
    }
}

TEST(MeasureDeviation, LargeEpsIsZero) {
  const auto u = identity();
  EXPECT_EQ(measure_deviation(u, partition_average(u, make_partition(kUnit, 4)), 0.2), 0.0);
}

TEST(Sequence, SawtoothClosedForms) {
  for (int k : {1, 2, 4, 7, 16, 64}) {
    const auto m = make_sequence(SequenceKind::Sawtooth, kUnit, k, 2 * k * 3);
    EXPECT_DOUBLE_EQ(m.u.coeffs.lpNorm<Eigen::Infinity>(), 1.0 / (2 * k));
    EXPECT_EQ(m.u.coeffs[0], 0.0);
    EXPECT_EQ(m.u.coeffs[m.u.coeffs.size() - 1], 0.0);
    for (std::size_t c = 0; c < m.u.mesh->num_cells(); ++c) EXPECT_NEAR(std::abs(grad_field(m.u, c)[0]), 1.0, 1e-12);
    const double l2sq = std::pow(lp_norm(m.u, 2.0, 3), 2);
    EXPECT_NEAR(l2sq, 1.0 / (12.0 * k * k), 1e-15);
    EXPECT_EQ(m.limit.coeffs.lpNorm<Eigen::Infinity>(), 0.0);
  }
}

TEST(Sequence, ResolutionMismatch) {
  try {
    make_sequence(SequenceKind::Sawtooth, kUnit, 3, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidResolution);
  }
  EXPECT_THROW(make_sequence(SequenceKind::Sawtooth, kSquare, 1, 2), Error);
}

TEST(WeakConvergence, Sawtooth) {
  const auto ks = range(1, 64);
  const auto rep = weak_convergence_witness(SequenceKind::Sawtooth, kUnit, ks, 2.0, 2.0, {}, default_dictionary(kUnit));
  EXPECT_NEAR(rep.sup_grad_norm, 1.0, 1e-12);
  EXPECT_TRUE(rep.bounded);
  EXPECT_TRUE(rep.weak_gradients);
  EXPECT_TRUE(rep.strong_lq);
  // ∫ u_k' φ for indicator φ is at most the tooth amplitude; L2 distance is 1/(√12 k).
  for (const auto& r : rep.rows) {
    EXPECT_LE(r.dictionary_max, 1.0 / r.k + 1e-12) << r.k;
    EXPECT_NEAR(r.lq_distance, 1.0 / (std::sqrt(12.0) * r.k), 1e-12);
  }
}

TEST(WeakConvergence, StrongPerturbation) {
  const auto rep = weak_convergence_witness(SequenceKind::StrongPerturbation, kUnit, range(1, 32), 2.0, 2.0, {},
                                            default_dictionary(kUnit));
  EXPECT_TRUE(rep.bounded && rep.weak_gradients && rep.strong_lq);
  EXPECT_LE(rep.rows.back().dictionary_max, 1.0 / 32 * 2 + 1e-12);
}

TEST(Liminf, DirichletSawtoothConsistent) {
  const auto rep = liminf_check(find_integrand("dirichlet", 1), SequenceKind::Sawtooth, kUnit, range(1, 64));
  for (const auto& [k, F] : rep.table) EXPECT_NEAR(F, 0.5, 1e-14) << k;
  EXPECT_EQ(rep.F_limit, 0.0);
  EXPECT_EQ(rep.verdict, LscVerdict::Consistent);
}

TEST(Liminf, DoubleWellSawtoothViolated) {
  const auto rep = liminf_check(find_integrand("double-well", 1), SequenceKind::Sawtooth, kUnit, range(1, 64));
  for (const auto& [k, F] : rep.table) EXPECT_NEAR(F, 1.0 / (12.0 * k * k), 1e-12) << k;
  EXPECT_NEAR(rep.table[0].second, 0.08333333333333333, 1e-15);
  EXPECT_NEAR(rep.table[1].second, 0.020833333333333332, 1e-15);
  EXPECT_NEAR(rep.F_limit, 1.0, 1e-14);
  EXPECT_EQ(rep.verdict, LscVerdict::Violated);
  EXPECT_EQ(rep.liminf_from_k, 49);
}

TEST(Liminf, ConvexCatalogConsistent) {
  for (const auto& name : kConvex)
    for (SequenceKind kind : {SequenceKind::Sawtooth, SequenceKind::ModulatedSawtooth, SequenceKind::StrongPerturbation}) {
      const auto rep = liminf_check(find_integrand(name, 1), kind, kUnit, range(1, 64));
      EXPECT_EQ(rep.verdict, LscVerdict::Consistent) << name << " " << to_string(kind);
      if (kind == SequenceKind::StrongPerturbation) {
        EXPECT_NEAR(rep.table.back().second, rep.F_limit, 0.1) << name;
      }
    }
}

TEST(Liminf, StrongPerturbationApproachesLimit) {
  const auto rep = liminf_check(find_integrand("dirichlet", 1), SequenceKind::StrongPerturbation, kUnit, range(1, 64));
  // F(u_k) − F(u) = ½∫(π cos(πx)/k)² = π²/(4k²) up to the O(h²) relative
  // interpolation error, h = 1/(4k).
  EXPECT_NEAR(rep.F_limit, 0.5, 1e-14);
  for (const auto& [k, F] : rep.table) {
    EXPECT_GE(F, rep.F_limit);
    const double ratio = (F - rep.F_limit) * 4.0 * k * k / std::pow(std::numbers::pi, 2);
    EXPECT_NEAR(ratio, 1.0, 0.06 / (k * k)) << k;
  }
}

TEST(Chebyshev, Examples) {
  const std::vector<double> ones(10, 1.0), meas(10, 0.1);
  const auto c = chebyshev_check(ones, meas, 2.0, 2.0);
  EXPECT_EQ(c.measure, 0.0);
  EXPECT_TRUE(c.holds);
  const auto s = truncation_measures(make_sequence(SequenceKind::Sawtooth, kUnit, 4, 16).u, 1, 2.0);
  EXPECT_EQ(s.measure, 0.0);
  EXPECT_NEAR(s.measure_nonstrict, 1.0, 1e-14);
  EXPECT_TRUE(s.holds);
}

TEST(Chebyshev, ExactOnRandomFields) {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> val(-5.0, 5.0), w(0.0, 1.0);
  std::uniform_int_distribution<int> n(1, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const int cells = n(rng);
    std::vector<double> v(cells), m(cells);
    for (int i = 0; i < cells; ++i) {
      v[i] = val(rng);
      m[i] = w(rng);
    }
    // Include some ties with the thresholds.
    if (cells > 2) {
      v[0] = 1.0;
      v[1] = -2.5;
    }
    for (double p : {1.0, 1.5, 2.0, 3.0})
      for (double t = 0.25; t <= 6.0; t += 0.25) {
        const auto c = chebyshev_check(v, m, t, p);
        EXPECT_TRUE(c.holds);
        EXPECT_LE(c.lhs, c.moment);
        EXPECT_LE(c.measure, c.measure_nonstrict);
      }
  }
}

TEST(Chebyshev, SingularProfile) {
  // u = 2√x interpolated: |u'| ≈ 1/√x on the first cells.
  const auto m = make_mesh(kUnit, 4096);
  const FemField u = interpolate(m, [](const Vec& x) { return 2.0 * std::sqrt(x[0]); });
  for (int j = 1; j <= 64; ++j) {
    const auto c = truncation_measures(u, j, 2.0);
    EXPECT_TRUE(c.holds) << j;
    EXPECT_LE(c.measure, c.bound) << j;
  }
}

TEST(Jensen, Examples) {
  const Vec x0{0.5, 0.0};
  const std::vector<Vec> pm{{-1.0, 0.0}, {1.0, 0.0}};
  const std::vector<double> half{0.5, 0.5};
  EXPECT_NEAR(jensen_gap(find_integrand("double-well", 1), x0, 0.0, pm, half), 1.0, 1e-15);
  const std::vector<Vec> zt{{0.0, 0.0}, {2.0, 0.0}};
  Integrand sq = find_integrand("dirichlet", 1);
  EXPECT_NEAR(jensen_gap(sq, x0, 0.0, zt, half), 0.5 * 1.0 - 0.5 * 2.0, 1e-15);
  const std::vector<Vec> same{{0.3, 0.0}, {0.3, 0.0}};
  EXPECT_EQ(jensen_gap(find_integrand("minimal-surface", 1), x0, 0.0, same, half), 0.0);
}

TEST(Jensen, ConvexCatalogHasNoViolations) {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::uniform_int_distribution<int> cells(1, 8);
  for (int dim : {1, 2}) {
    const Domain dom = dim == 1 ? kUnit : kSquare;
    const auto m = dim == 1 ? make_mesh(kUnit, 64) : make_mesh(kSquare, 16);
    for (const auto& name : kConvex) {
      const Integrand f = find_integrand(name, dim);
      for (int trial = 0; trial < 100; ++trial) {
        FemField u = FemField::zeros(m);
        for (Eigen::Index i = 0; i < u.coeffs.size(); ++i) u.coeffs[i] = d(rng);
        const Vec x0{0.5 * (d(rng) + 2.0) / 2.0, dim == 2 ? 0.5 : 0.0};
        const double gap = jensen_cell_check(f, x0, d(rng), u, make_partition(dom, cells(rng)));
        EXPECT_LE(gap, 1e-9) << name << " dim " << dim;
      }
    }
  }
}

TEST(Jensen, DoubleWellTwoPointCell) {
  const auto seq = make_sequence(SequenceKind::Sawtooth, kUnit, 4, 8);
  const double gap = jensen_cell_check(find_integrand("double-well", 1), {0.5, 0.0}, 0.0, seq.u, make_partition(kUnit, 1));
  EXPECT_GE(gap, 0.5);
  EXPECT_NEAR(gap, 1.0, 1e-12);
}

TEST(Jensen, ConstantPerCellIsExactZero) {
  const auto m = make_mesh(kUnit, 8);
  const FemField u = interpolate(m, [](const Vec& x) { return 3.0 * x[0]; });
  for (const auto& name : kConvex)
    EXPECT_EQ(jensen_cell_check(find_integrand(name, 1), {0.5, 0.0}, 0.1, u, make_partition(kUnit, 4)), 0.0) << name;
}

}  // namespace
}  // namespace varmin
