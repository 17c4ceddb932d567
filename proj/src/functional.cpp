#include "varmin/functional.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "varmin/error.hpp"

namespace varmin {

namespace {

int resolve_order(const Integrand& f, int order) { return order > 0 ? order : f.quadrature_order; }

void require_dim(const Integrand& f, const FemField& u) {
  if (f.dim != u.mesh->dim())
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("integrand dim {} does not match mesh dim {}", f.dim, u.mesh->dim()));
}

[[noreturn]] void bad_value(const Integrand& f, std::size_t cell, double v) {
  throw Error(ErrorKind::EvaluationError, fmt::format("{} = {} in cell {}", f.name, v, cell));
}

// Thomas algorithm for a symmetric tridiagonal system (diag, off).
std::vector<double> solve_tridiagonal(double diag, double off, const std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  std::vector<double> c(n), d(n);
  c[0] = off / diag;
  d[0] = rhs[0] / diag;
  for (std::size_t i = 1; i < n; ++i) {
    const double m = diag - off * c[i - 1];
    c[i] = off / m;
    d[i] = (rhs[i] - off * d[i - 1]) / m;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

std::vector<double> tridiag_apply(double diag, double off, const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag * v[i];
    if (i > 0) s += off * v[i - 1];
    if (i + 1 < n) s += off * v[i + 1];
    out[i] = s;
  }
  return out;
}

double inner(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double assemble_F(const Integrand& f, const FemField& u, int order) {
  require_dim(f, u);
  const Mesh& mesh = *u.mesh;
  const int ord = resolve_order(f, order);
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Vec g = grad_field(u, c);
    double cell_sum = 0.0;
    for (const auto& qp : quadrature(mesh, c, ord)) {
      const double v = f.eval(qp.x, eval_in_cell(u, c, qp.bary), g);
      if (!std::isfinite(v)) bad_value(f, c, v);
      cell_sum += qp.weight * v;
    }
    total += cell_sum;
  }
  return total;
}

Eigen::VectorXd assemble_grad(const Integrand& f, const FemField& u, int order) {
  require_dim(f, u);
  const Mesh& mesh = *u.mesh;
  const int ord = resolve_order(f, order);
  const int nv = mesh.vertices_per_cell();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(u.coeffs.size());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cl = mesh.cell(c);
    const CellGeometry& geo = mesh.geometry(c);
    const Vec g = grad_field(u, c);
    std::array<double, 3> local{0.0, 0.0, 0.0};
    for (const auto& qp : quadrature(mesh, c, ord)) {
      const double uq = eval_in_cell(u, c, qp.bary);
      const double fu = f.d_u(qp.x, uq, g);
      const Vec fxi = f.d_xi(qp.x, uq, g);
      if (!std::isfinite(fu) || !std::isfinite(fxi[0]) || !std::isfinite(fxi[1]))
        bad_value(f, c, fu);
      for (int k = 0; k < nv; ++k)
        local[k] += qp.weight * (fu * qp.bary[k] + dot(fxi, geo.grad_basis[k]));
    }
    for (int k = 0; k < nv; ++k) grad[cl[k]] += local[k];
  }
  for (int i : mesh.boundary_vertices()) grad[i] = 0.0;
  return grad;
}

double lp_norm(const FemField& u, double p, int order) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, fmt::format("p must be >= 1, got {}", p));
  const Mesh& mesh = *u.mesh;
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (const auto& qp : quadrature(mesh, c, order))
      total += qp.weight * std::pow(std::abs(eval_in_cell(u, c, qp.bary)), p);
  return std::pow(total, 1.0 / p);
}

double w1p_seminorm(const FemField& u, double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, fmt::format("p must be >= 1, got {}", p));
  const Mesh& mesh = *u.mesh;
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    total += mesh.geometry(c).measure * std::pow(norm(grad_field(u, c)), p);
  return std::pow(total, 1.0 / p);
}

DirichletEigenResult smallest_dirichlet_eigenvalue_1d(double length, int cells, double tol,
                                                      int max_iters) {
  if (cells < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 cells");
  const double h = length / cells;
  const std::size_t n = static_cast<std::size_t>(cells - 1);
  // Interior stiffness K = (1/h) tridiag(-1, 2, -1), mass M = (h/6) tridiag(1, 4, 1).
  const double kd = 2.0 / h, ko = -1.0 / h;
  const double md = 4.0 * h / 6.0, mo = h / 6.0;

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (i + 1) * h / length;
    v[i] = x * (1.0 - x);
  }
  DirichletEigenResult res;
  double lambda = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    const auto w = solve_tridiagonal(kd, ko, tridiag_apply(md, mo, v));
    const double wmw = inner(w, tridiag_apply(md, mo, w));
    const double scale = 1.0 / std::sqrt(wmw);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] * scale;
    const double next = inner(v, tridiag_apply(kd, ko, v));  // vᵀMv = 1
    res.iterations = it;
    if (it > 1 && std::abs(next - lambda) <= tol * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  res.eigenvalue = lambda;
  return res;
}

double friedrichs_constant(const Domain& domain, double p, int cells) {
  if (domain.dim == 1 && p == 2.0)
    return 1.0 / std::sqrt(smallest_dirichlet_eigenvalue_1d(domain.b - domain.a, cells).eigenvalue);
  return domain.diameter();
}

double friedrichs_upper_bound(const Domain& domain, double p) {
  if (domain.dim == 1 && p == 2.0) return (domain.b - domain.a) / std::numbers::pi;
  return domain.diameter();
}

double CoercivityCertificate::phi(double R) const {
  return lead * std::pow(R, growth.p) - A * std::pow(R, growth.q) - B;
}

double CoercivityCertificate::phi_derivative(double R) const {
  return lead * growth.p * std::pow(R, growth.p - 1.0) - A * growth.q * std::pow(R, growth.q - 1.0);
}

CoercivityCertificate coercivity_certificate(const GrowthCertificate& cert, const FemField& u0,
                                             double F0, const Domain& domain) {
  cert.validate();
  CoercivityCertificate cc;
  cc.growth = cert;
  cc.F0 = F0;
  cc.friedrichs_C = friedrichs_upper_bound(domain, cert.p);
  cc.domain_measure = domain.measure();
  cc.grad_u0_p = w1p_seminorm(u0, cert.p);
  cc.u0_q = lp_norm(u0, cert.q);
  const double p = cert.p, q = cert.q;

  // ũ = u + u0. Convexity of |·|^p gives |a|^p ≤ 2^(p-1)(|a+b|^p + |b|^p).
  // With u0 = 0 both splits are identities.
  cc.split_p = cc.grad_u0_p == 0.0 ? 1.0 : std::pow(2.0, 1.0 - p);
  cc.split_q = cc.u0_q == 0.0 ? 1.0 : std::pow(2.0, q - 1.0);
  cc.holder = std::pow(cc.domain_measure, 1.0 - q / p);
  cc.lead = cert.c0 * cc.split_p;
  cc.A = std::abs(cert.c1) * cc.split_q * cc.holder * std::pow(cc.friedrichs_C, q);
  cc.B = cert.c0 * std::pow(cc.grad_u0_p, p) + std::abs(cert.c1) * cc.split_q * std::pow(cc.u0_q, q) -
         cert.c2 * cc.domain_measure;

  if (!std::isfinite(F0)) throw Error(ErrorKind::CertificateUnavailable, "F0 is not finite");

  // φ decreases on [0, R_min] and increases afterwards.
  const double r_min = cc.A > 0.0 ? std::pow(q * cc.A / (p * cc.lead), 1.0 / (p - q)) : 0.0;
  if (cc.phi(r_min) > F0)
    throw Error(ErrorKind::CertificateUnavailable,
                fmt::format("phi exceeds F0 = {} everywhere (empty sublevel set)", F0));
  double lo = r_min;
  double hi = std::max(1.0, 2.0 * r_min);
  while (cc.phi(hi) <= F0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12)
      throw Error(ErrorKind::CertificateUnavailable, "no root bracket within [0, 1e12]");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cc.phi(mid) <= F0)
      lo = mid;
    else
      hi = mid;
  }
  cc.radius = hi;
  return cc;
}

}  // namespace varmin
