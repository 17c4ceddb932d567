#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "varmin/integrand.hpp"
#include "varmin/mesh.hpp"

namespace varmin {

// F(u) = Σ_cells Σ_q w_q f(x_q, u(x_q), ∇u|cell), summed in cell order.
// order <= 0 selects f.quadrature_order.
double assemble_F(const Integrand& f, const FemField& u, int order = 0);

// dF/du_i with Dirichlet (boundary) entries set to zero.
Eigen::VectorXd assemble_grad(const Integrand& f, const FemField& u, int order = 0);

double lp_norm(const FemField& u, double p, int order = 3);
// Exact for P1: (Σ_cells |cell| |∇u|^p)^(1/p).
double w1p_seminorm(const FemField& u, double p);

// Discrete estimate of C in ‖u‖_p ≤ C ‖∇u‖_p on W^{1,p}_0. For p = 2 on an
// interval this is λ_h^{-1/2}, λ_h the smallest eigenvalue of the P1
// stiffness/mass pencil on `cells` cells (inverse power iteration). Otherwise
// diam(Ω).
double friedrichs_constant(const Domain& domain, double p, int cells = 64);

// An upper bound for C usable in the coercivity chain: (b-a)/π for p = 2 on
// an interval, diam(Ω) otherwise.
double friedrichs_upper_bound(const Domain& domain, double p);

struct DirichletEigenResult {
  double eigenvalue = 0.0;
  int iterations = 0;
};
DirichletEigenResult smallest_dirichlet_eigenvalue_1d(double length, int cells, double tol = 1e-14,
                                                      int max_iters = 1000);

// Lower bound F(ũ) ≥ φ(‖∇(ũ-u0)‖_p) with φ(R) = lead·R^p − A·R^q − B.
struct CoercivityCertificate {
  double radius = 0.0;
  double F0 = 0.0;
  GrowthCertificate growth;
  double friedrichs_C = 0.0;
  double domain_measure = 0.0;
  double grad_u0_p = 0.0;  // ‖∇u0‖_p
  double u0_q = 0.0;       // ‖u0‖_q
  // Chain constants.
  double split_p = 1.0;    // ‖∇ũ‖_p^p ≥ split_p ‖∇u‖_p^p − ‖∇u0‖_p^p
  double split_q = 1.0;    // ‖ũ‖_q^q ≤ split_q (‖u‖_q^q + ‖u0‖_q^q)
  double holder = 1.0;     // |Ω|^(1 − q/p)
  double lead = 0.0;       // c0·split_p
  double A = 0.0;          // |c1|·split_q·holder·C^q
  double B = 0.0;          // c0‖∇u0‖^p + |c1| split_q ‖u0‖_q^q − c2|Ω|

  double phi(double R) const;
  double phi_derivative(double R) const;
};

// Throws Error(CertificateUnavailable) when φ never reaches F0 inside [0, 1e12]
// or the sublevel set is empty.
CoercivityCertificate coercivity_certificate(const GrowthCertificate& cert, const FemField& u0,
                                             double F0, const Domain& domain);

}  // namespace varmin
