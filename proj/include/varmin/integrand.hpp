#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varmin/geometry.hpp"

namespace varmin {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

// f(x, u, ξ) together with its partial derivatives.
struct Integrand {
  using Scalar = std::function<double(const Vec& x, double u, const Vec& xi)>;
  using Gradient = std::function<Vec(const Vec& x, double u, const Vec& xi)>;

  std::string name;
  int dim = 1;
  Scalar eval;
  Scalar d_u;
  Gradient d_xi;
  // Quadrature order used by assembly (see mesh::quadrature).
  int quadrature_order = 2;

  double operator()(const Vec& x, double u, const Vec& xi) const { return eval(x, u, xi); }
};

// Parameters for catalog entries that take them. Unused fields are ignored.
struct IntegrandParams {
  double p = 3.0;       // p-laplace, power-law gradient exponent
  double a = 1.0;       // power-law gradient coefficient
  double b = 1.0;       // power-law mass coefficient
  double r = 2.0;       // power-law mass exponent
};

std::vector<std::string> catalog_names();
std::vector<Integrand> catalog(int dim, const IntegrandParams& params = {});
// Throws Error(NotFound) for an unknown name.
Integrand find_integrand(const std::string& name, int dim, const IntegrandParams& params = {});

// Region sampled by the condition checkers. Samples in x are drawn from
// the domain; far-field sweeps probe |ξ| well beyond xi_max along rays.
struct ProbeBox {
  Domain domain;
  double u_max = 10.0;
  double xi_max = 20.0;
  bool far_field = true;
  std::uint64_t seed = kDefaultSeed;

  static ProbeBox over(const Domain& domain) { return ProbeBox{domain}; }
};

struct ProbePoint {
  Vec x;
  double u;
  Vec xi;
};

// f ≥ c0|ξ|^p + c1|u|^q + c2 with c2 a constant.
struct GrowthCertificate {
  double c0 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double p = 2.0;
  double q = 1.0;

  // Throws Error(InvalidArgument) unless c0 > 0, p > 1 and 1 ≤ q < p.
  void validate() const;
  double lower_function(double u, const Vec& xi) const;
};

struct ConvexityWitness {
  Vec x;
  double u;
  Vec xi1, xi2;
  double lambda;
  double violation;  // f(mid) - (λ f1 + (1-λ) f2)
  double threshold;  // violation exceeded this
};

struct ConvexityReport {
  enum class Status { CertifiedOnSamples, Counterexample };
  Status status = Status::CertifiedOnSamples;
  std::optional<ConvexityWitness> witness;
  std::size_t samples_checked = 0;
  std::uint64_t seed = kDefaultSeed;
  double tol = 1e-9;

  bool certified() const { return status == Status::CertifiedOnSamples; }
};

struct GrowthReport {
  bool holds = true;
  std::optional<ProbePoint> witness;
  double witness_f = 0.0;
  double witness_bound = 0.0;
  std::size_t samples_checked = 0;
  std::uint64_t seed = kDefaultSeed;
};

// Midpoint and random-λ convexity test of ξ ↦ f(x,u,ξ). Returns the first
// violation exceeding tol·(1 + |λ f1| + |(1-λ) f2|).
ConvexityReport check_convexity(const Integrand& f, const ProbeBox& probe,
                                std::size_t n_samples = 2000, double tol = 1e-9);

GrowthReport check_growth(const Integrand& f, const GrowthCertificate& cert,
                          const ProbeBox& probe, std::size_t n_samples = 2000);

std::optional<GrowthCertificate> suggest_growth(const Integrand& f, double p, double q,
                                                const ProbeBox& probe,
                                                std::size_t n_samples = 2000);

// Deterministic grid, seeded random draws, then far-field rays. Shared by
// check_growth and suggest_growth so that both see the same points.
void for_each_growth_sample(const ProbeBox& probe, std::size_t n_samples,
                            const std::function<void(const ProbePoint&)>& visit);

// Smallest value of f seen on the growth sample set (far field excluded).
double sampled_infimum(const Integrand& f, const ProbeBox& probe, std::size_t n_samples = 2000);

}  // namespace varmin
