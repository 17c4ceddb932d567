#include "varmin/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "varmin/error.hpp"

namespace varmin {

namespace {

double sq_norm(const Vec& xi) { return xi[0] * xi[0] + xi[1] * xi[1]; }

// |ξ|^(p-2) ξ, with the value at ξ = 0 taken as 0 (p > 1).
Vec power_gradient(const Vec& xi, double p) {
  const double r = norm(xi);
  if (r == 0.0) return {0.0, 0.0};
  return std::pow(r, p - 2.0) * xi;
}

Integrand dirichlet(int dim) {
  Integrand f;
  f.name = "dirichlet";
  f.dim = dim;
  f.eval = [](const Vec&, double, const Vec& xi) { return 0.5 * sq_norm(xi); };
  f.d_u = [](const Vec&, double, const Vec&) { return 0.0; };
  f.d_xi = [](const Vec&, double, const Vec& xi) { return xi; };
  return f;
}

Integrand dirichlet_mass(int dim) {
  Integrand f;
  f.name = "dirichlet-mass";
  f.dim = dim;
  f.eval = [](const Vec&, double u, const Vec& xi) { return 0.5 * sq_norm(xi) + 0.5 * u * u; };
  f.d_u = [](const Vec&, double u, const Vec&) { return u; };
  f.d_xi = [](const Vec&, double, const Vec& xi) { return xi; };
  return f;
}

Integrand p_laplace(int dim, double p) {
  if (!(p > 1.0)) throw Error(ErrorKind::InvalidArgument, fmt::format("p-laplace needs p > 1, got {}", p));
  Integrand f;
  f.name = "p-laplace";
  f.dim = dim;
  f.eval = [p](const Vec&, double, const Vec& xi) { return std::pow(norm(xi), p) / p; };
  f.d_u = [](const Vec&, double, const Vec&) { return 0.0; };
  f.d_xi = [p](const Vec&, double, const Vec& xi) { return power_gradient(xi, p); };
  return f;
}

Integrand minimal_surface(int dim) {
  Integrand f;
  f.name = "minimal-surface";
  f.dim = dim;
  // hypot keeps the value finite far beyond |ξ| ~ 1e154.
  f.eval = [](const Vec&, double, const Vec& xi) { return std::hypot(1.0, norm(xi)); };
  f.d_u = [](const Vec&, double, const Vec&) { return 0.0; };
  f.d_xi = [](const Vec&, double, const Vec& xi) {
    return (1.0 / std::hypot(1.0, norm(xi))) * xi;
  };
  return f;
}

Integrand double_well(int dim) {
  Integrand f;
  f.name = "double-well";
  f.dim = dim;
  f.quadrature_order = 3;
  f.eval = [](const Vec&, double u, const Vec& xi) {
    const double w = sq_norm(xi) - 1.0;
    return w * w + u * u;
  };
  f.d_u = [](const Vec&, double u, const Vec&) { return 2.0 * u; };
  f.d_xi = [](const Vec&, double, const Vec& xi) { return (4.0 * (sq_norm(xi) - 1.0)) * xi; };
  return f;
}

Integrand power_law(int dim, const IntegrandParams& prm) {
  if (!(prm.p > 1.0) || !(prm.r >= 1.0))
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("power-law needs p > 1 and r >= 1, got p={} r={}", prm.p, prm.r));
  Integrand f;
  f.name = "power-law";
  f.dim = dim;
  const double a = prm.a, p = prm.p, b = prm.b, r = prm.r;
  f.eval = [=](const Vec&, double u, const Vec& xi) {
    return a * std::pow(norm(xi), p) + b * std::pow(std::abs(u), r);
  };
  f.d_u = [=](const Vec&, double u, const Vec&) {
    if (u == 0.0) return 0.0;
    return b * r * std::pow(std::abs(u), r - 1.0) * (u > 0.0 ? 1.0 : -1.0);
  };
  f.d_xi = [=](const Vec&, double, const Vec& xi) { return (a * p) * power_gradient(xi, p); };
  return f;
}

double checked_eval(const Integrand& f, const Vec& x, double u, const Vec& xi) {
  const double v = f.eval(x, u, xi);
  if (!std::isfinite(v))
    throw Error(ErrorKind::EvaluationError,
                fmt::format("{}(x=({}, {}), u={}, xi=({}, {})) = {}", f.name, x[0], x[1], u, xi[0],
                            xi[1], v));
  return v;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

std::vector<Vec> x_grid(const Domain& dom, int per_axis) {
  std::vector<Vec> out;
  if (dom.dim == 1) {
    for (double x : linspace(dom.a, dom.b, per_axis)) out.push_back({x, 0.0});
  } else {
    for (double x : linspace(dom.a, dom.b, per_axis))
      for (double y : linspace(dom.c, dom.d, per_axis)) out.push_back({x, y});
  }
  return out;
}

std::vector<Vec> xi_grid(int dim, double xi_max, int per_axis) {
  std::vector<Vec> out;
  const auto axis = linspace(-xi_max, xi_max, per_axis);
  if (dim == 1) {
    for (double t : axis) out.push_back({t, 0.0});
  } else {
    for (double s : axis)
      for (double t : axis) out.push_back({s, t});
  }
  return out;
}

std::vector<Vec> ray_directions(int dim) {
  if (dim == 1) return {{1.0, 0.0}, {-1.0, 0.0}};
  const double h = std::sqrt(0.5);
  return {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {h, h}};
}

struct Sampler {
  explicit Sampler(const ProbeBox& probe) : probe_(probe), rng_(probe.seed) {}

  Vec x() {
    const Domain& d = probe_.domain;
    std::uniform_real_distribution<double> ux(d.a, d.b);
    if (d.dim == 1) return {ux(rng_), 0.0};
    std::uniform_real_distribution<double> uy(d.c, d.d);
    const double px = ux(rng_);
    return {px, uy(rng_)};
  }
  double u() { return std::uniform_real_distribution<double>(-probe_.u_max, probe_.u_max)(rng_); }
  Vec xi() {
    std::uniform_real_distribution<double> ux(-probe_.xi_max, probe_.xi_max);
    const double s = ux(rng_);
    if (probe_.domain.dim == 1) return {s, 0.0};
    return {s, ux(rng_)};
  }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  const ProbeBox& probe_;
  std::mt19937_64 rng_;
};

void require_probe(const ProbeBox& probe) {
  if (!(probe.u_max > 0.0) || !(probe.xi_max > 0.0) || probe.domain.measure() <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "probe box must have positive volume");
}

// far == true marks points outside the declared box.
void growth_samples(const ProbeBox& probe, std::size_t n_samples,
                    const std::function<void(const ProbePoint&, bool)>& visit) {
  require_probe(probe);
  const int dim = probe.domain.dim;
  const auto xs = x_grid(probe.domain, dim == 1 ? 5 : 3);
  const auto us = linspace(-probe.u_max, probe.u_max, 41);
  const auto xis = xi_grid(dim, probe.xi_max, dim == 1 ? 81 : 21);
  for (const Vec& x : xs)
    for (double u : us)
      for (const Vec& xi : xis) visit({x, u, xi}, false);

  Sampler rng(probe);
  for (std::size_t i = 0; i < n_samples; ++i) {
    ProbePoint pt;
    pt.x = rng.x();
    pt.u = rng.u();
    pt.xi = rng.xi();
    visit(pt, false);
  }

  if (!probe.far_field) return;
  const int m0 = static_cast<int>(std::floor(std::log10(probe.xi_max))) + 1;
  const Vec xc = probe.domain.center();
  for (double u : {0.0, -probe.u_max, probe.u_max})
    for (const Vec& dir : ray_directions(dim))
      for (int m = m0; m <= 300; ++m) visit({xc, u, std::pow(10.0, m) * dir}, true);
}

// Margin m = f − c0|ξ|^p − c1|u|^q (c2 excluded), minimized locally in
// (u, ξ) at fixed x by projected gradient descent inside the probe box.
// Sampling alone misses interior minima between grid points.
struct MarginPoint {
  ProbePoint pt;
  double margin;
};

double margin_at(const Integrand& f, const GrowthCertificate& c, const ProbePoint& pt) {
  return f.eval(pt.x, pt.u, pt.xi) - c.c0 * std::pow(norm(pt.xi), c.p) - c.c1 * std::pow(std::abs(pt.u), c.q);
}

MarginPoint refine_margin(const Integrand& f, const GrowthCertificate& c, const ProbeBox& probe,
                          MarginPoint start, int iters = 200) {
  const int dim = probe.domain.dim;
  const auto clamp_pt = [&](ProbePoint q) {
    q.u = std::clamp(q.u, -probe.u_max, probe.u_max);
    for (int i = 0; i < 2; ++i) q.xi[i] = i < dim ? std::clamp(q.xi[i], -probe.xi_max, probe.xi_max) : 0.0;
    return q;
  };
  MarginPoint cur = start;
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    const ProbePoint& q = cur.pt;
    const double au = std::abs(q.u);
    double gu = f.d_u(q.x, q.u, q.xi);
    if (au > 0.0) gu -= c.c1 * c.q * std::pow(au, c.q - 1.0) * (q.u > 0.0 ? 1.0 : -1.0);
    Vec gxi = f.d_xi(q.x, q.u, q.xi);
    const double r = norm(q.xi);
    if (r > 0.0) gxi = gxi - (c.c0 * c.p * std::pow(r, c.p - 2.0)) * q.xi;
    if (dim == 1) gxi[1] = 0.0;
    if (!std::isfinite(gu) || !std::isfinite(gxi[0]) || !std::isfinite(gxi[1])) break;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      ProbePoint trial = q;
      trial.u -= t * gu;
      trial.xi = trial.xi - t * gxi;
      trial = clamp_pt(trial);
      const double m = margin_at(f, c, trial);
      if (std::isfinite(m) && m < cur.margin) {
        cur = {trial, m};
        moved = true;
        t *= 2.0;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return cur;
}

// Keeps the k entries with the smallest margin.
struct WorstSamples {
  explicit WorstSamples(std::size_t k) : k_(k) {}
  void offer(const ProbePoint& pt, double margin) {
    if (!std::isfinite(margin)) return;
    if (items.size() < k_) {
      items.push_back({pt, margin});
    } else {
      auto worst = std::max_element(items.begin(), items.end(),
                                    [](const MarginPoint& a, const MarginPoint& b) { return a.margin < b.margin; });
      if (margin >= worst->margin) return;
      *worst = {pt, margin};
    }
  }
  std::size_t k_;
  std::vector<MarginPoint> items;
};

constexpr std::size_t kRefineStarts = 8;

}  // namespace

std::vector<std::string> catalog_names() {
  return {"dirichlet", "dirichlet-mass", "p-laplace", "minimal-surface", "double-well", "power-law"};
}

std::vector<Integrand> catalog(int dim, const IntegrandParams& params) {
  if (dim != 1 && dim != 2)
    throw Error(ErrorKind::InvalidArgument, fmt::format("dimension {} not supported", dim));
  return {dirichlet(dim),       dirichlet_mass(dim), p_laplace(dim, params.p),
          minimal_surface(dim), double_well(dim),    power_law(dim, params)};
}

Integrand find_integrand(const std::string& name, int dim, const IntegrandParams& params) {
  if (dim != 1 && dim != 2)
    throw Error(ErrorKind::InvalidArgument, fmt::format("dimension {} not supported", dim));
  if (name == "dirichlet") return dirichlet(dim);
  if (name == "dirichlet-mass") return dirichlet_mass(dim);
  if (name == "p-laplace") return p_laplace(dim, params.p);
  if (name == "minimal-surface") return minimal_surface(dim);
  if (name == "double-well") return double_well(dim);
  if (name == "power-law") return power_law(dim, params);
  throw Error(ErrorKind::NotFound, fmt::format("integrand '{}'", name));
}

void GrowthCertificate::validate() const {
  if (!(c0 > 0.0)) throw Error(ErrorKind::InvalidArgument, fmt::format("c0 must be > 0, got {}", c0));
  if (!(p > 1.0) || !std::isfinite(p))
    throw Error(ErrorKind::InvalidArgument, fmt::format("p must lie in (1, inf), got {}", p));
  if (!(q >= 1.0 && q < p))
    throw Error(ErrorKind::InvalidArgument, fmt::format("q must satisfy 1 <= q < p, got q={} p={}", q, p));
  if (!std::isfinite(c1) || !std::isfinite(c2))
    throw Error(ErrorKind::InvalidArgument, "c1 and c2 must be finite");
}

double GrowthCertificate::lower_function(double u, const Vec& xi) const {
  return c0 * std::pow(norm(xi), p) + c1 * std::pow(std::abs(u), q) + c2;
}

ConvexityReport check_convexity(const Integrand& f, const ProbeBox& probe, std::size_t n_samples,
                                double tol) {
  require_probe(probe);
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
  ConvexityReport rep;
  rep.seed = probe.seed;
  rep.tol = tol;

  auto test = [&](const Vec& x, double u, const Vec& a, const Vec& b, double lambda) {
    ++rep.samples_checked;
    const double fa = checked_eval(f, x, u, a);
    const double fb = checked_eval(f, x, u, b);
    const Vec mid = lambda * a + (1.0 - lambda) * b;
    const double fm = checked_eval(f, x, u, mid);
    const double chord = lambda * fa + (1.0 - lambda) * fb;
    const double threshold = tol * (1.0 + std::abs(lambda * fa) + std::abs((1.0 - lambda) * fb));
    if (fm - chord > threshold) {
      rep.status = ConvexityReport::Status::Counterexample;
      rep.witness = ConvexityWitness{x, u, a, b, lambda, fm - chord, threshold};
      return true;
    }
    return false;
  };

  const int dim = probe.domain.dim;
  const auto xs = x_grid(probe.domain, 3);
  const auto us = linspace(-probe.u_max, probe.u_max, 5);
  const auto dirs = ray_directions(dim);
  const auto ts = linspace(0.0, probe.xi_max, 21);

  // Symmetric pairs ±t·e first: they expose wells centred at the origin.
  for (const Vec& x : xs)
    for (double u : us)
      for (const Vec& e : dirs)
        for (std::size_t i = 1; i < ts.size(); ++i)
          if (test(x, u, ts[i] * e, (-ts[i]) * e, 0.5)) return rep;

  const auto grid = xi_grid(dim, probe.xi_max, dim == 1 ? 41 : 9);
  for (const Vec& x : xs)
    for (double u : us)
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j)
          if (test(x, u, grid[i], grid[j], 0.5)) return rep;

  Sampler rng(probe);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vec x = rng.x();
    const double u = rng.u();
    const Vec a = rng.xi();
    const Vec b = rng.xi();
    const double lambda = (s % 2 == 0) ? 0.5 : rng.unit();
    if (test(x, u, a, b, lambda)) return rep;
  }
  return rep;
}

void for_each_growth_sample(const ProbeBox& probe, std::size_t n_samples,
                            const std::function<void(const ProbePoint&)>& visit) {
  growth_samples(probe, n_samples, [&](const ProbePoint& pt, bool) { visit(pt); });
}

GrowthReport check_growth(const Integrand& f, const GrowthCertificate& cert, const ProbeBox& probe,
                          std::size_t n_samples) {
  cert.validate();
  GrowthReport rep;
  rep.seed = probe.seed;
  const auto violates = [](double fv, double bound) {
    if (!std::isfinite(bound)) return bound > 0.0;  // true bound exceeds every finite double
    return fv < bound - 1e-12 * (1.0 + std::abs(bound));
  };
  WorstSamples worst(kRefineStarts);
  struct Found {};
  try {
    growth_samples(probe, n_samples, [&](const ProbePoint& pt, bool far) {
      double fv = f.eval(pt.x, pt.u, pt.xi);
      if (!std::isfinite(fv)) {
        // Beyond the box an overflowing f says nothing about the bound.
        if (far) return;
        checked_eval(f, pt.x, pt.u, pt.xi);
      }
      ++rep.samples_checked;
      const double bound = cert.lower_function(pt.u, pt.xi);
      if (violates(fv, bound)) {
        rep.holds = false;
        rep.witness = pt;
        rep.witness_f = fv;
        rep.witness_bound = bound;
        throw Found{};
      }
      if (!far) worst.offer(pt, fv - bound);
    });
  } catch (const Found&) {
    return rep;
  }
  for (const MarginPoint& start : worst.items) {
    const MarginPoint m = refine_margin(f, cert, probe, {start.pt, start.margin + cert.c2});
    ++rep.samples_checked;
    const double fv = f.eval(m.pt.x, m.pt.u, m.pt.xi);
    const double bound = cert.lower_function(m.pt.u, m.pt.xi);
    if (std::isfinite(fv) && violates(fv, bound)) {
      rep.holds = false;
      rep.witness = m.pt;
      rep.witness_f = fv;
      rep.witness_bound = bound;
      break;
    }
  }
  return rep;
}

std::optional<GrowthCertificate> suggest_growth(const Integrand& f, double p, double q,
                                                const ProbeBox& probe, std::size_t n_samples) {
  if (!(p > q && q >= 1.0)) return std::nullopt;
  require_probe(probe);

  // Leading coefficient: infimum of f/|ξ|^p over large |ξ|, extrapolated to
  // zero when f grows slower than |ξ|^p along a far-field ray.
  double ratio_inf = std::numeric_limits<double>::infinity();
  std::map<std::pair<double, double>, std::pair<double, double>> ray_tail;  // last two (log|ξ|, log f)
  std::map<std::pair<double, double>, std::pair<double, double>> ray_prev;
  double slope_min = std::numeric_limits<double>::infinity();
  try {
    growth_samples(probe, n_samples, [&](const ProbePoint& pt, bool far) {
      const double r = norm(pt.xi);
      if (!far && r < 0.5 * probe.xi_max) return;
      const double fv = f.eval(pt.x, pt.u, pt.xi);
      if (!std::isfinite(fv)) {
        if (far) return;
        checked_eval(f, pt.x, pt.u, pt.xi);
      }
      const double rp = std::pow(r, p);
      const double ratio = std::isfinite(rp) ? fv / rp : (fv >= 0.0 ? 0.0 : -1.0);
      ratio_inf = std::min(ratio_inf, ratio);
      if (far && pt.u == 0.0 && fv > 0.0) {
        const auto key = std::make_pair(pt.xi[0] / r, pt.xi[1] / r);
        auto it = ray_tail.find(key);
        if (it != ray_tail.end()) ray_prev[key] = it->second;
        ray_tail[key] = {std::log(r), std::log(fv)};
      }
    });
  } catch (const Error&) {
    return std::nullopt;
  }
  for (const auto& [key, last] : ray_tail) {
    auto it = ray_prev.find(key);
    if (it == ray_prev.end()) continue;
    slope_min = std::min(slope_min, (last.second - it->second.second) / (last.first - it->second.first));
  }
  if (slope_min < p - 1e-3) ratio_inf = 0.0;
  if (!(ratio_inf > 0.0) || !std::isfinite(ratio_inf)) return std::nullopt;

  GrowthCertificate cert;
  cert.p = p;
  cert.q = q;
  cert.c0 = 0.5 * ratio_inf;

  // c1 from the residual over large |u|, c2 as the residual minimum.
  double u_ratio = std::numeric_limits<double>::infinity();
  growth_samples(probe, n_samples, [&](const ProbePoint& pt, bool far) {
    if (far || std::abs(pt.u) < 0.5 * probe.u_max) return;
    const double res = f.eval(pt.x, pt.u, pt.xi) - cert.c0 * std::pow(norm(pt.xi), p);
    u_ratio = std::min(u_ratio, res / std::pow(std::abs(pt.u), q));
  });
  if (!std::isfinite(u_ratio)) u_ratio = 0.0;
  cert.c1 = u_ratio > 0.0 ? 0.5 * u_ratio : u_ratio;

  double c2 = std::numeric_limits<double>::infinity();
  WorstSamples worst(kRefineStarts);
  growth_samples(probe, n_samples, [&](const ProbePoint& pt, bool far) {
    const double fv = f.eval(pt.x, pt.u, pt.xi);
    const double lead = cert.c0 * std::pow(norm(pt.xi), p) + cert.c1 * std::pow(std::abs(pt.u), q);
    if (!std::isfinite(fv) || !std::isfinite(lead)) return;
    c2 = std::min(c2, fv - lead);
    if (!far) worst.offer(pt, fv - lead);
  });
  if (!std::isfinite(c2)) return std::nullopt;
  for (const MarginPoint& start : worst.items) c2 = std::min(c2, refine_margin(f, cert, probe, start).margin);
  cert.c2 = c2 - 1e-9 * (1.0 + std::abs(c2));

  if (!check_growth(f, cert, probe, n_samples).holds) return std::nullopt;
  return cert;
}

double sampled_infimum(const Integrand& f, const ProbeBox& probe, std::size_t n_samples) {
  double inf = std::numeric_limits<double>::infinity();
  growth_samples(probe, n_samples, [&](const ProbePoint& pt, bool far) {
    if (far) return;
    inf = std::min(inf, checked_eval(f, pt.x, pt.u, pt.xi));
  });
  return inf;
}

}  // namespace varmin
