#include "varmin/geometry.hpp"

#include <fmt/format.h>

#include "varmin/error.hpp"

namespace varmin {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EvaluationError: return "evaluation-error";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::InvalidDomain: return "invalid-domain";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::InvalidOrder: return "invalid-order";
    case ErrorKind::InvalidResolution: return "invalid-resolution";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::CertificateUnavailable: return "certificate-unavailable";
  }
  return "unknown";
}

Domain Domain::interval(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b) && b > a))
    throw Error(ErrorKind::InvalidDomain, fmt::format("interval({}, {})", a, b));
  Domain dom;
  dom.dim = 1;
  dom.a = a;
  dom.b = b;
  dom.c = 0.0;
  dom.d = 0.0;
  return dom;
}

Domain Domain::rectangle(double a, double b, double c, double d) {
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d) && b > a &&
        d > c))
    throw Error(ErrorKind::InvalidDomain, fmt::format("rectangle({}, {}, {}, {})", a, b, c, d));
  Domain dom;
  dom.dim = 2;
  dom.a = a;
  dom.b = b;
  dom.c = c;
  dom.d = d;
  return dom;
}

bool Domain::contains(const Vec& x, double slack) const {
  const double sx = slack * (1.0 + (b - a));
  if (x[0] < a - sx || x[0] > b + sx) return false;
  if (dim == 1) return true;
  const double sy = slack * (1.0 + (d - c));
  return x[1] >= c - sy && x[1] <= d + sy;
}

bool Domain::on_boundary(const Vec& x, double slack) const {
  if (!contains(x, slack)) return false;
  const double sx = slack * (1.0 + (b - a));
  if (std::abs(x[0] - a) <= sx || std::abs(x[0] - b) <= sx) return true;
  if (dim == 1) return false;
  const double sy = slack * (1.0 + (d - c));
  return std::abs(x[1] - c) <= sy || std::abs(x[1] - d) <= sy;
}

}  // namespace varmin
