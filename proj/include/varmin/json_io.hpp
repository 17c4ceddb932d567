#pragma once

#include <string>

#include <json.hpp>

#include "varmin/functional.hpp"
#include "varmin/integrand.hpp"
#include "varmin/mesh.hpp"
#include "varmin/minimizer.hpp"
#include "varmin/semicont.hpp"

namespace varmin {

using json = nlohmann::ordered_json;

// Serializes with every floating-point number printed to 17 significant
// digits; non-finite numbers become null.
std::string dump_json(const json& j, int indent = 2);
std::string format_double(double v);

// Mesh/field dump: {"dim", "level", "vertices", "cells", "boundary", "coeffs"}.
json field_to_json(const FemField& u);

json to_json(const Domain& d);
json to_json(const GrowthCertificate& c);
json to_json(const ConvexityReport& r);
json to_json(const GrowthReport& r);
json to_json(const CoercivityCertificate& c);
json to_json(const LevelRecord& r);
json to_json(const MinimizationReport& r);
json to_json(const SemicontinuityReport& r);
json to_json(const WeakConvergenceReport& r);
json to_json(const ChebyshevCheck& c);

}  // namespace varmin
