#pragma once

#include "distcomp/market.hpp"
#include "distcomp/orders.hpp"
#include "distcomp/solver.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace distcomp {

using Json = nlohmann::json;

// Rejects keys outside the allowed set; config typos fail loudly.
void require_keys(const Json& j, std::initializer_list<const char*> allowed,
                  const std::string& context);

Json to_json(const Grid& g);
Json to_json(const GridDistribution& f);
GridDistribution distribution_from_json(const Json& j);

Json to_json(const KKTReport& r);
Json to_json(const OrderVerdict& v);

// Scalar-function catalog: {"form": "power"|"affine"|"exp_decay"|
// "constant"|"tabulated_spline", ...parameters}.
ScalarFn scalar_fn_from_json(const Json& j, const std::string& context);

// Kernel catalog: {"form": "sum"|"product", "x": {...}, "q": {...}} or
// {"form": "scaled_exp", "a":, "b":, "c":}.
Kernel2 kernel_from_json(const Json& j, const std::string& context);

// {"kind": "linear"|"separable"|"local"|"tail_local", ...} with optional
// "quadrature_steps" and "steepness".
CostModel cost_from_json(const Json& j);

SolverConfig solver_config_from_json(const Json& j);

TasteDensity taste_from_json(const Json& j);

// Two-column CSV with header "x,weight".
void write_distribution_csv(std::ostream& os, const GridDistribution& f);
GridDistribution read_distribution_csv(std::istream& is);

// Fixed shortest-roundtrip formatting for CSV cells.
std::string format_double(double v);

}  // namespace distcomp
