#include "distcomp/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace distcomp {

void require_keys(const Json& j, std::initializer_list<const char*> allowed,
                  const std::string& context) {
  if (!j.is_object()) throw InvalidInput(context + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key()))
      throw InvalidInput(context + ": unknown field '" + it.key() + "'");
  }
}

namespace {

Vector vector_from_json(const Json& j, const std::string& context) {
  if (!j.is_array()) throw InvalidInput(context + ": expected an array");
  Vector v(j.size());
  Index i = 0;
  for (const auto& e : j) v(i++) = e.get<double>();
  return v;
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

Json to_json(const Grid& g) { return vector_to_json(g.points()); }

Json to_json(const GridDistribution& f) {
  return Json{{"grid", to_json(f.grid())}, {"weights", vector_to_json(f.weights())}};
}

GridDistribution distribution_from_json(const Json& j) {
  require_keys(j, {"grid", "weights"}, "distribution");
  return GridDistribution(Grid(vector_from_json(j.at("grid"), "grid")),
                          vector_from_json(j.at("weights"), "weights"));
}

Json to_json(const KKTReport& r) {
  Json supp = Json::array();
  for (Index i : r.support) supp.push_back(i);
  return Json{{"lambda", r.lambda},
              {"sup_violation", r.sup_violation},
              {"comp_gap", r.comp_gap},
              {"support", supp},
              {"converged", r.converged},
              {"iterations", r.iterations}};
}

Json to_json(const OrderVerdict& v) {
  Json j{{"relation", to_string(v.relation)}, {"max_violation", v.max_violation}};
  if (v.witness) j["witness"] = *v.witness;
  return j;
}

ScalarFn scalar_fn_from_json(const Json& j, const std::string& context) {
  std::string form = j.at("form").get<std::string>();
  if (form == "constant") {
    require_keys(j, {"form", "c"}, context);
    return ScalarFn::constant(j.at("c").get<double>());
  }
  if (form == "affine") {
    require_keys(j, {"form", "a", "b"}, context);
    return ScalarFn::affine(j.at("a").get<double>(), j.at("b").get<double>());
  }
  if (form == "power") {
    require_keys(j, {"form", "a", "p"}, context);
    return ScalarFn::power(j.at("a").get<double>(), j.at("p").get<double>());
  }
  if (form == "exp_decay") {
    require_keys(j, {"form", "a", "b"}, context);
    return ScalarFn::exp_decay(j.at("a").get<double>(), j.at("b").get<double>());
  }
  if (form == "tabulated_spline") {
    require_keys(j, {"form", "x", "y"}, context);
    std::vector<double> xs = j.at("x").get<std::vector<double>>();
    std::vector<double> ys = j.at("y").get<std::vector<double>>();
    return ScalarFn::tabulated_spline(std::move(xs), std::move(ys));
  }
  throw InvalidInput(context + ": unknown function form '" + form + "'");
}

Kernel2 kernel_from_json(const Json& j, const std::string& context) {
  std::string form = j.at("form").get<std::string>();
  if (form == "sum") {
    require_keys(j, {"form", "x", "q"}, context);
    return Kernel2::sum(scalar_fn_from_json(j.at("x"), context + ".x"),
                        scalar_fn_from_json(j.at("q"), context + ".q"));
  }
  if (form == "product") {
    require_keys(j, {"form", "x", "q"}, context);
    return Kernel2::product(scalar_fn_from_json(j.at("x"), context + ".x"),
                            scalar_fn_from_json(j.at("q"), context + ".q"));
  }
  if (form == "scaled_exp") {
    require_keys(j, {"form", "a", "b", "c"}, context);
    return Kernel2::scaled_exp(j.at("a").get<double>(), j.at("b").get<double>(),
                               j.at("c").get<double>());
  }
  throw InvalidInput(context + ": unknown kernel form '" + form + "'");
}

CostModel cost_from_json(const Json& j) {
  std::string kind = j.at("kind").get<std::string>();
  CostModel model;
  if (kind == "linear") {
    require_keys(j, {"kind", "c", "quadrature_steps", "steepness"}, "cost");
    model = CostModel::linear(scalar_fn_from_json(j.at("c"), "cost.c"));
  } else if (kind == "separable") {
    require_keys(j, {"kind", "gamma", "beta", "quadrature_steps", "steepness"}, "cost");
    model = CostModel::separable(scalar_fn_from_json(j.at("gamma"), "cost.gamma"),
                                 scalar_fn_from_json(j.at("beta"), "cost.beta"));
  } else if (kind == "local") {
    require_keys(j, {"kind", "kappa", "quadrature_steps", "steepness"}, "cost");
    model = CostModel::local(kernel_from_json(j.at("kappa"), "cost.kappa"));
  } else if (kind == "tail_local") {
    require_keys(j, {"kind", "kappa", "c_inf", "quadrature_steps", "steepness"}, "cost");
    model = CostModel::tail_local(kernel_from_json(j.at("kappa"), "cost.kappa"),
                                  j.at("c_inf").get<double>());
  } else {
    throw InvalidInput("cost: unknown kind '" + kind + "'");
  }
  if (j.contains("quadrature_steps")) {
    model.quadrature_steps = j.at("quadrature_steps").get<int>();
    if (model.quadrature_steps < 2) throw InvalidInput("cost: quadrature_steps >= 2");
  }
  if (j.contains("steepness")) model.steepness = j.at("steepness").get<double>();
  return model;
}

SolverConfig solver_config_from_json(const Json& j) {
  require_keys(j,
               {"damping", "max_iter", "kkt_tol", "inner_iter", "support_eps",
                "mean_constraint", "mc_trials"},
               "solver");
  SolverConfig cfg;
  if (j.contains("damping")) cfg.damping = j.at("damping").get<double>();
  if (j.contains("max_iter")) cfg.max_iter = j.at("max_iter").get<int>();
  if (j.contains("kkt_tol")) cfg.kkt_tol = j.at("kkt_tol").get<double>();
  if (j.contains("inner_iter")) cfg.inner_iter = j.at("inner_iter").get<int>();
  if (j.contains("support_eps")) cfg.support_eps = j.at("support_eps").get<double>();
  if (j.contains("mc_trials")) cfg.mc_trials = j.at("mc_trials").get<int>();
  if (j.contains("mean_constraint") && !j.at("mean_constraint").is_null())
    cfg.mean_constraint = j.at("mean_constraint").get<double>();
  cfg.check();
  return cfg;
}

TasteDensity taste_from_json(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "uniform") return TasteDensity::uniform();
    throw InvalidInput("taste: unknown named density");
  }
  require_keys(j, {"values"}, "taste");
  return TasteDensity(vector_from_json(j.at("values"), "taste.values"));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_distribution_csv(std::ostream& os, const GridDistribution& f) {
  os << "x,weight\n";
  for (Index i = 0; i < f.grid().size(); ++i)
    os << format_double(f.grid().point(i)) << ',' << format_double(f.weight(i)) << '\n';
}

GridDistribution read_distribution_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,weight", 0) != 0)
    throw InvalidInput("distribution csv: missing header");
  std::vector<double> xs, ws;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidInput("distribution csv: bad row");
    xs.push_back(std::stod(line.substr(0, comma)));
    ws.push_back(std::stod(line.substr(comma + 1)));
  }
  Vector gx(xs.size()), gw(ws.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    gx(static_cast<Index>(i)) = xs[i];
    gw(static_cast<Index>(i)) = ws[i];
  }
  return GridDistribution(Grid(std::move(gx)), std::move(gw));
}

}  // namespace distcomp
