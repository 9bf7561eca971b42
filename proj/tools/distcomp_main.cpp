#include "distcomp/contest.hpp"
#include "distcomp/io.hpp"
#include "distcomp/race.hpp"

#include "sha256.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace distcomp;

namespace {

int log_level() {
  const char* env = std::getenv("DISTCOMP_LOG");
  if (!env) return 0;
  std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[distcomp] " << msg << "\n";
}

// Collects artifacts so the manifest can list them with content hashes and
// is itself written atomically last.
class RunWriter {
 public:
  RunWriter(fs::path dir, Json config_echo, int threads)
      : dir_(std::move(dir)),
        echo_(std::move(config_echo)),
        threads_(threads),
        t0_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(dir_ / name, std::ios::binary);
    os << content;
    os.close();
    artifacts_.push_back(Json{{"file", name}, {"sha256", tools::Sha256::of(content)}});
    log_info("wrote " + name);
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  void finish(const Json& verdicts) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0_)
                  .count();
    Json manifest{{"schema_version", 1},
                  {"config_echo", echo_},
                  {"input_hash", tools::Sha256::of(echo_.dump())},
                  {"artifacts", artifacts_},
                  {"verdicts", verdicts},
                  {"execution", Json{{"threads", threads_},
                                     {"wall_time_ms", ms},
                                     {"output_dir", dir_.string()}}}};
    fs::path tmp = dir_ / "manifest.json.tmp";
    {
      std::ofstream os(tmp, std::ios::binary);
      os << manifest.dump(2) << "\n";
    }
    fs::rename(tmp, dir_ / "manifest.json");
    log_info("wrote manifest.json");
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  Json echo_;
  int threads_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<Json> artifacts_;
};

struct Resolved {
  std::string command;
  std::uint64_t seed = 0;
  Index grid_points = 201;
  SolverConfig solver;
  Json spec;
  fs::path out_dir;
  int threads = 1;
  Json echo;
};

Resolved resolve_config(const std::string& command, const std::string& config_path,
                        const std::string& out_override, long long seed_override,
                        long long grid_override, int threads) {
  std::ifstream is(config_path);
  if (!is) throw InvalidInput("cannot open config file: " + config_path);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(j, {"schema_version", "command", "seed", "grid", "solver", "spec",
                   "output_dir"},
               "config");
  if (j.at("schema_version").get<int>() != 1)
    throw InvalidInput("config: unsupported schema_version");
  Resolved r;
  r.command = j.at("command").get<std::string>();
  if (r.command != command)
    throw InvalidInput("config command '" + r.command + "' does not match '" + command + "'");
  if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
  if (seed_override >= 0) r.seed = static_cast<std::uint64_t>(seed_override);
  if (j.contains("grid")) {
    require_keys(j.at("grid"), {"points"}, "grid");
    r.grid_points = j.at("grid").at("points").get<Index>();
  }
  if (grid_override > 0) r.grid_points = grid_override;
  if (j.contains("solver")) r.solver = solver_config_from_json(j.at("solver"));
  r.solver.seed = r.seed;
  r.spec = j.at("spec");
  std::string out = out_override;
  if (out.empty() && j.contains("output_dir")) out = j.at("output_dir").get<std::string>();
  if (out.empty()) throw InvalidInput("no output directory (config output_dir or --out)");
  r.out_dir = out;
  r.threads = threads;

  Json solver_echo{{"damping", r.solver.damping},       {"max_iter", r.solver.max_iter},
                   {"kkt_tol", r.solver.kkt_tol},       {"inner_iter", r.solver.inner_iter},
                   {"support_eps", r.solver.support_eps}, {"mc_trials", r.solver.mc_trials}};
  if (r.solver.mean_constraint) solver_echo["mean_constraint"] = *r.solver.mean_constraint;
  r.echo = Json{{"schema_version", 1},
                {"command", r.command},
                {"seed", r.seed},
                {"grid", Json{{"points", r.grid_points}}},
                {"solver", solver_echo},
                {"spec", r.spec}};
  return r;
}

PrizeVector prizes_from_json(const Json& arr) {
  Vector v(arr.size());
  Index i = 0;
  for (const auto& e : arr) v(i++) = e.get<double>();
  return PrizeVector(std::move(v));
}

std::string csv_row(const std::vector<double>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += format_double(cells[i]);
  }
  row += '\n';
  return row;
}

// ---- command handlers ------------------------------------------------

int run_solve_contest(const Resolved& r) {
  require_keys(r.spec, {"n", "prizes", "cost", "cross_check"}, "spec");
  Grid grid = Grid::uniform(r.grid_points);
  ContestSpec spec{r.spec.at("n").get<int>(), prizes_from_json(r.spec.at("prizes")),
                   cost_from_json(r.spec.at("cost"))};
  ContestEquilibrium eq = solve_closed_form(spec, grid);
  PrizeSpec prize = PrizeSpec::rank_order(spec.n, spec.prizes);
  KKTReport kkt = kkt_residual(prize, eq.dist, spec.cost, KktMode::game, r.solver);

  RunWriter w(r.out_dir, r.echo, r.threads);
  std::string csv = "x,F\n";
  for (Index i = 0; i < grid.size(); ++i)
    csv += csv_row({grid.point(i), eq.dist.cdf(i)});
  w.write("equilibrium.csv", csv);

  Json result{{"lambda", eq.lambda},
              {"x_bar", eq.support_upper},
              {"kkt", to_json(kkt)}};
  bool converged = kkt.converged;
  if (r.spec.value("cross_check", false)) {
    SolveResult gen = solve_symmetric_equilibrium(prize, spec.cost, r.solver, grid);
    result["cross_check"] = Json{{"levy_distance", levy_distance(eq.dist, gen.dist)},
                                 {"kkt", to_json(gen.report)}};
    converged = converged && gen.report.converged;
  }
  w.write_json("result.json", result);
  w.finish(Json{{"converged", converged}});
  return converged ? 0 : 2;
}

int run_compare_prizes(const Resolved& r) {
  require_keys(r.spec, {"n", "prizes_v", "prizes_w", "cost"}, "spec");
  Grid grid = Grid::uniform(r.grid_points);
  int n = r.spec.at("n").get<int>();
  CostModel cost = cost_from_json(r.spec.at("cost"));
  ContestSpec sv{n, prizes_from_json(r.spec.at("prizes_v")), cost};
  ContestSpec sw{n, prizes_from_json(r.spec.at("prizes_w")), cost};
  IcxCheck chk = icx_theorem_check(sv, sw, grid);

  RunWriter w(r.out_dir, r.echo, r.threads);
  std::string csv = "x,F_v,F_w\n";
  for (Index i = 0; i < grid.size(); ++i)
    csv += csv_row({grid.point(i), chk.eq_lo.dist.cdf(i), chk.eq_hi.dist.cdf(i)});
  w.write("equilibria.csv", csv);

  Json verdict{{"icx_dominates", chk.icx.relation == Relation::dominates},
               {"icx", to_json(chk.icx)},
               {"quantile_cx", to_json(chk.quantile_cx)},
               {"crossing_q", chk.crossing_q},
               {"sign_changes", chk.sign_changes},
               {"mean_v", chk.mean_lo},
               {"mean_w", chk.mean_hi},
               {"quantile_identity_err", chk.quantile_identity_err}};
  w.write_json("verdict.json", verdict);
  w.finish(verdict);
  return 0;
}

int run_entry_sweep(const Resolved& r) {
  require_keys(r.spec, {"n_list", "cost", "q_nodes"}, "spec");
  Grid grid = Grid::uniform(r.grid_points);
  std::vector<int> n_list = r.spec.at("n_list").get<std::vector<int>>();
  CostModel cost = cost_from_json(r.spec.at("cost"));
  int q_nodes = r.spec.value("q_nodes", 8193);
  EntrySweep sweep = entry_sweep(cost, n_list, grid, q_nodes);

  RunWriter w(r.out_dir, r.echo, r.threads);
  std::string csv = "x";
  for (int n : n_list) csv += ",F_n" + std::to_string(n);
  csv += '\n';
  for (Index i = 0; i < grid.size(); ++i) {
    std::vector<double> cells{grid.point(i)};
    for (const auto& d : sweep.dists) cells.push_back(d.cdf(i));
    csv += csv_row(cells);
  }
  w.write("cdfs.csv", csv);

  Json verdicts = Json::array();
  bool all_ordered = true;
  for (std::size_t k = 0; k < sweep.verdicts.size(); ++k) {
    verdicts.push_back(Json{{"n_small", n_list[k]},
                            {"n_large", n_list[k + 1]},
                            {"verdict", to_json(sweep.verdicts[k])}});
    all_ordered &= sweep.verdicts[k].relation == Relation::dominates ||
                   sweep.verdicts[k].relation == Relation::equal;
  }
  Json summary{{"fosd_ordered", all_ordered}, {"comparisons", verdicts}};
  w.write_json("verdicts.json", summary);
  w.finish(summary);
  return 0;
}

RaceSpec race_spec_from_json(const Json& spec, RaceMode mode, Index grid_points) {
  RaceSpec rs;
  rs.n = spec.at("n").get<int>();
  rs.mode = mode;
  rs.cost = cost_from_json(spec.at("cost"));
  rs.grid = TimeGrid::from_x_grid(Grid::uniform(grid_points));
  rs.eta1 = spec.value("eta1", 0.1);
  if (mode == RaceMode::rd) {
    rs.discount = spec.at("discount").get<double>();
  } else {
    rs.margin = spec.at("margin").get<double>();
    rs.demand = scalar_fn_from_json(spec.at("demand"), "spec.demand");
  }
  return rs;
}

int run_race(const Resolved& r, RaceMode mode) {
  if (mode == RaceMode::rd)
    require_keys(r.spec, {"n", "discount", "cost", "eta1"}, "spec");
  else
    require_keys(r.spec, {"n", "margin", "demand", "cost", "eta1"}, "spec");
  RaceSpec spec = race_spec_from_json(r.spec, mode, r.grid_points);
  RaceSolution sol = mode == RaceMode::rd ? solve_race(spec, r.solver)
                                          : quality_race(spec, r.solver);

  RunWriter w(r.out_dir, r.echo, r.threads);
  std::string csv = "t,F_eq,G_pl,phi_eq,phi_pl,v_tilde\n";
  for (Index i = spec.grid.x_grid.size() - 1; i >= 0; --i) {
    csv += csv_row({spec.grid.t_points(i), sol.time_cdf(sol.eq_x, i),
                    sol.time_cdf(sol.pl_x, i), phi(spec, sol.eq_x, i),
                    phi(spec, sol.pl_x, i), v_tilde(spec, sol.eq_x, i)});
  }
  w.write("race.csv", csv);

  double c_inf = spec.cost.c_inf();
  Json summary{{"lambda_g", sol.lambda_g},
               {"lambda_p_bar", sol.lambda_p_bar},
               {"lambda_p", sol.lambda_p},
               {"pin_gap_game", std::abs(sol.lambda_g + c_inf)},
               {"pin_gap_planner", std::abs(sol.lambda_p + c_inf)},
               {"fosd", to_json(sol.fosd)},
               {"overinvestment",
                sol.fosd.relation == Relation::dominates ||
                    sol.fosd.relation == Relation::equal},
               {"kkt_game", to_json(sol.eq_report)},
               {"kkt_planner", to_json(sol.pl_report)}};
  w.write_json("summary.json", summary);
  w.finish(summary);
  return sol.eq_report.converged && sol.pl_report.converged ? 0 : 2;
}

MarketSpec market_spec_from_json(const Json& spec, Index grid_points, int n) {
  MarketSpec ms;
  ms.n = n;
  ms.sigma = spec.at("sigma").get<double>();
  ms.taste = spec.contains("taste") ? taste_from_json(spec.at("taste"))
                                    : TasteDensity::uniform();
  ms.cost = cost_from_json(spec.at("cost"));
  ms.p_max = spec.value("p_max", 2.0);
  ms.grid = Grid::uniform(grid_points);
  return ms;
}

std::string market_csv_header() {
  return "n,p,lambda_g,cost_gap,q_lo,q_hi,kkt_sup,price_dev_gap\n";
}

int run_solve_market(const Resolved& r) {
  require_keys(r.spec, {"n", "sigma", "taste", "cost", "p_max"}, "spec");
  MarketSpec spec = market_spec_from_json(r.spec, r.grid_points, r.spec.at("n").get<int>());
  MarketEquilibrium eq = solve_market(spec, r.solver);

  RunWriter w(r.out_dir, r.echo, r.threads);
  std::string csv = market_csv_header();
  csv += csv_row({static_cast<double>(spec.n), eq.price, eq.lambda_g, eq.cost_gap,
                  eq.q_lo, eq.q_hi, eq.kkt.sup_violation, eq.price_dev_gap});
  w.write("market.csv", csv);

  Json dump{{"distribution", to_json(eq.quality)},
            {"p", eq.price},
            {"kkt", to_json(eq.kkt)},
            {"omega_gap", eq.omega_gap},
            {"converged", eq.converged}};
  Json zs = Json::array(), cdfs = Json::array(), dens = Json::array();
  for (Index j = 0; j < eq.conv.z.size(); ++j) {
    zs.push_back(eq.conv.z(j));
    cdfs.push_back(eq.conv.cdf(j));
    dens.push_back(eq.conv.density(j));
  }
  dump["F_hat"] = Json{{"z", zs}, {"cdf", cdfs}, {"density", dens}};
  w.write_json("equilibrium.json", dump);
  w.finish(Json{{"converged", eq.converged}});
  return eq.converged ? 0 : 2;
}

int run_limit_sweep(const Resolved& r) {
  require_keys(r.spec, {"n_list", "sigma", "taste", "cost", "p_max"}, "spec");
  std::vector<int> n_list = r.spec.at("n_list").get<std::vector<int>>();
  MarketSpec base = market_spec_from_json(r.spec, r.grid_points, 2);
  std::vector<LimitRow> rows = limit_sweep(base, n_list, r.solver, r.threads);

  RunWriter w(r.out_dir, r.echo, r.threads);
  std::string csv = market_csv_header();
  bool all_converged = true;
  bool gap_bound = true;
  for (const auto& row : rows) {
    csv += csv_row({static_cast<double>(row.n), row.price, row.lambda_g, row.cost_gap,
                    row.q_lo, row.q_hi, row.kkt_sup, row.price_dev_gap});
    all_converged &= row.converged;
    gap_bound &= row.cost_gap <= row.price + 10.0 * r.solver.kkt_tol;
  }
  w.write("sweep.csv", csv);
  Json summary{{"converged", all_converged}, {"cost_gap_bounded_by_price", gap_bound}};
  w.write_json("summary.json", summary);
  w.finish(summary);
  return all_converged ? 0 : 2;
}

int run_verify_kkt(const Resolved& r) {
  require_keys(r.spec, {"mode", "distribution", "prize", "cost"}, "spec");
  GridDistribution f = distribution_from_json(r.spec.at("distribution"));
  CostModel cost = cost_from_json(r.spec.at("cost"));
  const Json& pj = r.spec.at("prize");
  std::string kind = pj.at("kind").get<std::string>();
  PrizeSpec prize = [&] {
    if (kind == "rank_order") {
      require_keys(pj, {"kind", "prizes"}, "prize");
      PrizeVector v = prizes_from_json(pj.at("prizes"));
      return PrizeSpec::rank_order(static_cast<int>(v.size()), std::move(v));
    }
    if (kind == "race_rd") {
      require_keys(pj, {"kind", "n", "discount"}, "prize");
      RaceSpec rs;
      rs.n = pj.at("n").get<int>();
      rs.discount = pj.at("discount").get<double>();
      rs.grid = TimeGrid::from_x_grid(f.grid());
      return rs.prize_spec();
    }
    if (kind == "race_quality") {
      require_keys(pj, {"kind", "n", "margin", "demand"}, "prize");
      RaceSpec rs;
      rs.mode = RaceMode::quality;
      rs.n = pj.at("n").get<int>();
      rs.margin = pj.at("margin").get<double>();
      rs.demand = scalar_fn_from_json(pj.at("demand"), "prize.demand");
      rs.grid = TimeGrid::from_x_grid(f.grid());
      return rs.prize_spec();
    }
    throw InvalidInput("prize: unknown kind '" + kind + "'");
  }();
  KktMode mode = r.spec.at("mode").get<std::string>() == "planner" ? KktMode::planner
                                                                   : KktMode::game;
  KKTReport kkt = kkt_residual(prize, f, cost, mode, r.solver);
  RunWriter w(r.out_dir, r.echo, r.threads);
  w.write_json("kkt.json", to_json(kkt));
  w.finish(Json{{"converged", kkt.converged}});
  return 0;
}

int run_validate_cost(const Resolved& r) {
  require_keys(r.spec, {"cost", "pi_bar", "eta1", "trials"}, "spec");
  CostModel cost = cost_from_json(r.spec.at("cost"));
  Grid grid = Grid::uniform(r.grid_points);
  CostValidation val =
      validate(cost, grid, r.spec.at("pi_bar").get<double>(),
               r.spec.at("eta1").get<double>(), r.spec.value("trials", 20),
               r.seed);
  RunWriter w(r.out_dir, r.echo, r.threads);
  Json out{{"pass", val.pass},
           {"violations", val.violations},
           {"c3_margin", val.worst.c3_margin},
           {"value", val.worst.value}};
  w.write_json("validation.json", out);
  w.finish(out);
  return 0;
}

int run_replay_check(const std::string& a, const std::string& b) {
  auto load = [](const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("cannot open manifest: " + path);
    return Json::parse(is);
  };
  Json ma = load(a), mb = load(b);
  if (ma.at("config_echo") != mb.at("config_echo"))
    throw InvalidInput("replay-check: manifests come from different configs");
  bool match = true;
  std::string first_diff;
  auto index = [](const Json& m) {
    std::map<std::string, std::string> files;
    for (const auto& art : m.at("artifacts"))
      files[art.at("file").get<std::string>()] = art.at("sha256").get<std::string>();
    return files;
  };
  auto fa = index(ma), fb = index(mb);
  for (const auto& [file, hash] : fa) {
    auto it = fb.find(file);
    if (it == fb.end() || it->second != hash) {
      match = false;
      first_diff = file;
      break;
    }
  }
  if (match && fa.size() != fb.size()) {
    match = false;
    first_diff = "(artifact count)";
  }
  Json out{{"match", match}};
  if (!match) out["first_diff"] = first_diff;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributional-competition solver"};
  std::string command, config_path, out_dir;
  long long seed_override = -1, grid_override = -1;
  int threads = 1;
  std::vector<std::string> extra;
  app.add_option("command", command,
                 "solve-contest | compare-prizes | entry-sweep | solve-race | "
                 "solve-quality | solve-market | market-limit-sweep | verify-kkt | "
                 "validate-cost | replay-check")
      ->required();
  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed_override, "seed override");
  app.add_option("--threads", threads, "worker threads for sweeps");
  app.add_option("--grid", grid_override, "grid size override");
  app.add_option("args", extra, "manifests for replay-check");
  CLI11_PARSE(app, argc, argv);

  auto emit_error = [&](const std::string& type, const std::string& what) {
    Json err{{"error", type}, {"message", what}};
    if (!out_dir.empty()) {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      std::ofstream os(fs::path(out_dir) / "error.json");
      os << err.dump(2) << "\n";
    }
    std::cerr << err.dump() << "\n";
  };

  try {
    if (command == "replay-check") {
      if (extra.size() != 2)
        throw InvalidInput("replay-check needs two manifest paths");
      return run_replay_check(extra[0], extra[1]);
    }
    if (config_path.empty()) throw InvalidInput("--config is required");
    Resolved r = resolve_config(command, config_path, out_dir, seed_override,
                                grid_override, threads);
    log_info("running " + command + " -> " + r.out_dir.string());
    if (command == "solve-contest") return run_solve_contest(r);
    if (command == "compare-prizes") return run_compare_prizes(r);
    if (command == "entry-sweep") return run_entry_sweep(r);
    if (command == "solve-race") return run_race(r, RaceMode::rd);
    if (command == "solve-quality") return run_race(r, RaceMode::quality);
    if (command == "solve-market") return run_solve_market(r);
    if (command == "market-limit-sweep") return run_limit_sweep(r);
    if (command == "verify-kkt") return run_verify_kkt(r);
    if (command == "validate-cost") return run_validate_cost(r);
    throw InvalidInput("unknown command: " + command);
  } catch (const InvalidInput& e) {
    emit_error("InvalidInput", e.what());
    return 1;
  } catch (const AssumptionViolated& e) {
    emit_error("AssumptionViolated", e.what());
    return 1;
  } catch (const NumericalFailure& e) {
    emit_error("NumericalFailure", e.what());
    return 1;
  } catch (const NoConvergence& e) {
    emit_error("NoConvergence", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("Error", e.what());
    return 1;
  }
}
