#include "mmdlab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>

#include "mmdlab/errors.hpp"
#include "mmdlab/mmg_io.hpp"
#include "mmdlab/parallel.hpp"
#include "mmdlab/rng.hpp"
#include "mmdlab/version.hpp"

namespace mmdlab {

namespace {

[[noreturn]] void config_fail(const std::string& pointer, const std::string& what) {
  throw ConfigError("config error at " + pointer + ": " + what);
}

const Json& need(const Json& j, const char* key, const std::string& pointer) {
  if (!j.is_object() || !j.contains(key)) config_fail(pointer + "/" + key, "missing field");
  return j[key];
}

double need_number(const Json& j, const char* key, const std::string& pointer) {
  const auto& v = need(j, key, pointer);
  if (!v.is_number()) config_fail(pointer + "/" + key, "expected a number");
  return v.get<double>();
}

std::vector<double> number_list(const Json& v, const std::string& pointer) {
  if (!v.is_array() || v.empty()) config_fail(pointer, "expected a nonempty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) config_fail(pointer, "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

SolverOptions solver_from_json(const Json& cfg) {
  SolverOptions opts;
  if (cfg.contains("solver")) {
    const auto& s = cfg["solver"];
    if (s.contains("tol")) opts.tol = s["tol"].get<double>();
    if (s.contains("max_iter")) opts.max_iter = s["max_iter"].get<std::int64_t>();
    if (s.contains("force_cg")) opts.force_cg = s["force_cg"].get<bool>();
    if (s.contains("direct_vertex_limit"))
      opts.direct_vertex_limit = s["direct_vertex_limit"].get<int>();
  }
  return opts;
}

RegionSpec region_from_json(const MetricMeasureGraph& g, const Json& j,
                            const std::string& pointer) {
  if (j.is_string() && j == "all") {
    std::vector<VertexId> all(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) all[v] = v;
    return RegionSpec::explicit_set(std::move(all));
  }
  const std::string kind = need(j, "kind", pointer).get<std::string>();
  if (kind == "ball")
    return RegionSpec::ball(static_cast<VertexId>(need_number(j, "center", pointer)),
                            need_number(j, "radius", pointer));
  if (kind == "annulus")
    return RegionSpec::annulus(static_cast<VertexId>(need_number(j, "center", pointer)),
                               need_number(j, "r_in", pointer),
                               need_number(j, "r_out", pointer));
  if (kind == "explicit") {
    std::vector<VertexId> ids;
    for (const auto& v : need(j, "ids", pointer)) ids.push_back(v.get<VertexId>());
    return RegionSpec::explicit_set(std::move(ids));
  }
  config_fail(pointer + "/kind", "unknown region kind '" + kind + "'");
}

std::vector<std::pair<double, double>> scale_pairs_from_json(const Json& cfg,
                                                             const std::string& pointer) {
  std::vector<std::pair<double, double>> pairs;
  if (cfg.contains("scale_pairs")) {
    for (const auto& p : cfg["scale_pairs"]) {
      if (!p.is_array() || p.size() != 2) config_fail(pointer + "/scale_pairs", "expected [r, R] pairs");
      pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  } else if (cfg.contains("radii")) {
    const auto radii = number_list(cfg["radii"], pointer + "/radii");
    for (std::size_t i = 0; i < radii.size(); ++i)
      for (std::size_t j = i; j < radii.size(); ++j)
        if (radii[i] <= radii[j]) pairs.emplace_back(radii[i], radii[j]);
  } else {
    config_fail(pointer, "need scale_pairs or radii");
  }
  return pairs;
}

// pairs at (approximately) a prescribed distance, sampled with a fixed seed
std::vector<std::pair<VertexId, VertexId>> sample_distance_pairs(
    const MetricMeasureGraph& g, double target, int count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::pair<VertexId, VertexId>> out;
  int attempts = 0;
  const int max_attempts = count * 200;
  while (static_cast<int>(out.size()) < count && attempts < max_attempts) {
    ++attempts;
    const auto x = static_cast<VertexId>(rng.below(g.vertex_count()));
    const auto dist = g.distances_from(x, target);
    std::vector<VertexId> at_target;
    for (VertexId v = 0; v < g.vertex_count(); ++v)
      if (std::abs(dist[v] - target) <= 1e-9) at_target.push_back(v);
    if (at_target.empty()) continue;
    out.emplace_back(x, at_target[rng.below(at_target.size())]);
  }
  if (static_cast<int>(out.size()) < count)
    throw ConfigError("pair sampling: could not realize distance " +
                      std::to_string(target));
  return out;
}

}  // namespace

GeneratorSpec generator_spec_from_json(const Json& j) {
  GeneratorSpec spec;
  spec.shape = shape_from_name(need(j, "shape", "/generator").get<std::string>());
  if (j.contains("level")) spec.level = j["level"].get<int>();
  if (j.contains("side")) spec.side = j["side"].get<int>();
  if (j.contains("dim")) spec.dim = j["dim"].get<int>();
  if (j.contains("measure")) spec.base_measure = j["measure"].get<double>();
  if (j.contains("conductance")) spec.base_conductance = j["conductance"].get<double>();
  if (j.contains("edge_length")) spec.edge_length = j["edge_length"].get<double>();
  return spec;
}

WeightSpec weight_spec_from_json(const Json& j) {
  WeightSpec w;
  w.origin = static_cast<VertexId>(need_number(j, "origin", "/weight"));
  w.alpha = need_number(j, "alpha", "/weight");
  const std::string form = j.value("form", "power");
  if (form == "power")
    w.form = WeightSpec::Form::Power;
  else if (form == "paper")
    w.form = WeightSpec::Form::Paper;
  else
    config_fail("/weight/form", "expected 'power' or 'paper'");
  return w;
}

ScalingFunction psi_from_json(const Json& j) {
  if (j.is_null()) return ScalingFunction::power(2.0);
  const std::string kind = j.value("kind", "power");
  if (kind == "power") return ScalingFunction::power(need_number(j, "beta", "/psi"));
  if (kind == "tabulated") {
    std::vector<double> r = number_list(need(j, "r", "/psi"), "/psi/r");
    std::vector<double> psi = number_list(need(j, "psi", "/psi"), "/psi/psi");
    return ScalingFunction::tabulated(std::move(r), std::move(psi));
  }
  config_fail("/psi/kind", "expected 'power' or 'tabulated'");
}

MetricMeasureGraph build_space(const Json& source) {
  MetricMeasureGraph base = [&]() -> MetricMeasureGraph {
    if (source.contains("file")) return read_mmg_file(source["file"].get<std::string>());
    if (source.contains("generator")) return generate(generator_spec_from_json(source["generator"]));
    config_fail("/space", "need 'file' or 'generator'");
  }();
  if (source.contains("glue")) {
    const auto& glue = source["glue"];
    MetricMeasureGraph other = glue.contains("file")
                                   ? read_mmg_file(glue["file"].get<std::string>())
                                   : generate(generator_spec_from_json(
                                         need(glue, "generator", "/space/glue")));
    const auto at_self = static_cast<VertexId>(need_number(glue, "at_self", "/space/glue"));
    const auto at_other = static_cast<VertexId>(need_number(glue, "at_other", "/space/glue"));
    base = glue_at_point(base, other, at_self, at_other);
  }
  if (source.contains("weight"))
    base = apply_weight(base, weight_spec_from_json(source["weight"]));
  return base;
}

std::vector<VertexId> interior_sample(const MetricMeasureGraph& g, int n) {
  if (n < 1) throw ConfigError("interior-sample: need a positive count");
  // rim = vertices of non-maximal edge degree; the sample maximizes the
  // distance to the rim, ties broken by ascending id
  std::vector<int> deg(g.vertex_count(), 0);
  int max_deg = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    deg[v] = static_cast<int>(g.arcs(v).size());
    max_deg = std::max(max_deg, deg[v]);
  }
  std::vector<VertexId> rim;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (deg[v] < max_deg) rim.push_back(v);

  std::vector<VertexId> order(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) order[v] = v;
  if (!rim.empty()) {
    // multi-source shortest distance to the rim
    std::vector<double> dist(g.vertex_count(), kInfDist);
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (VertexId v : rim) {
      dist[v] = 0;
      heap.emplace(0.0, v);
    }
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (const auto& arc : g.arcs(u)) {
        const double nd = d + g.edges()[arc.edge].length;
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          heap.emplace(nd, arc.to);
        }
      }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](VertexId a, VertexId b) { return dist[a] > dist[b]; });
  }
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(n)));
  return order;
}

std::vector<VertexId> centers_from_json(const MetricMeasureGraph& g, const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const std::string prefix = "interior-sample:";
    if (s.rfind(prefix, 0) == 0)
      return interior_sample(g, std::stoi(s.substr(prefix.size())));
    config_fail("/centers", "expected id list or 'interior-sample:<n>'");
  }
  std::vector<VertexId> out;
  for (const auto& v : j) out.push_back(g.check(v.get<VertexId>()));
  if (out.empty()) config_fail("/centers", "empty center list");
  return out;
}

Json run_operation(const MetricMeasureGraph& g, const std::string& op,
                   const Json& cfg, const RunOptions& run) {
  const std::string p = "/config";
  const SolverOptions solver = solver_from_json(cfg);

  if (op == "vd") {
    const auto centers = centers_from_json(g, need(cfg, "centers", p));
    const auto radii = number_list(need(cfg, "radii", p), p + "/radii");
    return to_json(vd_constant(g, centers, radii, cfg.value("cap", 1e4)));
  }
  if (op == "pi") {
    const auto centers = centers_from_json(g, need(cfg, "centers", p));
    const auto radii = number_list(need(cfg, "radii", p), p + "/radii");
    const auto psi = psi_from_json(cfg.value("psi", Json()));
    std::vector<double> a_grid{1.0, 1.5, 2.0};
    if (cfg.contains("A"))
      a_grid = cfg["A"].is_array() ? number_list(cfg["A"], p + "/A")
                                   : std::vector<double>{cfg["A"].get<double>()};
    return to_json(poincare_sweep(g, centers, radii, a_grid, psi,
                                  cfg.value("cap", 1e4), solver));
  }
  if (op == "cap") {
    const auto centers = centers_from_json(g, need(cfg, "centers", p));
    const auto radii = number_list(need(cfg, "radii", p), p + "/radii");
    const auto psi = psi_from_json(cfg.value("psi", Json()));
    return to_json(cap_upper_constant(g, psi, need_number(cfg, "A1", p), centers,
                                      radii, cfg.value("cap", 1e4), solver));
  }
  if (op == "fvg") {
    const auto centers = centers_from_json(g, need(cfg, "centers", p));
    const auto pairs = scale_pairs_from_json(cfg, p);
    const auto psi = psi_from_json(cfg.value("psi", Json()));
    return to_json(fvg_check(g, psi, centers, pairs, cfg.value("cap", 1e4)));
  }
  if (op == "rvd") {
    const auto centers = centers_from_json(g, need(cfg, "centers", p));
    const auto pairs = scale_pairs_from_json(cfg, p);
    return to_json(rvd_constant(g, centers, pairs, cfg.value("cap", 1e4)));
  }
  if (op == "chaining") {
    const auto x = static_cast<VertexId>(need_number(cfg, "x", p));
    const double big_r = need_number(cfg, "R", p);
    const double a1 = need_number(cfg, "A1", p);
    std::vector<int> ks;
    if (cfg["k"].is_array())
      for (const auto& k : cfg["k"]) ks.push_back(k.get<int>());
    else
      ks.push_back(cfg["k"].get<int>());
    Json out;
    Json entries = Json::array();
    bool all = true;
    for (int k : ks) {
      Json e = to_json(capacity_chaining_check(g, x, big_r, a1, k, solver));
      e["k"] = k;
      all = all && e["holds"].get<bool>();
      entries.push_back(e);
    }
    out["entries"] = entries;
    out["pass"] = all;
    return out;
  }
  if (op == "chain") {
    const auto x = static_cast<VertexId>(need_number(cfg, "x", p));
    const auto y = static_cast<VertexId>(need_number(cfg, "y", p));
    const auto container = region_from_json(g, need(cfg, "container", p), p + "/container");
    return to_json(chain_count(g, x, y, container, need_number(cfg, "epsilon", p)));
  }
  if (op == "ball") {
    const auto x = static_cast<VertexId>(need_number(cfg, "x", p));
    return to_json(ball_chain_connected(g, x, need_number(cfg, "r", p),
                                        need_number(cfg, "A", p),
                                        number_list(need(cfg, "epsilons", p), p + "/epsilons"),
                                        run.seed));
  }
  if (op == "annulus") {
    const auto x = static_cast<VertexId>(need_number(cfg, "x", p));
    return to_json(annulus_chain_connected(g, x, need_number(cfg, "r", p),
                                           need_number(cfg, "C", p),
                                           need_number(cfg, "epsilon", p), run.seed));
  }
  if (op == "annulus-path") {
    const auto x = static_cast<VertexId>(need_number(cfg, "x", p));
    return to_json(annulus_path_connected(g, x, need_number(cfg, "r", p),
                                          need_number(cfg, "C0", p)));
  }
  if (op == "minimal-c0") {
    const auto centers = centers_from_json(g, need(cfg, "centers", p));
    const auto radii = number_list(need(cfg, "radii", p), p + "/radii");
    const auto grid = number_list(need(cfg, "C0_grid", p), p + "/C0_grid");
    return to_json(minimal_annulus_constant(g, centers, radii, grid));
  }
  if (op == "chain-bound") {
    std::vector<std::pair<VertexId, VertexId>> pairs;
    if (cfg.contains("pairs")) {
      for (const auto& pr : cfg["pairs"])
        pairs.emplace_back(pr[0].get<VertexId>(), pr[1].get<VertexId>());
    } else if (cfg.contains("pairs_sample")) {
      const auto& ps = cfg["pairs_sample"];
      pairs = sample_distance_pairs(g, need_number(ps, "distance", p + "/pairs_sample"),
                                    static_cast<int>(need_number(ps, "count", p + "/pairs_sample")),
                                    run.seed);
    } else {
      config_fail(p, "need pairs or pairs_sample");
    }
    const auto epsilons = number_list(need(cfg, "epsilons", p), p + "/epsilons");
    const auto psi = psi_from_json(cfg.value("psi", Json()));
    return to_json(chain_bound_ratio(g, pairs, epsilons, need_number(cfg, "A0", p), psi));
  }
  if (op == "rca") {
    const auto o = static_cast<VertexId>(need_number(cfg, "origin", p));
    return to_json(rca_check(g, o, need_number(cfg, "A", p),
                             number_list(need(cfg, "radii", p), p + "/radii")));
  }
  if (op == "pou") {
    const auto region_spec = region_from_json(g, cfg.contains("region") ? cfg["region"] : Json("all"),
                                              p + "/region");
    const auto region = resolve_region(g, region_spec);
    const auto psi = psi_from_json(cfg.value("psi", Json()));
    const auto pou = build_partition_of_unity(g, region, need_number(cfg, "epsilon", p), psi);
    return to_json(pou, check_partition_properties(g, pou));
  }
  if (op == "two-point") {
    const auto& uj = need(cfg, "u", p);
    std::vector<double> u;
    if (uj.contains("values")) {
      u = number_list(uj["values"], p + "/u/values");
    } else {
      const auto origin = static_cast<VertexId>(need_number(uj, "origin", p + "/u"));
      u = g.distances_from(origin);
    }
    const auto psi = psi_from_json(cfg.value("psi", Json()));
    return to_json(two_point_check(g, u, static_cast<VertexId>(need_number(cfg, "x0", p)),
                                   need_number(cfg, "R", p),
                                   static_cast<std::int64_t>(cfg.value("pairs", 200)),
                                   psi, cfg.value("C_P", 2.0), run.seed));
  }
  if (op == "refine") {
    std::vector<MetricMeasureGraph> levels;
    for (const auto& f : need(cfg, "levels", p))
      levels.push_back(read_mmg_file(f.get<std::string>()));
    std::vector<const MetricMeasureGraph*> ptrs;
    for (const auto& lvl : levels) ptrs.push_back(&lvl);
    std::vector<std::vector<VertexId>> maps(levels.size() - 1);
    {
      const std::string map_file = need(cfg, "maps", p).get<std::string>();
      std::ifstream in(map_file);
      if (!in) throw ConfigError("cannot open map file: " + map_file);
      for (std::size_t k = 0; k + 1 < levels.size(); ++k)
        maps[k].assign(levels[k].vertex_count(), -1);
      std::string tag;
      int level;
      VertexId coarse, fine;
      while (in >> tag >> level >> coarse >> fine) {
        if (tag != "map") throw ConfigError(map_file + ": expected 'map' records");
        if (level < 2 || level > static_cast<int>(levels.size()))
          throw ConfigError(map_file + ": map level out of range");
        maps[level - 2][coarse] = fine;
      }
    }
    const auto x = static_cast<VertexId>(need_number(cfg, "x", p));
    const auto y = static_cast<VertexId>(need_number(cfg, "y", p));
    return to_json(refine_chain(ptrs, maps, x, y, need_number(cfg, "epsilon_ratio", p),
                                need_number(cfg, "A0", p), cfg.value("map_tolerance", 0.05)));
  }
  if (op == "harnack") {
    const auto centers = centers_from_json(g, need(cfg, "centers", p));
    const auto radii = number_list(need(cfg, "radii", p), p + "/radii");
    const double delta = need_number(cfg, "delta", p);
    const double cap = cfg.value("cap", 1e3);
    if (cfg.contains("weight")) {
      const auto w = weight_spec_from_json(cfg["weight"]);
      return to_json(ehi_stability_experiment(g, w, centers, radii, delta, cap,
                                              cfg.value("counterexample", false), solver));
    }
    if (cfg.contains("remote")) {
      const auto& rj = cfg["remote"];
      return to_json(remote_ehi_sweep(
          g, static_cast<VertexId>(need_number(rj, "origin", p + "/remote")),
          need_number(rj, "epsilon", p + "/remote"), centers, radii, delta, cap, solver));
    }
    return to_json(ehi_sweep(g, centers, radii, delta, cap, solver));
  }
  if (op == "capacity") {
    const auto a = resolve_region(g, region_from_json(g, need(cfg, "A", p), p + "/A"));
    const auto b = resolve_region(g, region_from_json(g, need(cfg, "B", p), p + "/B"));
    return to_json(capacity(g, a, b, solver), cfg.value("include_potential", false));
  }
  if (op == "validate-psi") {
    const auto psi = psi_from_json(need(cfg, "psi", p));
    return to_json(validate_scaling(psi, need_number(cfg, "r_min", p),
                                    need_number(cfg, "r_max", p),
                                    static_cast<int>(cfg.value("samples", 16))));
  }
  throw ConfigError("unknown operation '" + op + "'");
}

namespace {

void check_trusted_range(const Json& scenario, const Json& op_entry,
                         const std::string& pointer) {
  if (!scenario.contains("trusted_scale_range")) return;
  const auto range = scenario["trusted_scale_range"];
  const double lo = range[0].get<double>(), hi = range[1].get<double>();
  if (!op_entry.contains("config")) return;
  const auto& cfg = op_entry["config"];
  if (cfg.contains("radii")) {
    const auto& radii = cfg["radii"];
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double r = radii[i].get<double>();
      if (r < lo || r > hi)
        config_fail(pointer + "/config/radii/" + std::to_string(i),
                    "radius outside the trusted scale range");
    }
  }
  if (cfg.contains("scale_pairs")) {
    const auto& pairs = cfg["scale_pairs"];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (int k = 0; k < 2; ++k) {
        const double r = pairs[i][k].get<double>();
        if (r < lo || r > hi)
          config_fail(pointer + "/config/scale_pairs/" + std::to_string(i),
                      "scale outside the trusted scale range");
      }
    }
  }
  if (cfg.contains("r")) {
    const double r = cfg["r"].get<double>();
    if (r < lo || r > hi)
      config_fail(pointer + "/config/r", "radius outside the trusted scale range");
  }
}

}  // namespace

Json run_scenario(const Json& scenario, const RunOptions& run) {
  if (!scenario.is_object()) throw ConfigError("config error at /: scenario must be an object");
  const auto& ops = scenario.contains("operations") ? scenario["operations"] : Json::array();
  if (!ops.is_array()) config_fail("/operations", "expected an array");

  const std::uint64_t seed =
      scenario.contains("seed") ? scenario["seed"].get<std::uint64_t>() : run.seed;
  RunOptions op_run = run;
  op_run.seed = seed;

  const MetricMeasureGraph space = build_space(need(scenario, "space", "/"));

  Json out;
  out["schema_version"] = kSchemaVersion;
  out["tool_version"] = kToolVersion;
  out["kind"] = "scenario";
  out["seed"] = seed;
  out["threads"] = thread_count();
  out["scenario"] = scenario;
  Json operations = Json::array();
  std::vector<std::string> failed;
  bool aborted = false;

  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& entry = ops[i];
    const std::string pointer = "/operations/" + std::to_string(i);
    const std::string op = need(entry, "op", pointer).get<std::string>();
    const std::string name = entry.value("name", op);
    const bool required = entry.value("required", false);
    check_trusted_range(scenario, entry, pointer);

    Json record;
    record["name"] = name;
    record["op"] = op;
    record["required"] = required;

    const auto t0 = std::chrono::steady_clock::now();
    try {
      Json rep = run_operation(space, op, entry.value("config", Json::object()), op_run);
      const bool pass = rep.value("pass", true);
      record["status"] = "ok";
      record["report"] = std::move(rep);
      if (!pass) failed.push_back(name);
    } catch (const ConfigError&) {
      throw;  // configuration problems abort the run
    } catch (const std::exception& e) {
      record["status"] = "error";
      record["error"] = e.what();
      failed.push_back(name);
      if (required) aborted = true;
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    // timing suppressed in bit-exact mode so reruns are byte identical
    record["wall_time_s"] = thread_count() == 1 ? 0.0 : secs;
    if (run.verbose)
      std::fprintf(stderr, "[mmdlab] %s (%s): %s in %.3fs\n", name.c_str(), op.c_str(),
                   record["status"].get<std::string>().c_str(), secs);
    operations.push_back(std::move(record));
    if (aborted) break;
  }

  out["operations"] = std::move(operations);
  Json summary;
  summary["verdict"] = failed.empty() ? "pass" : "fail";
  summary["failed"] = failed;
  if (aborted) summary["aborted"] = true;
  out["summary"] = std::move(summary);
  return out;
}

int scenario_exit_code(const Json& report) {
  return report["summary"]["verdict"] == "pass" ? 0 : 1;
}

}  // namespace mmdlab
