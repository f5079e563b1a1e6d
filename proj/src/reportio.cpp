#include "mmdlab/reportio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "mmdlab/errors.hpp"
#include "mmdlab/mmg_io.hpp"
#include "mmdlab/version.hpp"

namespace mmdlab {

Json json_number(double x) {
  if (std::isinf(x)) return Json(x > 0 ? "inf" : "-inf");
  if (std::isnan(x)) return Json();
  return Json(x);
}

Json to_json(const CapacityResult& r, bool include_potential) {
  Json j;
  j["value"] = json_number(r.value);
  j["residual"] = json_number(r.residual);
  Json method;
  method["name"] = r.method.method;
  if (r.method.method == "conjugate-gradient") {
    method["iterations"] = r.method.iterations;
    method["tolerance"] = r.method.tolerance;
  }
  j["method"] = method;
  if (include_potential) j["potential"] = r.potential;
  return j;
}

Json to_json(const ConditionReport& r) {
  Json j;
  j["condition"] = r.condition;
  j["constant"] = json_number(r.constant);
  if (r.alpha) j["alpha"] = json_number(*r.alpha);
  if (r.a_enlargement) j["A"] = *r.a_enlargement;
  if (r.a1) j["A1"] = *r.a1;
  j["scale_range"] = Json::array({r.scale_range.first, r.scale_range.second});
  Json wits = Json::array();
  for (const auto& w : r.witnesses) {
    Json t = Json::array({w.x, w.r});
    if (w.big_r) t.push_back(*w.big_r);
    wits.push_back(t);
  }
  j["witnesses"] = wits;
  j["pass"] = r.pass;
  j["cap"] = r.cap;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  Json samples = Json::array();
  for (const auto& s : r.samples) {
    Json t = Json::array({s.x, s.r});
    if (s.big_r) t.push_back(*s.big_r);
    t.push_back(json_number(s.value));
    samples.push_back(t);
  }
  j["samples"] = samples;
  return j;
}

Json to_json(const ChainingReport& r) {
  Json j;
  j["direct"] = json_number(r.direct);
  j["series_bound"] = json_number(r.series_bound);
  j["ring_capacities"] = r.ring_capacities;
  j["holds"] = r.holds;
  j["slack"] = json_number(r.slack);
  j["pass"] = r.holds;
  return j;
}

Json to_json(const ChainResult& r) {
  Json j;
  j["found"] = r.found;
  j["epsilon"] = r.epsilon;
  if (r.found) {
    j["length"] = r.length;
    j["chain"] = r.chain;
  } else {
    j["length"] = "inf";
  }
  j["pass"] = r.found;
  return j;
}

Json to_json(const ConnectivityReport& r) {
  Json j;
  j["pass"] = r.pass;
  j["vacuous"] = r.vacuous;
  j["pairs_checked"] = r.pairs_checked;
  j["seed"] = r.seed;
  j["component_count"] = r.component_count;
  j["component_sizes"] = r.component_sizes;
  Json viols = Json::array();
  for (const auto& [a, b] : r.violations) viols.push_back(Json::array({a, b}));
  j["violations"] = viols;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

Json to_json(const BallChainReport& r) {
  Json j;
  j["pass"] = r.pass;
  Json per = Json::array();
  for (const auto& [eps, rep] : r.per_epsilon) {
    Json e;
    e["epsilon"] = eps;
    e["report"] = to_json(rep);
    per.push_back(e);
  }
  j["per_epsilon"] = per;
  return j;
}

Json to_json(const MinimalC0Report& r) {
  Json j;
  j["found"] = r.found;
  j["C0"] = r.found ? Json(r.c0) : Json("inf");
  Json grid = Json::array();
  for (const auto& [c0, ok] : r.grid_results) grid.push_back(Json::array({c0, ok}));
  j["grid_results"] = grid;
  j["pass"] = r.found;
  return j;
}

Json to_json(const ChainBoundReport& r) {
  Json j;
  j["sup_ratio"] = json_number(r.sup_ratio);
  j["all_finite"] = r.all_finite;
  j["A0"] = r.a0;
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json t;
    t["x"] = e.x;
    t["y"] = e.y;
    t["epsilon"] = e.epsilon;
    t["distance"] = e.dist;
    t["hops"] = e.hops >= 0 ? Json(e.hops) : Json("inf");
    t["ratio"] = json_number(e.ratio);
    entries.push_back(t);
  }
  j["entries"] = entries;
  j["pass"] = r.all_finite;
  return j;
}

Json to_json(const TwoPointReport& r) {
  Json j;
  j["c_fit"] = json_number(r.c_fit);
  j["violation"] = r.violation;
  if (r.violating_pair)
    j["violating_pair"] = Json::array({r.violating_pair->first, r.violating_pair->second});
  j["pairs_checked"] = r.pairs_checked;
  j["seed"] = r.seed;
  j["pass"] = !r.violation;
  return j;
}

Json to_json(const RefinedChain& r) {
  Json j;
  j["pass"] = r.pass;
  j["base_distance"] = json_number(r.base_distance);
  j["containment_radius"] = json_number(r.containment_radius);
  Json levels = Json::array();
  for (const auto& lvl : r.levels) {
    Json t;
    t["points"] = lvl.points;
    t["scale"] = json_number(lvl.scale);
    t["max_step"] = json_number(lvl.max_step);
    t["sup_deviation"] = json_number(lvl.sup_deviation);
    t["deviation_bound"] = json_number(lvl.deviation_bound);
    t["max_from_root"] = json_number(lvl.max_from_root);
    levels.push_back(t);
  }
  j["levels"] = levels;
  return j;
}

Json to_json(const RcaReport& r) {
  Json j;
  j["pass"] = r.pass;
  Json per = Json::array();
  for (const auto& [radius, rep] : r.per_radius) {
    Json e;
    e["r"] = radius;
    e["report"] = to_json(rep);
    per.push_back(e);
  }
  j["per_radius"] = per;
  return j;
}

Json to_json(const HarnackReport& r) {
  Json j;
  j["x"] = r.x;
  j["r"] = r.r;
  j["delta"] = r.delta;
  j["constant"] = json_number(r.constant);
  j["finite"] = r.finite;
  j["attaining"] = Json::array({r.attain_high, r.attain_low, r.attain_boundary});
  return j;
}

Json to_json(const EhiSweepReport& r) {
  Json j;
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json t;
    t["x"] = e.x;
    t["r"] = e.r;
    t["remote"] = e.remote;
    if (e.report) {
      t["constant"] = json_number(e.report->constant);
      t["finite"] = e.report->finite;
    } else {
      t["error"] = e.error;
    }
    entries.push_back(t);
  }
  j["entries"] = entries;
  j["max_constant"] = json_number(r.max_constant);
  j["all_finite"] = r.all_finite;
  j["cap"] = r.cap;
  j["pass"] = r.pass;
  return j;
}

Json to_json(const RemoteEhiReport& r) {
  Json j;
  j["sweep"] = to_json(r.all);
  j["remote_max"] = json_number(r.remote_max);
  j["non_remote_max"] = json_number(r.non_remote_max);
  j["remote_count"] = r.remote_count;
  j["non_remote_count"] = r.non_remote_count;
  j["remote_pass"] = r.remote_pass;
  j["pass"] = r.remote_pass;
  return j;
}

Json to_json(const StabilityReport& r) {
  Json j;
  j["base"] = to_json(r.base);
  j["weighted"] = to_json(r.weighted);
  j["verdict"] = r.verdict;
  Json series = Json::array();
  for (const auto& [radius, c] : r.weighted_by_radius)
    series.push_back(Json::array({radius, json_number(c)}));
  j["weighted_by_radius"] = series;
  j["growth_monotone"] = r.growth_monotone;
  j["growth_doubles"] = r.growth_doubles;
  j["counterexample_asserted"] = r.counterexample_asserted;
  const bool pass = r.counterexample_asserted
                        ? (r.verdict == "destabilized" && r.growth_monotone && r.growth_doubles)
                        : r.verdict == "stable";
  j["pass"] = pass;
  return j;
}

Json to_json(const ScalingValidationReport& r) {
  Json j;
  j["monotone"] = r.monotone;
  if (r.offending_pair)
    j["offending_pair"] = Json::array({r.offending_pair->first, r.offending_pair->second});
  j["beta1_fit"] = json_number(r.beta1_fit);
  j["beta2_fit"] = json_number(r.beta2_fit);
  j["slope"] = json_number(r.slope);
  j["c_for_slope"] = json_number(r.c_for_slope);
  j["feasible"] = r.feasible;
  j["scale_range"] = Json::array({r.scale_range.first, r.scale_range.second});
  j["samples"] = r.samples;
  j["pass"] = r.monotone && r.feasible;
  return j;
}

Json to_json(const AdmissibilityReport& r) {
  Json j;
  j["ok"] = r.ok;
  j["alpha1"] = json_number(r.alpha1);
  j["alpha2"] = json_number(r.alpha2);
  j["C"] = json_number(r.c);
  j["C_cap"] = r.c_cap;
  if (r.witness) j["witness"] = Json::array({r.witness->first, r.witness->second});
  j["skipped"] = r.skipped;
  j["used"] = r.used;
  j["pass"] = r.ok;
  return j;
}

PouPropertyCheck check_partition_properties(const MetricMeasureGraph& g,
                                            const PartitionOfUnity& pou) {
  PouPropertyCheck chk;
  chk.energy_constant = pou.energy_constant;
  chk.uncovered = pou.uncovered.size();
  const int n = g.vertex_count();
  std::vector<double> total(n, 0.0);
  std::vector<char> unit(n, 1);
  for (const auto& f : pou.functions) {
    for (const auto& [v, value] : f) {
      total[v] += value;
      if (value < 0 || value > 1) unit[v] = 0;
    }
  }
  chk.in_unit_interval = std::all_of(unit.begin(), unit.end(), [](char c) { return c != 0; });

  std::vector<char> covered(n, 1);
  for (VertexId v : pou.uncovered) covered[v] = 0;
  for (VertexId v = 0; v < n; ++v)
    if (covered[v])
      chk.max_sum_deviation = std::max(chk.max_sum_deviation, std::abs(total[v] - 1.0));

  chk.plateau_exact = true;
  chk.foreign_zero_exact = true;
  for (std::size_t i = 0; i < pou.net.size(); ++i) {
    const auto inner = ball(g, pou.net[i], pou.epsilon / 4);
    std::vector<double> own(n, 0.0);
    for (const auto& [v, value] : pou.functions[i]) own[v] = value;
    for (VertexId v : inner) {
      if (own[v] != 1.0) chk.plateau_exact = false;
      if (total[v] != own[v]) chk.foreign_zero_exact = false;
    }
  }
  return chk;
}

Json to_json(const PartitionOfUnity& pou, const PouPropertyCheck& chk) {
  Json j;
  j["net_size"] = pou.net.size();
  j["net"] = pou.net;
  j["epsilon"] = pou.epsilon;
  j["uncovered_count"] = chk.uncovered;
  if (!pou.uncovered.empty() && pou.uncovered.size() <= 64) j["uncovered"] = pou.uncovered;
  j["max_sum_deviation"] = json_number(chk.max_sum_deviation);
  j["plateau_exact"] = chk.plateau_exact;
  j["foreign_zero_exact"] = chk.foreign_zero_exact;
  j["in_unit_interval"] = chk.in_unit_interval;
  j["energy_constant"] = json_number(chk.energy_constant);
  const bool pass = chk.max_sum_deviation <= 1e-12 && chk.plateau_exact &&
                    chk.foreign_zero_exact && chk.in_unit_interval &&
                    std::isfinite(chk.energy_constant);
  j["pass"] = pass;
  return j;
}

Json make_envelope(const std::string& kind, Json report, std::uint64_t seed,
                   int threads, Json space_info) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["kind"] = kind;
  j["seed"] = seed;
  j["threads"] = threads;
  if (!space_info.empty()) j["space"] = space_info;
  j["report"] = std::move(report);
  return j;
}

void write_json_file(const Json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << j.dump(2) << '\n';
  if (!f) throw ConfigError("write failed: " + path);
}

Json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + path);
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void validate_envelope(const Json& j) {
  auto require = [&](const Json& node, const char* key, const char* path) {
    if (!node.contains(key))
      throw ConfigError(std::string("report schema: missing ") + path);
  };
  require(j, "schema_version", "/schema_version");
  if (j["schema_version"] != kSchemaVersion)
    throw ConfigError("report schema: unknown schema_version");
  require(j, "tool_version", "/tool_version");
  require(j, "kind", "/kind");
  require(j, "seed", "/seed");
  require(j, "threads", "/threads");
  if (j["kind"] == "scenario") {
    require(j, "operations", "/operations");
    require(j, "summary", "/summary");
    require(j["summary"], "verdict", "/summary/verdict");
    for (std::size_t i = 0; i < j["operations"].size(); ++i) {
      const auto& op = j["operations"][i];
      const std::string p = "/operations/" + std::to_string(i);
      require(op, "op", (p + "/op").c_str());
      require(op, "status", (p + "/status").c_str());
      require(op, "wall_time_s", (p + "/wall_time_s").c_str());
    }
  } else {
    require(j, "report", "/report");
  }
}

namespace {

std::string csv_rows(const std::map<double, double>& series, const char* header) {
  std::string out(header);
  out += '\n';
  for (const auto& [k, v] : series) {
    out += format_double(k);
    out += ',';
    out += format_double(v);
    out += '\n';
  }
  return out;
}

double any_to_double(const Json& v) {
  if (v.is_string()) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    throw ExportError("non-numeric value in series");
  }
  return v.get<double>();
}

}  // namespace

std::string export_plotdata(const Json& envelope, const std::string& kind,
                            const std::string& op_name) {
  Json report;
  if (envelope.contains("kind") && envelope["kind"] == "scenario") {
    if (op_name.empty())
      throw ExportError("scenario report: select an operation with --op");
    for (const auto& op : envelope["operations"]) {
      if (op.value("name", "") == op_name || op.value("op", "") == op_name) {
        if (!op.contains("report"))
          throw ExportError("operation '" + op_name + "' carries no report");
        report = op["report"];
        break;
      }
    }
    if (report.is_null()) throw ExportError("operation '" + op_name + "' not found");
  } else if (envelope.contains("report")) {
    report = envelope["report"];
  } else {
    report = envelope;
  }

  std::map<double, double> series;
  if (kind == "constant-vs-scale") {
    if (!report.contains("samples"))
      throw ExportError("missing series 'samples' for constant-vs-scale");
    for (const auto& s : report["samples"]) {
      // [x, r, value] or [x, r, R, value]
      const double scale = s[1].get<double>();
      const double value = any_to_double(s[s.size() - 1]);
      auto [it, fresh] = series.emplace(scale, value);
      if (!fresh) it->second = std::max(it->second, value);
    }
    return csv_rows(series, "scale,value");
  }
  if (kind == "ratio-vs-epsilon") {
    if (!report.contains("entries"))
      throw ExportError("missing series 'entries' for ratio-vs-epsilon");
    for (const auto& e : report["entries"]) {
      if (!e.contains("epsilon") || !e.contains("ratio"))
        throw ExportError("entries lack epsilon/ratio fields");
      const double eps = e["epsilon"].get<double>();
      const double ratio = any_to_double(e["ratio"]);
      auto [it, fresh] = series.emplace(eps, ratio);
      if (!fresh) it->second = std::max(it->second, ratio);
    }
    return csv_rows(series, "epsilon,sup_ratio");
  }
  if (kind == "harnack-vs-radius") {
    const Json* entries = nullptr;
    if (report.contains("entries"))
      entries = &report["entries"];
    else if (report.contains("weighted") && report["weighted"].contains("entries"))
      entries = &report["weighted"]["entries"];
    else if (report.contains("sweep") && report["sweep"].contains("entries"))
      entries = &report["sweep"]["entries"];
    if (entries == nullptr)
      throw ExportError("missing series 'entries' for harnack-vs-radius");
    for (const auto& e : *entries) {
      if (!e.contains("r") || !e.contains("constant")) continue;
      const double radius = e["r"].get<double>();
      const double c = any_to_double(e["constant"]);
      auto [it, fresh] = series.emplace(radius, c);
      if (!fresh) it->second = std::max(it->second, c);
    }
    if (series.empty()) throw ExportError("no (radius, constant) entries in report");
    return csv_rows(series, "radius,constant");
  }
  throw ExportError("unknown plot kind '" + kind + "'");
}

}  // namespace mmdlab
