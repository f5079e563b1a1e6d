#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mmdlab/errors.hpp"
#include "mmdlab/mmg_io.hpp"
#include "mmdlab/parallel.hpp"
#include "mmdlab/scenario.hpp"
#include "mmdlab/version.hpp"

namespace {

using mmdlab::Json;

// exit codes: 0 all pass, 1 verdict failure, 2 config error, 3 solver/internal
constexpr int kExitPass = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

struct GlobalArgs {
  int threads = 0;  // 0 = library default
  std::uint64_t seed = 0;
  bool verbose = false;
};

Json space_info_json(const mmdlab::MetricMeasureGraph& g, const std::string& source) {
  Json j;
  j["source"] = source;
  j["vertices"] = g.vertex_count();
  j["edges"] = g.edge_count();
  return j;
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  return mmdlab::read_json_file(path);
}

int emit_report(const std::string& kind, Json report, const GlobalArgs& globals,
                Json space_info, const std::string& out_path) {
  const bool pass = report.value("pass", true);
  Json envelope = mmdlab::make_envelope(kind, std::move(report), globals.seed,
                                        mmdlab::thread_count(), std::move(space_info));
  if (out_path.empty())
    std::printf("%s\n", envelope.dump(2).c_str());
  else
    mmdlab::write_json_file(envelope, out_path);
  return pass ? kExitPass : kExitVerdict;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmdlab: weighted-graph laboratory for volume, capacity and "
               "connectivity conditions"};
  app.set_version_flag("--version", mmdlab::kToolVersion);
  app.require_subcommand(1);

  GlobalArgs globals;
  app.add_option("--threads", globals.threads,
                 "worker threads (1 forces bit-exact serial mode)");
  app.add_option("--seed", globals.seed, "seed for sampling decisions");
  app.add_flag("--verbose", globals.verbose, "progress notes on stderr");

  // generate
  auto* gen = app.add_subcommand("generate", "emit an example space as .mmg");
  std::string gen_shape, gen_out;
  int gen_level = 1, gen_side = 0, gen_dim = 2;
  double gen_measure = 1, gen_conductance = 1, gen_edge_length = 1;
  double weight_alpha = 0;
  int weight_origin = -1;
  std::string weight_form = "power";
  gen->add_option("--shape", gen_shape, "lattice|path|cycle|sierpinski-gasket|sierpinski-carpet|vicsek-tree")->required();
  gen->add_option("--level", gen_level, "recursion depth (edge count for path/cycle)");
  gen->add_option("--side", gen_side, "lattice side length");
  gen->add_option("--dim", gen_dim, "lattice dimension");
  gen->add_option("--measure", gen_measure, "per-vertex measure");
  gen->add_option("--conductance", gen_conductance, "per-edge conductance");
  gen->add_option("--edge-length", gen_edge_length, "metric length per edge");
  gen->add_option("--weight-alpha", weight_alpha, "radial weight exponent");
  gen->add_option("--weight-origin", weight_origin, "radial weight base point");
  gen->add_option("--weight-form", weight_form, "power|paper");
  gen->add_option("-o,--output", gen_out, "output .mmg path")->required();

  // mapgen: refinement maps between consecutive fractal levels
  auto* mapgen = app.add_subcommand("mapgen", "emit refinement maps for a fractal family");
  std::string map_shape, map_out, map_levels;
  double map_edge_scale = 1.0;
  mapgen->add_option("--shape", map_shape, "sierpinski-gasket|vicsek-tree")->required();
  mapgen->add_option("--levels", map_levels, "comma-separated ascending levels, e.g. 2,3,4,5")->required();
  mapgen->add_option("--edge-scale", map_edge_scale,
                     "per-level edge length factor (edge length = factor^level)");
  mapgen->add_option("-o,--output", map_out, "output map file")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate a condition constant");
  std::string est_kind, est_space, est_config, est_out;
  est->add_option("kind", est_kind, "vd|pi|cap|fvg|rvd|chaining")->required();
  est->add_option("--space", est_space, "input .mmg")->required();
  est->add_option("--config", est_config, "config JSON")->required();
  est->add_option("-o,--output", est_out, "report JSON path");

  // check
  auto* chk = app.add_subcommand("check", "run a connectivity check");
  std::string chk_kind, chk_space, chk_config, chk_out, chk_levels, chk_maps;
  chk->add_option("kind", chk_kind,
                  "chain|ball|annulus|annulus-path|minimal-c0|chain-bound|rca|pou|two-point|refine")
      ->required();
  chk->add_option("--space", chk_space, "input .mmg (unused for refine)");
  chk->add_option("--config", chk_config, "config JSON")->required();
  chk->add_option("--levels", chk_levels, "comma-separated .mmg files, coarse to fine (refine)");
  chk->add_option("--maps", chk_maps, "refinement map file (refine)");
  chk->add_option("-o,--output", chk_out, "report JSON path");

  // harnack
  auto* har = app.add_subcommand("harnack", "harmonic measure and Harnack sweeps");
  std::string har_space, har_config, har_out;
  har->add_option("--space", har_space, "input .mmg")->required();
  har->add_option("--config", har_config, "config JSON")->required();
  har->add_option("-o,--output", har_out, "report JSON path");

  // run
  auto* runc = app.add_subcommand("run", "execute a scenario");
  std::string run_scenario_path, run_out;
  runc->add_option("scenario", run_scenario_path, "scenario JSON")->required();
  runc->add_option("-o,--output", run_out, "report JSON path");

  // export
  auto* exp = app.add_subcommand("export", "plot data CSV from a report");
  std::string exp_report, exp_kind, exp_op, exp_out;
  exp->add_option("--report", exp_report, "report JSON")->required();
  exp->add_option("--kind", exp_kind, "constant-vs-scale|ratio-vs-epsilon|harnack-vs-radius")
      ->required();
  exp->add_option("--op", exp_op, "operation name inside a scenario report");
  exp->add_option("-o,--output", exp_out, "CSV path");

  CLI11_PARSE(app, argc, argv);

  if (globals.threads > 0) mmdlab::set_thread_count(globals.threads);
  mmdlab::RunOptions run_opts;
  run_opts.seed = globals.seed;
  run_opts.verbose = globals.verbose;

  try {
    if (*gen) {
      Json source;
      Json gspec;
      gspec["shape"] = gen_shape;
      gspec["level"] = gen_level;
      if (gen_side > 0) gspec["side"] = gen_side;
      gspec["dim"] = gen_dim;
      gspec["measure"] = gen_measure;
      gspec["conductance"] = gen_conductance;
      gspec["edge_length"] = gen_edge_length;
      source["generator"] = gspec;
      if (weight_origin >= 0) {
        Json w;
        w["origin"] = weight_origin;
        w["alpha"] = weight_alpha;
        w["form"] = weight_form;
        source["weight"] = w;
      }
      const auto space = mmdlab::build_space(source);
      mmdlab::write_mmg_file(space, gen_out);
      if (globals.verbose) {
        const auto info = mmdlab::family_info(mmdlab::generator_spec_from_json(gspec));
        std::fprintf(stderr, "[mmdlab] %s: %d vertices, %zu edges\n", gen_out.c_str(),
                     space.vertex_count(), space.edge_count());
        if (info.hub)
          std::fprintf(stderr, "[mmdlab] hub vertex: %d (arm length %g)\n", *info.hub,
                       info.arm_length);
        for (auto c : info.corners) std::fprintf(stderr, "[mmdlab] corner vertex: %d\n", c);
      }
      return kExitPass;
    }

    if (*mapgen) {
      std::vector<int> levels;
      std::string token;
      for (char c : map_levels + ",") {
        if (c == ',') {
          if (!token.empty()) levels.push_back(std::stoi(token));
          token.clear();
        } else {
          token += c;
        }
      }
      if (levels.size() < 2) throw mmdlab::ConfigError("mapgen: need at least two levels");
      std::string out;
      for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        mmdlab::GeneratorSpec coarse, fine;
        coarse.shape = fine.shape = mmdlab::shape_from_name(map_shape);
        coarse.level = levels[i];
        fine.level = levels[i + 1];
        const auto map = mmdlab::refinement_map(coarse, fine);
        for (std::size_t v = 0; v < map.size(); ++v)
          out += "map " + std::to_string(i + 2) + " " + std::to_string(v) + " " +
                 std::to_string(map[v]) + "\n";
      }
      std::ofstream f(map_out);
      if (!f) throw mmdlab::ConfigError("cannot open for writing: " + map_out);
      f << out;
      return kExitPass;
    }

    if (*est || *chk || *har) {
      const std::string kind = *est ? "estimate." + est_kind
                               : *chk ? "check." + chk_kind
                                      : "harnack";
      const std::string space_path = *est ? est_space : *chk ? chk_space : har_space;
      const std::string config_path = *est ? est_config : *chk ? chk_config : har_config;
      const std::string out_path = *est ? est_out : *chk ? chk_out : har_out;
      std::string op = *est ? est_kind : *chk ? chk_kind : "harnack";

      Json config = load_config(config_path);
      if (*chk && chk_kind == "refine") {
        if (!chk_levels.empty()) {
          Json levels = Json::array();
          std::string token;
          for (char c : chk_levels + ",") {
            if (c == ',') {
              if (!token.empty()) levels.push_back(token);
              token.clear();
            } else {
              token += c;
            }
          }
          config["levels"] = levels;
        }
        if (!chk_maps.empty()) config["maps"] = chk_maps;
        const mmdlab::MetricMeasureGraph dummy({1.0, 1.0}, {{0, 1, 1.0, 1.0}});
        Json report = mmdlab::run_operation(dummy, "refine", config, run_opts);
        return emit_report(kind, std::move(report), globals, Json::object(), out_path);
      }

      if (space_path.empty()) throw mmdlab::ConfigError("missing --space");
      const auto space = mmdlab::read_mmg_file(space_path);
      Json report = mmdlab::run_operation(space, op, config, run_opts);
      return emit_report(kind, std::move(report), globals,
                         space_info_json(space, space_path), out_path);
    }

    if (*runc) {
      const Json scenario = mmdlab::read_json_file(run_scenario_path);
      const Json report = mmdlab::run_scenario(scenario, run_opts);
      if (run_out.empty())
        std::printf("%s\n", report.dump(2).c_str());
      else
        mmdlab::write_json_file(report, run_out);
      return mmdlab::scenario_exit_code(report);
    }

    if (*exp) {
      const Json report = mmdlab::read_json_file(exp_report);
      const std::string csv = mmdlab::export_plotdata(report, exp_kind, exp_op);
      if (exp_out.empty()) {
        std::printf("%s", csv.c_str());
      } else {
        std::ofstream f(exp_out, std::ios::binary);
        if (!f) throw mmdlab::ConfigError("cannot open for writing: " + exp_out);
        f << csv;
      }
      return kExitPass;
    }
  } catch (const mmdlab::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const mmdlab::ExportError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const mmdlab::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitInternal;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitConfig;
}
