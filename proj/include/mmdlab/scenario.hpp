#pragma once

#include <memory>
#include <string>

#include "mmdlab/reportio.hpp"

namespace mmdlab {

struct RunOptions {
  std::uint64_t seed = 0;
  bool verbose = false;
  // timings go to the report only in parallel mode; in bit-exact mode
  // (threads == 1) the field is zero so reruns are byte identical
};

/// Space assembly pipeline shared by the CLI and scenarios:
/// generator-or-file, then optional gluing, then an optional radial weight.
MetricMeasureGraph build_space(const Json& source);
GeneratorSpec generator_spec_from_json(const Json& j);
WeightSpec weight_spec_from_json(const Json& j);
ScalingFunction psi_from_json(const Json& j);

/// Deterministic "interior" sample: the n vertices farthest from the rim
/// (vertices of non-maximal degree), ties by ascending id.
std::vector<VertexId> interior_sample(const MetricMeasureGraph& g, int n);

/// Centers from config: list of ids or "interior-sample:<n>".
std::vector<VertexId> centers_from_json(const MetricMeasureGraph& g, const Json& j);

/// Runs one named operation against a space. Returns the operation's report
/// (always carrying a "pass" field).
Json run_operation(const MetricMeasureGraph& g, const std::string& op,
                   const Json& config, const RunOptions& run);

/// Executes a scenario document and returns the full run report envelope.
Json run_scenario(const Json& scenario, const RunOptions& run);

/// Exit code for a finished scenario report: 0 pass, 1 verdict failure.
int scenario_exit_code(const Json& report);

}  // namespace mmdlab
