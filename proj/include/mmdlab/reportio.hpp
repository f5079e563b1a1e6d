#pragma once

#include <json.hpp>
#include <string>

#include "mmdlab/connectivity.hpp"
#include "mmdlab/estimators.hpp"
#include "mmdlab/generators.hpp"
#include "mmdlab/harmonic.hpp"
#include "mmdlab/scaling.hpp"

namespace mmdlab {

// Insertion-ordered JSON keeps report field order deterministic.
using Json = nlohmann::ordered_json;

// Infinite values are serialized as the string "inf".
Json json_number(double x);

Json to_json(const CapacityResult& r, bool include_potential = false);
Json to_json(const ConditionReport& r);
Json to_json(const ChainingReport& r);
Json to_json(const ChainResult& r);
Json to_json(const ConnectivityReport& r);
Json to_json(const BallChainReport& r);
Json to_json(const MinimalC0Report& r);
Json to_json(const ChainBoundReport& r);
Json to_json(const TwoPointReport& r);
Json to_json(const RefinedChain& r);
Json to_json(const RcaReport& r);
Json to_json(const HarnackReport& r);
Json to_json(const EhiSweepReport& r);
Json to_json(const RemoteEhiReport& r);
Json to_json(const StabilityReport& r);
Json to_json(const ScalingValidationReport& r);
Json to_json(const AdmissibilityReport& r);

struct PouPropertyCheck {
  double max_sum_deviation = 0;   // |sum_z psi_z - 1| over covered vertices
  bool plateau_exact = false;     // psi_z == 1 on ball(z, eps/4)
  bool foreign_zero_exact = false;  // other functions vanish there
  bool in_unit_interval = false;
  double energy_constant = 0;
  std::size_t uncovered = 0;
};
PouPropertyCheck check_partition_properties(const MetricMeasureGraph& g,
                                            const PartitionOfUnity& pou);
Json to_json(const PartitionOfUnity& pou, const PouPropertyCheck& check);

/// Standard report envelope; every emitted file carries the schema and tool
/// versions plus the run's seed and thread setting.
Json make_envelope(const std::string& kind, Json report, std::uint64_t seed,
                   int threads, Json space_info = Json::object());

void write_json_file(const Json& j, const std::string& path);
Json read_json_file(const std::string& path);

/// Structural validation of an emitted report; throws ConfigError with a
/// JSON-pointer-style path on the first violation.
void validate_envelope(const Json& j);

/// CSV plot series from a report envelope. Kinds: constant-vs-scale,
/// ratio-vs-epsilon, harnack-vs-radius. For scenario reports `op_name`
/// selects the operation.
std::string export_plotdata(const Json& envelope, const std::string& kind,
                            const std::string& op_name = "");

}  // namespace mmdlab
