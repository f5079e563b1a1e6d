#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmdlab/generators.hpp"
#include "mmdlab/linsolve.hpp"
#include "mmdlab/space.hpp"

namespace mmdlab {

/// Exterior vertices adjacent to the domain (vertex boundary), ascending.
std::vector<VertexId> vertex_boundary(const MetricMeasureGraph& g,
                                      std::span<const VertexId> domain);

/// Solves the discrete Laplace equation on `domain` with the given values on
/// its vertex boundary. Returns a full vector: boundary data on the
/// boundary, the solution on the domain, zero elsewhere. Every component of
/// the domain must touch the boundary.
std::vector<double> harmonic_extension(const MetricMeasureGraph& g,
                                       std::span<const VertexId> domain,
                                       std::span<const double> boundary_values,
                                       const SolverOptions& opts = {});

struct HarmonicMeasureMatrix {
  std::vector<VertexId> domain;    // ascending
  std::vector<VertexId> boundary;  // ascending
  Eigen::MatrixXd k;               // rows: domain, cols: boundary; rows sum to 1
};

/// Column z is the harmonic extension of the boundary indicator of z. When
/// MMDLAB_CACHE_DIR is set, matrices are cached keyed by space and domain
/// content (binary sidecar, header "HMM1").
HarmonicMeasureMatrix harmonic_measure(const MetricMeasureGraph& g,
                                       std::span<const VertexId> domain,
                                       const SolverOptions& opts = {});

struct HarnackReport {
  VertexId x = 0;
  double r = 0;
  double delta = 0;
  double constant = 1;  // +inf when some boundary column vanishes on the core
  bool finite = true;
  VertexId attain_high = 0;  // y with the largest kernel value
  VertexId attain_low = 0;   // y' with the smallest
  VertexId attain_boundary = 0;
};

/// Exact optimal Harnack constant over nonnegative harmonic functions on
/// ball(x,r): the extreme rays of that cone are the harmonic-measure
/// columns, so the constant is the largest column ratio over the evaluation
/// set {y : d(x,y) <= delta r}.
HarnackReport harnack_constant(const MetricMeasureGraph& g, VertexId x, double r,
                               double delta, const SolverOptions& opts = {});

struct EhiEntry {
  VertexId x = 0;
  double r = 0;
  bool remote = true;
  std::optional<HarnackReport> report;
  std::string error;  // set when the ball was not usable
};

struct EhiSweepReport {
  std::vector<EhiEntry> entries;
  double max_constant = 0;  // over usable entries
  bool all_finite = true;
  bool pass = false;
  double cap = 0;
};

EhiSweepReport ehi_sweep(const MetricMeasureGraph& g,
                         std::span<const VertexId> centers,
                         std::span<const double> radii, double delta,
                         double cap = 1e3, const SolverOptions& opts = {});

struct RemoteEhiReport {
  EhiSweepReport all;
  double remote_max = 0;
  double non_remote_max = 0;
  int remote_count = 0;
  int non_remote_count = 0;
  bool remote_pass = false;
};

/// ehi_sweep with balls classified by the remoteness predicate
/// r >= eps/2 * d(o, x); maxima reported separately per class.
RemoteEhiReport remote_ehi_sweep(const MetricMeasureGraph& g, VertexId origin,
                                 double remoteness,
                                 std::span<const VertexId> centers,
                                 std::span<const double> radii, double delta,
                                 double cap = 1e3, const SolverOptions& opts = {});

struct StabilityReport {
  EhiSweepReport base;
  EhiSweepReport weighted;
  std::string verdict;  // stable | destabilized | other
  // per-radius maxima of the weighted constants, ascending radii
  std::vector<std::pair<double, double>> weighted_by_radius;
  bool growth_monotone = false;    // strictly increasing along the radii
  bool growth_doubles = false;     // last constant > 2x first
  bool counterexample_asserted = false;
};

/// Paired sweep on the base space and its weighted perturbation. Stable:
/// both bounded at the cap. Destabilized: base bounded while the weighted
/// constants exceed the cap or grow monotonically past twice their first
/// value. `counterexample` additionally asserts that growth pattern.
StabilityReport ehi_stability_experiment(const MetricMeasureGraph& g,
                                         const WeightSpec& weight,
                                         std::span<const VertexId> centers,
                                         std::span<const double> radii,
                                         double delta, double cap = 1e3,
                                         bool counterexample = false,
                                         const SolverOptions& opts = {});

}  // namespace mmdlab
